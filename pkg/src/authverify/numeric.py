"""Dense linear-algebra substrate: seeded randomness, matrix-vector products,
uniform initialization, and global-norm gradient clipping.

Matrices are 2-D C-contiguous (row-major) numpy arrays, vectors are 1-D
arrays.  float64 is the default precision everywhere; float32 may be
requested for training speed, but gradient checking requires float64.
Shapes must match exactly: none of the public operations broadcast.

Randomness comes from numpy's PCG64 generator, whose stream is fixed by
numpy's stability policy, so a given seed reproduces the same draws on
every platform.
"""

from __future__ import annotations

import numpy as np

Matrix = np.ndarray
Vector = np.ndarray

__all__ = [
    "Matrix",
    "Vector",
    "ShapeError",
    "NonFiniteError",
    "make_rng",
    "matvec",
    "uniform_init",
    "uniform_init_vector",
    "global_norm",
    "clip_by_global_norm",
]


class ShapeError(ValueError):
    """Operand shapes do not match exactly."""


class NonFiniteError(FloatingPointError):
    """A value that must be finite is NaN or infinite."""


def make_rng(seed: int) -> np.random.Generator:
    """Return a PCG64 generator seeded with `seed`.

    The same seed always yields the same draw sequence; every random
    choice in this package flows from generators built here.
    """
    return np.random.Generator(np.random.PCG64(seed))


def matvec(w: Matrix, x: Vector) -> Vector:
    """Product w @ x with exact shape checking, result_i = sum_j w_ij x_j."""
    if w.ndim != 2:
        raise ShapeError(f"matvec expects a 2-D matrix, got shape {w.shape}")
    if x.ndim != 1:
        raise ShapeError(f"matvec expects a 1-D vector, got shape {x.shape}")
    if w.shape[1] != x.shape[0]:
        raise ShapeError(
            f"matvec shape mismatch: matrix {w.shape} against vector {x.shape}"
        )
    return w @ x


def uniform_init(
    rows: int,
    cols: int,
    lo: float,
    hi: float,
    rng: np.random.Generator,
    dtype=np.float64,
) -> Matrix:
    """rows x cols matrix with entries drawn uniformly from [lo, hi)."""
    if lo >= hi:
        raise ValueError(f"uniform_init requires lo < hi, got [{lo}, {hi})")
    return rng.uniform(lo, hi, size=(rows, cols)).astype(dtype, copy=False)


def uniform_init_vector(
    dim: int,
    lo: float,
    hi: float,
    rng: np.random.Generator,
    dtype=np.float64,
) -> Vector:
    """dim-dimensional vector with entries drawn uniformly from [lo, hi)."""
    if lo >= hi:
        raise ValueError(f"uniform_init_vector requires lo < hi, got [{lo}, {hi})")
    return rng.uniform(lo, hi, size=dim).astype(dtype, copy=False)


def global_norm(arrays: list[np.ndarray]) -> float:
    """L2 norm over all entries of all arrays taken together."""
    total = 0.0
    for a in arrays:
        total += float(np.dot(a.ravel(), a.ravel()))
    return float(np.sqrt(total))


def clip_by_global_norm(
    grads: list[np.ndarray], threshold: float
) -> tuple[list[np.ndarray], float]:
    """Rescale `grads` so their joint L2 norm is at most `threshold`.

    Returns (clipped gradients, original norm).  When the norm is already
    within the threshold the input arrays are returned unchanged, which
    makes the operation exactly idempotent.  Non-finite gradient entries
    raise NonFiniteError: they signal training divergence, not a state
    clipping should paper over.
    """
    if threshold <= 0:
        raise ValueError(f"clip threshold must be positive, got {threshold}")
    for a in grads:
        if not np.all(np.isfinite(a)):
            raise NonFiniteError("non-finite gradient entries before clipping")
    norm = global_norm(grads)
    if norm <= threshold:
        return grads, norm
    scale = threshold / norm
    return [a * scale for a in grads], norm
