"""A single LSTM cell built from scratch: exact forward dynamics, sequence
application with a state-freezing padding rule, and an analytic backward
pass (backpropagation through time).

Gate layout
-----------
The four gates f, i, o, c share stacked parameter storage: `w` holds the
four recurrent matrices stacked row-wise, `u` the four input matrices and
`b` the four bias vectors, always in the order (forget, input, output,
candidate).  Per-gate views (`w_f`, `u_c`, ...) slice into the stacked
arrays, so assigning through a view mutates the canonical storage.

State freezing
--------------
A sequence shorter than its unrolled length keeps hidden and memory state
fixed once the true length is reached.  The frozen steps are exact copies,
not multiplications by a mask, so the final state after freezing is
bit-identical to the state after the last real step; gradients flow
through the copies untouched, and gradients for padded inputs are zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .numeric import ShapeError, matvec, uniform_init, uniform_init_vector

__all__ = [
    "GATE_ORDER",
    "LstmParams",
    "LstmState",
    "LstmTape",
    "sigmoid",
    "lstm_step",
    "lstm_run_frozen",
    "lstm_backward",
]

GATE_ORDER = ("f", "i", "o", "c")


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function, exp taken of -|z| only."""
    t = np.exp(-np.abs(z))
    return np.where(z >= 0.0, 1.0 / (1.0 + t), t / (1.0 + t))


@dataclass
class LstmParams:
    """Parameters of one LSTM cell.

    w: (4*d_out, d_out) recurrent weights, gate blocks in GATE_ORDER.
    u: (4*d_out, d_in) input weights.
    b: (4*d_out,) biases.
    """

    w: np.ndarray
    u: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        if self.w.ndim != 2 or self.u.ndim != 2 or self.b.ndim != 1:
            raise ShapeError(
                f"LstmParams expects 2-D w, 2-D u, 1-D b, got "
                f"{self.w.shape}, {self.u.shape}, {self.b.shape}"
            )
        d_out = self.w.shape[1]
        if self.w.shape[0] != 4 * d_out:
            raise ShapeError(f"w must be (4*d_out, d_out), got {self.w.shape}")
        if self.u.shape[0] != 4 * d_out:
            raise ShapeError(
                f"u rows {self.u.shape[0]} must equal 4*d_out = {4 * d_out}"
            )
        if self.b.shape[0] != 4 * d_out:
            raise ShapeError(
                f"b length {self.b.shape[0]} must equal 4*d_out = {4 * d_out}"
            )

    @property
    def d_out(self) -> int:
        return self.w.shape[1]

    @property
    def d_in(self) -> int:
        return self.u.shape[1]

    def _block(self, a: np.ndarray, gate: str) -> np.ndarray:
        k = GATE_ORDER.index(gate)
        d = self.d_out
        return a[k * d : (k + 1) * d]

    # Per-gate views into the stacked storage (writable).
    @property
    def w_f(self) -> np.ndarray:
        return self._block(self.w, "f")

    @property
    def w_i(self) -> np.ndarray:
        return self._block(self.w, "i")

    @property
    def w_o(self) -> np.ndarray:
        return self._block(self.w, "o")

    @property
    def w_c(self) -> np.ndarray:
        return self._block(self.w, "c")

    @property
    def u_f(self) -> np.ndarray:
        return self._block(self.u, "f")

    @property
    def u_i(self) -> np.ndarray:
        return self._block(self.u, "i")

    @property
    def u_o(self) -> np.ndarray:
        return self._block(self.u, "o")

    @property
    def u_c(self) -> np.ndarray:
        return self._block(self.u, "c")

    @property
    def b_f(self) -> np.ndarray:
        return self._block(self.b, "f")

    @property
    def b_i(self) -> np.ndarray:
        return self._block(self.b, "i")

    @property
    def b_o(self) -> np.ndarray:
        return self._block(self.b, "o")

    @property
    def b_c(self) -> np.ndarray:
        return self._block(self.b, "c")

    @classmethod
    def zeros(cls, d_in: int, d_out: int, dtype=np.float64) -> "LstmParams":
        return cls(
            w=np.zeros((4 * d_out, d_out), dtype=dtype),
            u=np.zeros((4 * d_out, d_in), dtype=dtype),
            b=np.zeros(4 * d_out, dtype=dtype),
        )

    @classmethod
    def init_uniform(
        cls,
        d_in: int,
        d_out: int,
        lo: float,
        hi: float,
        rng: np.random.Generator,
        dtype=np.float64,
    ) -> "LstmParams":
        """All entries drawn uniformly from [lo, hi); draw order w, u, b."""
        return cls(
            w=uniform_init(4 * d_out, d_out, lo, hi, rng, dtype),
            u=uniform_init(4 * d_out, d_in, lo, hi, rng, dtype),
            b=uniform_init_vector(4 * d_out, lo, hi, rng, dtype),
        )

    def arrays(self) -> dict[str, np.ndarray]:
        """Canonical storage in a fixed order, for optimizers and clipping."""
        return {"w": self.w, "u": self.u, "b": self.b}

    def copy(self) -> "LstmParams":
        return LstmParams(self.w.copy(), self.u.copy(), self.b.copy())


@dataclass
class LstmState:
    """Hidden state h and memory state c of one cell."""

    h: np.ndarray
    c: np.ndarray

    def __post_init__(self) -> None:
        if self.h.shape != self.c.shape or self.h.ndim != 1:
            raise ShapeError(
                f"state h {self.h.shape} and c {self.c.shape} must be equal 1-D"
            )

    @classmethod
    def zeros(cls, d_out: int, dtype=np.float64) -> "LstmState":
        return cls(h=np.zeros(d_out, dtype=dtype), c=np.zeros(d_out, dtype=dtype))

    def copy(self) -> "LstmState":
        return LstmState(self.h.copy(), self.c.copy())


class _StepCache(NamedTuple):
    """Activations of one real step needed by the backward pass."""

    x_in: np.ndarray  # input after the input mask
    h_in: np.ndarray  # previous hidden state after the recurrent mask
    c_prev: np.ndarray
    f: np.ndarray
    i: np.ndarray
    o: np.ndarray
    c_tilde: np.ndarray
    tanh_c: np.ndarray  # tanh of the new memory state


@dataclass
class LstmTape:
    """Forward-pass cache for lstm_backward.

    Holds one _StepCache per real step; frozen steps carry no entries
    because they are exact copies.  `length` is the unrolled length the
    sequence was padded to, `true_len` the number of real steps.
    """

    d_in: int
    d_out: int
    true_len: int
    length: int
    steps: list[_StepCache] = field(repr=False)
    in_mask: np.ndarray | None = None
    rec_mask: np.ndarray | None = None


def _step(
    params: LstmParams,
    x: np.ndarray,
    state: LstmState,
    in_mask: np.ndarray | None,
    rec_mask: np.ndarray | None,
) -> tuple[LstmState, _StepCache]:
    h_in = state.h if rec_mask is None else state.h * rec_mask
    x_in = x if in_mask is None else x * in_mask
    z = matvec(params.w, h_in) + matvec(params.u, x_in) + params.b
    d = params.d_out
    gates = sigmoid(z[: 3 * d])
    f = gates[:d]
    i = gates[d : 2 * d]
    o = gates[2 * d :]
    c_tilde = np.tanh(z[3 * d :])
    c_new = f * state.c + i * c_tilde
    tanh_c = np.tanh(c_new)
    h_new = o * tanh_c
    cache = _StepCache(x_in, h_in, state.c, f, i, o, c_tilde, tanh_c)
    return LstmState(h_new, c_new), cache


def lstm_step(
    params: LstmParams,
    x: np.ndarray,
    state: LstmState,
    in_mask: np.ndarray | None = None,
    rec_mask: np.ndarray | None = None,
) -> LstmState:
    """One cell update.

    f = sigmoid(W_f h + U_f x + b_f), i and o analogous,
    c~ = tanh(W_c h + U_c x + b_c), c' = f*c + i*c~, h' = o*tanh(c').
    Optional masks multiply the input and the recurrent hidden state
    entering the gate preactivations (variational dropout).
    """
    if x.shape != (params.d_in,):
        raise ShapeError(
            f"input shape {x.shape} does not match cell d_in {params.d_in}"
        )
    if state.h.shape != (params.d_out,):
        raise ShapeError(
            f"state shape {state.h.shape} does not match cell d_out {params.d_out}"
        )
    new_state, _ = _step(params, x, state, in_mask, rec_mask)
    return new_state


def lstm_run_frozen(
    params: LstmParams,
    xs: np.ndarray,
    true_len: int,
    length: int,
    init: LstmState | None = None,
    in_mask: np.ndarray | None = None,
    rec_mask: np.ndarray | None = None,
) -> tuple[LstmState, LstmTape]:
    """Apply the cell over `xs` for `true_len` steps, frozen up to `length`.

    Steps beyond true_len keep h and c fixed, so the returned final state
    is exactly the state after step true_len no matter how far the
    sequence is padded.  `xs` is (>= true_len, d_in); rows past true_len
    are ignored.
    """
    if true_len == 0:
        raise ValueError("lstm_run_frozen requires true_len >= 1")
    if true_len > length:
        raise ValueError(f"true_len {true_len} exceeds unrolled length {length}")
    xs = np.asarray(xs)
    if xs.ndim != 2 or xs.shape[1] != params.d_in:
        raise ShapeError(
            f"xs shape {xs.shape} does not match (steps, d_in={params.d_in})"
        )
    if xs.shape[0] < true_len:
        raise ValueError(f"xs has {xs.shape[0]} rows, needs at least {true_len}")
    state = LstmState.zeros(params.d_out, dtype=params.w.dtype) if init is None else init
    if state.h.shape != (params.d_out,):
        raise ShapeError(
            f"init state shape {state.h.shape} does not match d_out {params.d_out}"
        )
    steps: list[_StepCache] = []
    for t in range(true_len):
        state, cache = _step(params, xs[t], state, in_mask, rec_mask)
        steps.append(cache)
    tape = LstmTape(
        d_in=params.d_in,
        d_out=params.d_out,
        true_len=true_len,
        length=length,
        steps=steps,
        in_mask=in_mask,
        rec_mask=rec_mask,
    )
    return state, tape


def lstm_backward(
    params: LstmParams,
    tape: LstmTape,
    d_h_final: np.ndarray,
    d_c_final: np.ndarray,
) -> tuple[LstmParams, np.ndarray, np.ndarray, np.ndarray]:
    """Exact gradients through a frozen run.

    Given dL/dh_final and dL/dc_final, returns (parameter gradients as an
    LstmParams-shaped container, input gradients of shape (length, d_in)
    with zero rows for padded steps, dL/dh_0, dL/dc_0).  Frozen steps are
    identity copies, so the upstream gradients pass through them
    unchanged and the loop starts at the last real step.
    """
    if tape.d_in != params.d_in or tape.d_out != params.d_out:
        raise ShapeError(
            f"tape dims ({tape.d_in}, {tape.d_out}) do not match params "
            f"({params.d_in}, {params.d_out})"
        )
    if d_h_final.shape != (params.d_out,) or d_c_final.shape != (params.d_out,):
        raise ShapeError("upstream gradient shapes must be (d_out,)")

    d = params.d_out
    dtype = params.w.dtype
    grads = LstmParams.zeros(params.d_in, d, dtype=dtype)
    input_grads = np.zeros((tape.length, params.d_in), dtype=dtype)
    dh = np.asarray(d_h_final, dtype=dtype).copy()
    dc = np.asarray(d_c_final, dtype=dtype).copy()

    for t in range(tape.true_len - 1, -1, -1):
        s = tape.steps[t]
        do = dh * s.tanh_c
        dc = dc + dh * s.o * (1.0 - s.tanh_c * s.tanh_c)
        dzf = (dc * s.c_prev) * s.f * (1.0 - s.f)
        dzi = (dc * s.c_tilde) * s.i * (1.0 - s.i)
        dzo = do * s.o * (1.0 - s.o)
        dzc = (dc * s.i) * (1.0 - s.c_tilde * s.c_tilde)
        dz = np.concatenate((dzf, dzi, dzo, dzc))
        grads.w += np.outer(dz, s.h_in)
        grads.u += np.outer(dz, s.x_in)
        grads.b += dz
        dh = params.w.T @ dz
        if tape.rec_mask is not None:
            dh = dh * tape.rec_mask
        dx = params.u.T @ dz
        if tape.in_mask is not None:
            dx = dx * tape.in_mask
        input_grads[t] = dx
        dc = dc * s.f

    return grads, input_grads, dh, dc
