"""Siamese verification head: Euclidean distance between document
embeddings, the two-threshold contrastive loss and its analytic
gradient, and the thresholded same-author decision.

The loss pulls same-author pairs below tau1 and pushes different-author
pairs above tau2; the decision threshold is the midpoint (tau1+tau2)/2.
A pair sitting exactly on the midpoint is called different_authors, the
conservative choice for a verification setting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numeric import ShapeError

__all__ = [
    "SAME_AUTHOR",
    "DIFFERENT_AUTHORS",
    "Thresholds",
    "PairScore",
    "distance",
    "contrastive_loss",
    "contrastive_loss_grad",
    "decide",
]

SAME_AUTHOR = "same_author"
DIFFERENT_AUTHORS = "different_authors"


@dataclass(frozen=True)
class Thresholds:
    """Distance thresholds with tau1 < tau2; tau1 must be non-negative."""

    tau1: float = 1.0
    tau2: float = 3.0

    def __post_init__(self) -> None:
        if self.tau1 < 0:
            raise ValueError(f"tau1 must be >= 0, got {self.tau1}")
        if not self.tau1 < self.tau2:
            raise ValueError(
                f"thresholds require tau1 < tau2, got {self.tau1} >= {self.tau2}"
            )

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.tau1 + self.tau2)


@dataclass(frozen=True)
class PairScore:
    """Decision for one document pair: the embedding distance, the verdict,
    and the signed margin distance - midpoint (negative means same side)."""

    distance: float
    decision: str
    margin: float

    def to_json_dict(self) -> dict:
        return {
            "distance": self.distance,
            "decision": self.decision,
            "margin": self.margin,
        }


def distance(x1: np.ndarray, x2: np.ndarray) -> float:
    """Euclidean distance sqrt(sum_i (x1_i - x2_i)^2)."""
    if x1.shape != x2.shape or x1.ndim != 1:
        raise ShapeError(
            f"distance requires equal 1-D shapes, got {x1.shape} and {x2.shape}"
        )
    diff = x1 - x2
    return float(np.sqrt(np.dot(diff, diff)))


def _check_label(label: int) -> None:
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label!r}")


def contrastive_loss(
    x1: np.ndarray, x2: np.ndarray, label: int, thresholds: Thresholds
) -> float:
    """(l/2) max(d - tau1, 0)^2 + ((1-l)/2) max(tau2 - d, 0)^2."""
    _check_label(label)
    d = distance(x1, x2)
    if label == 1:
        gap = max(d - thresholds.tau1, 0.0)
    else:
        gap = max(thresholds.tau2 - d, 0.0)
    return 0.5 * gap * gap


def contrastive_loss_grad(
    x1: np.ndarray, x2: np.ndarray, label: int, thresholds: Thresholds
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic (dL/dx1, dL/dx2); always dL/dx1 + dL/dx2 = 0.

    Zero in the flat regions, and zero at d = 0 by subgradient choice
    (any direction would do; zero keeps training deterministic).
    """
    _check_label(label)
    d = distance(x1, x2)
    zero = np.zeros_like(x1)
    if d == 0.0:
        return zero, zero.copy()
    if label == 1:
        if d <= thresholds.tau1:
            return zero, zero.copy()
        g1 = ((d - thresholds.tau1) / d) * (x1 - x2)
    else:
        if d >= thresholds.tau2:
            return zero, zero.copy()
        g1 = (-(thresholds.tau2 - d) / d) * (x1 - x2)
    return g1, -g1


def decide(d: float, thresholds: Thresholds) -> PairScore:
    """same_author iff d < (tau1+tau2)/2; the tie goes to different_authors."""
    if d < 0:
        raise ValueError(f"distance must be >= 0, got {d}")
    tau = thresholds.midpoint
    decision = SAME_AUTHOR if d < tau else DIFFERENT_AUTHORS
    return PairScore(distance=d, decision=decision, margin=d - tau)
