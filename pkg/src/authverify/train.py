"""Training loop: Siamese weight sharing, mini-batches, Adadelta updates,
global-norm gradient clipping, variational dropout, per-epoch data
augmentation by reshuffling known-document concatenation order,
cross-validation splits, and early stopping on development accuracy.

Both documents of a pair are encoded by the same parameter object, so the
two Siamese branches share weights by construction; the pair gradient is
the sum of the two branch gradients.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, fields, replace
from typing import NamedTuple

import numpy as np

from .embeddings import EmbeddingTable
from .encoder import (
    EncoderParams,
    encode_document_training,
    encoder_backward,
    init_encoder_params,
    sample_dropout_masks,
)
from .encoder import encode_document as embed_document
from .numeric import ShapeError, clip_by_global_norm, make_rng
from .preprocess import (
    EncodedDocument,
    VerificationInstance,
    concatenate_known,
    encode_document,
)
from .siamese import Thresholds, contrastive_loss, contrastive_loss_grad, distance

__all__ = [
    "TrainConfig",
    "AdadeltaState",
    "CvSplit",
    "EncodedPair",
    "FitResult",
    "adadelta_update",
    "pair_gradients",
    "train_step",
    "augment_epoch",
    "make_cv_splits",
    "encode_instance",
    "fit",
]


@dataclass(frozen=True)
class TrainConfig:
    """All hyperparameters of the model and its training run.

    Dimension and optimizer defaults follow the reference recipe this
    encoder was built for: 300-d word vectors halved at each level,
    sentence/word caps 123/33, Adadelta at fixed learning rate 1.0,
    dropout 0.3, clip norm 5, batch size 32.
    """

    d_w: int = 300
    d_s: int = 150
    d_d: int = 75
    max_words: int = 33
    max_sentences: int = 123
    batch_size: int = 32
    clip_norm: float = 5.0
    dropout_rate: float = 0.3
    adadelta_lr: float = 1.0
    adadelta_rho: float = 0.95
    adadelta_eps: float = 1e-6
    tau1: float = 1.0
    tau2: float = 3.0
    max_epochs: int = 30
    patience: int = 10
    seed: int = 0
    init_lo: float = -0.05
    init_hi: float = 0.05
    augment: bool = True
    dtype: str = "float64"

    def __post_init__(self) -> None:
        for name in ("d_w", "d_s", "d_d", "max_words", "max_sentences",
                     "batch_size", "max_epochs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")
        if self.clip_norm <= 0:
            raise ValueError("clip_norm must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if not self.tau1 < self.tau2:
            raise ValueError("tau1 < tau2 required")
        if self.dtype not in ("float64", "float32"):
            raise ValueError(f"dtype must be float64 or float32, got {self.dtype}")

    @property
    def thresholds(self) -> Thresholds:
        return Thresholds(self.tau1, self.tau2)

    @property
    def numpy_dtype(self):
        return np.float64 if self.dtype == "float64" else np.float32

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def updated(self, **kwargs) -> "TrainConfig":
        return replace(self, **kwargs)


@dataclass
class AdadeltaState:
    """Per-parameter running averages E[g^2] and E[dx^2], zero-initialized."""

    sq_grad_avg: dict[str, np.ndarray]
    sq_update_avg: dict[str, np.ndarray]

    @classmethod
    def zeros_like(cls, arrays: dict[str, np.ndarray]) -> "AdadeltaState":
        return cls(
            sq_grad_avg={k: np.zeros_like(a) for k, a in arrays.items()},
            sq_update_avg={k: np.zeros_like(a) for k, a in arrays.items()},
        )


def adadelta_update(
    state: AdadeltaState,
    grads: dict[str, np.ndarray],
    lr: float = 1.0,
    rho: float = 0.95,
    eps: float = 1e-6,
) -> tuple[dict[str, np.ndarray], AdadeltaState]:
    """One Adadelta step; returns (applied deltas, advanced state).

    E[g^2] <- rho E[g^2] + (1-rho) g^2
    dx      = -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
    E[dx^2] <- rho E[dx^2] + (1-rho) dx^2
    applied = lr * dx
    """
    if set(state.sq_grad_avg) != set(grads):
        raise ShapeError(
            f"state keys {sorted(state.sq_grad_avg)} do not match "
            f"gradient keys {sorted(grads)}"
        )
    deltas: dict[str, np.ndarray] = {}
    new_eg2: dict[str, np.ndarray] = {}
    new_edx2: dict[str, np.ndarray] = {}
    for key, g in grads.items():
        eg2 = state.sq_grad_avg[key]
        edx2 = state.sq_update_avg[key]
        if eg2.shape != g.shape:
            raise ShapeError(
                f"gradient {key} shape {g.shape} does not match state {eg2.shape}"
            )
        eg2 = rho * eg2 + (1.0 - rho) * g * g
        dx = -np.sqrt(edx2 + eps) / np.sqrt(eg2 + eps) * g
        edx2 = rho * edx2 + (1.0 - rho) * dx * dx
        new_eg2[key] = eg2
        new_edx2[key] = edx2
        deltas[key] = lr * dx
    return deltas, AdadeltaState(new_eg2, new_edx2)


class EncodedPair(NamedTuple):
    """A verification pair ready for the encoder: the (concatenated) known
    document, the unknown document, and the label."""

    known: EncodedDocument
    unknown: EncodedDocument
    label: int


def pair_gradients(
    params: EncoderParams,
    pair: EncodedPair,
    thresholds: Thresholds,
    masks_known=None,
    masks_unknown=None,
) -> tuple[float, EncoderParams]:
    """Loss and shared-weight gradients for one pair.

    Both branches run with the same `params`; the returned gradient
    container is the sum of the two branch contributions.
    """
    x1, tape1 = encode_document_training(params, pair.known, masks_known)
    x2, tape2 = encode_document_training(params, pair.unknown, masks_unknown)
    loss = contrastive_loss(x1, x2, pair.label, thresholds)
    g1, g2 = contrastive_loss_grad(x1, x2, pair.label, thresholds)
    grads = encoder_backward(params, tape1, g1)
    grads.add_(encoder_backward(params, tape2, g2))
    return loss, grads


def train_step(
    params: EncoderParams,
    opt_state: AdadeltaState,
    batch: list[EncodedPair],
    config: TrainConfig,
    rng: np.random.Generator,
) -> tuple[float, float, AdadeltaState]:
    """One mini-batch update; mutates `params` in place.

    Per pair, fresh dropout masks are sampled for each document; the
    batch-mean gradient is clipped by global norm and applied through
    Adadelta.  Returns (mean loss, pre-clip gradient norm, new state).
    """
    if not batch:
        raise ValueError("train_step requires a non-empty batch")
    dims = (config.d_w, config.d_s, config.d_d)
    dtype = config.numpy_dtype
    total = EncoderParams.zeros(*dims, dtype=dtype)
    loss_sum = 0.0
    for pair in batch:
        if config.dropout_rate > 0.0:
            mk = sample_dropout_masks(dims, config.dropout_rate, rng, dtype)
            mu = sample_dropout_masks(dims, config.dropout_rate, rng, dtype)
        else:
            mk = mu = None
        loss, grads = pair_gradients(params, pair, config.thresholds, mk, mu)
        loss_sum += loss
        total.add_(grads)
    mean_loss = loss_sum / len(batch)
    if not np.isfinite(mean_loss):
        raise FloatingPointError(f"non-finite batch loss {mean_loss}")

    grad_arrays = total.arrays()
    keys = list(grad_arrays)
    scaled = [grad_arrays[k] / len(batch) for k in keys]
    clipped, grad_norm = clip_by_global_norm(scaled, config.clip_norm)
    grads_dict = dict(zip(keys, clipped))
    deltas, new_state = adadelta_update(
        opt_state, grads_dict, config.adadelta_lr, config.adadelta_rho,
        config.adadelta_eps,
    )
    param_arrays = params.arrays()
    for key in keys:
        param_arrays[key] += deltas[key]
    return mean_loss, grad_norm, new_state


def augment_epoch(
    instances: list[VerificationInstance], rng: np.random.Generator
) -> list[VerificationInstance]:
    """Redraw each instance's known-document order uniformly.

    Single-known-document instances are passed through unchanged; labels
    and unknown documents are never touched.
    """
    out: list[VerificationInstance] = []
    for inst in instances:
        if len(inst.known_docs) == 1:
            out.append(inst)
            continue
        order = rng.permutation(len(inst.known_docs))
        out.append(
            VerificationInstance(
                known_docs=[inst.known_docs[k] for k in order],
                unknown_doc=inst.unknown_doc,
                label=inst.label,
            )
        )
    return out


@dataclass(frozen=True)
class CvSplit:
    """One cross-validation fold: disjoint train/dev/test instance ids."""

    fold_index: int
    train_ids: list[int]
    dev_ids: list[int]
    test_ids: list[int]


def make_cv_splits(
    corpus_size: int, k: int = 10, rng: np.random.Generator | None = None
) -> list[CvSplit]:
    """k folds over a shuffled corpus; each instance is in exactly one
    test fold, and the remainder of each fold splits train:dev at 8:1.

    Fold sizes differ by at most one when k does not divide the corpus.
    """
    if rng is None:
        raise ValueError("make_cv_splits requires an explicit rng")
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    if corpus_size < k:
        raise ValueError(f"corpus size {corpus_size} is smaller than k = {k}")
    ids = [int(i) for i in rng.permutation(corpus_size)]
    base, extra = divmod(corpus_size, k)
    folds: list[list[int]] = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(ids[start : start + size])
        start += size
    splits: list[CvSplit] = []
    for i in range(k):
        rest: list[int] = []
        for j in range(k):
            if j != i:
                rest.extend(folds[j])
        dev_size = max(1, round(len(rest) / 9))
        splits.append(
            CvSplit(
                fold_index=i,
                train_ids=rest[dev_size:],
                dev_ids=rest[:dev_size],
                test_ids=folds[i],
            )
        )
    return splits


def encode_instance(
    inst: VerificationInstance, table: EmbeddingTable, config: TrainConfig
) -> EncodedPair:
    """Concatenate the known documents in their current order and encode
    both sides of the pair."""
    known_text = concatenate_known(inst, list(range(len(inst.known_docs))))
    known = encode_document(
        known_text, table, config.max_words, config.max_sentences,
        dtype=config.numpy_dtype,
    )
    unknown = encode_document(
        inst.unknown_doc, table, config.max_words, config.max_sentences,
        dtype=config.numpy_dtype,
    )
    return EncodedPair(known, unknown, inst.label)


@dataclass
class FitResult:
    """Trained parameters plus the per-epoch training log."""

    params: EncoderParams
    thresholds: Thresholds
    log: list[dict] = field(repr=False)
    best_epoch: int = 0
    best_dev_accuracy: float = 0.0


def _dev_metrics(
    params: EncoderParams,
    dev_pairs: list[EncodedPair],
    thresholds: Thresholds,
) -> tuple[float, float]:
    """Mean contrastive loss and accuracy at the midpoint threshold."""
    tau = thresholds.midpoint
    loss_sum = 0.0
    correct = 0
    for pair in dev_pairs:
        x1 = embed_document(params, pair.known)
        x2 = embed_document(params, pair.unknown)
        loss_sum += contrastive_loss(x1, x2, pair.label, thresholds)
        predicted_same = distance(x1, x2) < tau
        if predicted_same == (pair.label == 1):
            correct += 1
    return loss_sum / len(dev_pairs), correct / len(dev_pairs)


def fit(
    train_instances: list[VerificationInstance],
    dev_instances: list[VerificationInstance],
    table: EmbeddingTable,
    config: TrainConfig,
    rng: np.random.Generator | None = None,
) -> FitResult:
    """Train until development accuracy stops improving.

    Each epoch redraws the known-document concatenation order (data
    augmentation), shuffles mini-batches, and logs train loss, dev loss,
    dev accuracy at the midpoint threshold, mean gradient norm, and wall
    time.  The parameters kept are the ones from the best-dev-accuracy
    epoch; training stops after `patience` epochs without improvement or
    at max_epochs.
    """
    if not train_instances:
        raise ValueError("empty train set")
    if not dev_instances:
        raise ValueError("empty dev set")
    if rng is None:
        rng = make_rng(config.seed)

    dims = (config.d_w, config.d_s, config.d_d)
    params = init_encoder_params(
        *dims, config.init_lo, config.init_hi, rng, dtype=config.numpy_dtype
    )
    opt_state = AdadeltaState.zeros_like(params.arrays())
    thresholds = config.thresholds

    dev_pairs = [encode_instance(inst, table, config) for inst in dev_instances]

    # Unknown documents and single-known instances never change across
    # epochs, so their encodings are cached by position.
    known_cache: dict[int, EncodedDocument] = {}
    unknown_cache: dict[int, EncodedDocument] = {}

    def epoch_pairs(instances: list[VerificationInstance]) -> list[EncodedPair]:
        pairs: list[EncodedPair] = []
        for idx, inst in enumerate(instances):
            if idx not in unknown_cache:
                unknown_cache[idx] = encode_document(
                    inst.unknown_doc, table, config.max_words,
                    config.max_sentences, dtype=config.numpy_dtype,
                )
            if len(inst.known_docs) == 1:
                if idx not in known_cache:
                    known_cache[idx] = encode_document(
                        inst.known_docs[0], table, config.max_words,
                        config.max_sentences, dtype=config.numpy_dtype,
                    )
                known = known_cache[idx]
            else:
                text = concatenate_known(inst, list(range(len(inst.known_docs))))
                known = encode_document(
                    text, table, config.max_words, config.max_sentences,
                    dtype=config.numpy_dtype,
                )
            pairs.append(EncodedPair(known, unknown_cache[idx], inst.label))
        return pairs

    log: list[dict] = []
    best_params = params.copy()
    best_accuracy = -1.0
    best_epoch = 0
    epochs_since_best = 0

    for epoch in range(1, config.max_epochs + 1):
        started = time.perf_counter()
        instances = (
            augment_epoch(train_instances, rng) if config.augment else train_instances
        )
        pairs = epoch_pairs(instances)
        order = rng.permutation(len(pairs))
        loss_sum = 0.0
        norm_sum = 0.0
        n_batches = 0
        for lo in range(0, len(order), config.batch_size):
            batch = [pairs[j] for j in order[lo : lo + config.batch_size]]
            loss, grad_norm, opt_state = train_step(
                params, opt_state, batch, config, rng
            )
            loss_sum += loss * len(batch)
            norm_sum += grad_norm
            n_batches += 1
        dev_loss, dev_accuracy = _dev_metrics(params, dev_pairs, thresholds)
        log.append(
            {
                "epoch": epoch,
                "train_loss": loss_sum / len(pairs),
                "dev_loss": dev_loss,
                "dev_accuracy": dev_accuracy,
                "grad_norm_mean": norm_sum / n_batches,
                "seconds": time.perf_counter() - started,
            }
        )
        if dev_accuracy > best_accuracy:
            best_accuracy = dev_accuracy
            best_params = params.copy()
            best_epoch = epoch
            epochs_since_best = 0
        else:
            epochs_since_best += 1
        if epochs_since_best >= config.patience:
            break

    return FitResult(
        params=best_params,
        thresholds=thresholds,
        log=log,
        best_epoch=best_epoch,
        best_dev_accuracy=best_accuracy,
    )
