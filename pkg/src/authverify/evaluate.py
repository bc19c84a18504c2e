"""Metrics, the cross-validation driver, model checkpointing, and pair
verification.

The positive class is same_author (label 1) throughout.  Reports carry
the raw confusion counts next to the derived metrics so every number can
be recomputed, in both fraction and percent form; the aggregate is the
arithmetic mean with the sample (n-1) standard deviation across folds.
All report content is deterministic given the seed: wall-clock timings
stay in the training log and never enter a report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingTable
from .encoder import EncoderParams
from .encoder import encode_document as embed_document
from .lstm import LstmParams
from .preprocess import VerificationInstance, encode_document
from .siamese import PairScore, Thresholds, decide, distance
from .train import (
    EncodedPair,
    FitResult,
    TrainConfig,
    encode_instance,
    fit,
    make_cv_splits,
)

__all__ = [
    "ConfusionCounts",
    "Metrics",
    "confusion_metrics",
    "Model",
    "save_checkpoint",
    "load_checkpoint",
    "pair_distances",
    "counts_at_threshold",
    "calibrate_tau",
    "evaluate_pairs",
    "FoldResult",
    "CvReport",
    "cross_validate",
    "verify_pair",
]

METRIC_NAMES = ("precision", "recall", "f1", "accuracy")


@dataclass(frozen=True)
class ConfusionCounts:
    """Binary confusion counts; positive class is same_author."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class Metrics:
    """Derived metrics; `flags` names any 0/0 ratio that was defined as 0."""

    precision: float
    recall: float
    f1: float
    accuracy: float
    flags: tuple[str, ...] = ()

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES}


def confusion_metrics(counts: ConfusionCounts) -> Metrics:
    """precision tp/(tp+fp), recall tp/(tp+fn), f1 2PR/(P+R),
    accuracy (tp+tn)/total; any 0/0 is reported as 0 and flagged."""
    if counts.total == 0:
        raise ValueError("cannot compute metrics over zero pairs")
    flags: list[str] = []

    def ratio(num: int, den: int, name: str) -> float:
        if den == 0:
            flags.append(f"{name}_undefined")
            return 0.0
        return num / den

    precision = ratio(counts.tp, counts.tp + counts.fp, "precision")
    recall = ratio(counts.tp, counts.tp + counts.fn, "recall")
    if precision + recall == 0.0:
        flags.append("f1_undefined")
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    accuracy = (counts.tp + counts.tn) / counts.total
    return Metrics(precision, recall, f1, accuracy, tuple(flags))


@dataclass
class Model:
    """Everything needed to verify a pair: encoder parameters, the
    configuration they were trained under, and the embedding table."""

    params: EncoderParams
    config: TrainConfig
    table: EmbeddingTable

    @property
    def thresholds(self) -> Thresholds:
        return self.config.thresholds


def save_checkpoint(path: str, params: EncoderParams, config: TrainConfig) -> None:
    """Write parameters and config to an .npz container.

    Arrays are stored uncompressed at full precision, so a load returns
    value-exact copies; the config rides along as a JSON string.
    """
    payload = {key.replace(".", "_"): a for key, a in params.arrays().items()}
    payload["config_json"] = np.array(json.dumps(config.to_dict(), sort_keys=True))
    with open(path, "wb") as fh:
        np.savez(fh, **payload)


def load_checkpoint(path: str) -> tuple[EncoderParams, TrainConfig]:
    """Inverse of save_checkpoint; round-trips values exactly."""
    with np.load(path, allow_pickle=False) as archive:
        config = TrainConfig.from_dict(json.loads(str(archive["config_json"])))
        params = EncoderParams(
            level1=LstmParams(
                w=archive["level1_w"], u=archive["level1_u"], b=archive["level1_b"]
            ),
            level2=LstmParams(
                w=archive["level2_w"], u=archive["level2_u"], b=archive["level2_b"]
            ),
        )
    return params, config


def pair_distances(
    params: EncoderParams, pairs: list[EncodedPair]
) -> tuple[list[float], list[int]]:
    """Embedding distance and label for every pair, in order."""
    distances: list[float] = []
    labels: list[int] = []
    for pair in pairs:
        x1 = embed_document(params, pair.known)
        x2 = embed_document(params, pair.unknown)
        distances.append(distance(x1, x2))
        labels.append(pair.label)
    return distances, labels


def counts_at_threshold(
    distances: list[float], labels: list[int], tau: float
) -> ConfusionCounts:
    """Confusion counts with same_author called strictly below tau."""
    tp = fp = tn = fn = 0
    for d, label in zip(distances, labels):
        same = d < tau
        if same and label == 1:
            tp += 1
        elif same and label == 0:
            fp += 1
        elif not same and label == 1:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def calibrate_tau(distances: list[float], labels: list[int]) -> float:
    """Decision threshold maximizing accuracy on the given distances.

    Candidates are midpoints between consecutive sorted distances plus
    one below the minimum and one above the maximum; ties resolve to the
    smallest candidate, so the result is deterministic.
    """
    if not distances:
        raise ValueError("cannot calibrate a threshold on zero pairs")
    ordered = sorted(set(distances))
    candidates = [ordered[0] / 2.0 if ordered[0] > 0 else 0.0]
    candidates += [0.5 * (a + b) for a, b in zip(ordered, ordered[1:])]
    candidates.append(ordered[-1] + 1.0)
    best_tau = candidates[0]
    best_correct = -1
    total = len(distances)
    for tau in candidates:
        correct = sum(
            1 for d, label in zip(distances, labels) if (d < tau) == (label == 1)
        )
        if correct > best_correct:
            best_correct = correct
            best_tau = tau
    return float(best_tau)


def evaluate_pairs(
    params: EncoderParams,
    pairs: list[EncodedPair],
    thresholds: Thresholds,
) -> ConfusionCounts:
    """Decide every pair at the midpoint threshold and tally the confusion.

    Same tie rule as `decide`: a distance exactly at the midpoint counts
    as different_authors.
    """
    distances, labels = pair_distances(params, pairs)
    return counts_at_threshold(distances, labels, thresholds.midpoint)


@dataclass
class FoldResult:
    """Outcome of one cross-validation fold.

    `counts`/`metrics` use the fixed midpoint threshold; the calibrated
    fields re-evaluate the fold's test pairs at the threshold that
    maximizes accuracy on its development pairs.
    """

    fold_index: int
    counts: ConfusionCounts
    metrics: Metrics
    best_epoch: int
    epochs_run: int
    calibrated_tau: float = 0.0
    counts_calibrated: ConfusionCounts | None = None
    metrics_calibrated: Metrics | None = None


@dataclass
class CvReport:
    """Per-fold results plus mean and sample standard deviation."""

    folds: list[FoldResult]
    seed: int
    config: TrainConfig
    aggregate: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.aggregate:
            self.aggregate = self._aggregate()

    def _aggregate(self) -> dict:
        out: dict = {}
        for name in METRIC_NAMES:
            values = [getattr(f.metrics, name) for f in self.folds]
            mean = float(np.mean(values))
            std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
            out[name] = {"mean": mean, "std": std}
        calibrated = [
            f.metrics_calibrated for f in self.folds if f.metrics_calibrated
        ]
        if len(calibrated) == len(self.folds) and calibrated:
            values = [m.accuracy for m in calibrated]
            out["accuracy_calibrated"] = {
                "mean": float(np.mean(values)),
                "std": float(np.std(values, ddof=1)) if len(values) > 1 else 0.0,
            }
        return out

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "num_folds": len(self.folds),
            "config": self.config.to_dict(),
            "folds": [
                {
                    "fold": f.fold_index,
                    "tp": f.counts.tp,
                    "fp": f.counts.fp,
                    "tn": f.counts.tn,
                    "fn": f.counts.fn,
                    "metrics": f.metrics.as_dict(),
                    "flags": list(f.metrics.flags),
                    "best_epoch": f.best_epoch,
                    "epochs_run": f.epochs_run,
                    "calibrated_tau": f.calibrated_tau,
                    "metrics_calibrated": (
                        f.metrics_calibrated.as_dict()
                        if f.metrics_calibrated
                        else None
                    ),
                }
                for f in self.folds
            ],
            "aggregate": self.aggregate,
            "aggregate_percent": {
                name: {
                    "mean": 100.0 * stats["mean"],
                    "std": 100.0 * stats["std"],
                }
                for name, stats in self.aggregate.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), ensure_ascii=False, indent=2)


def _run_fold(
    split,
    instances: list[VerificationInstance],
    table: EmbeddingTable,
    config: TrainConfig,
    seed_seq: np.random.SeedSequence,
) -> FoldResult:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    result: FitResult = fit(
        [instances[i] for i in split.train_ids],
        [instances[i] for i in split.dev_ids],
        table,
        config,
        rng=rng,
    )
    test_pairs = [
        encode_instance(instances[i], table, config) for i in split.test_ids
    ]
    test_distances, test_labels = pair_distances(result.params, test_pairs)
    counts = counts_at_threshold(
        test_distances, test_labels, config.thresholds.midpoint
    )

    dev_pairs = [
        encode_instance(instances[i], table, config) for i in split.dev_ids
    ]
    dev_distances, dev_labels = pair_distances(result.params, dev_pairs)
    tau = calibrate_tau(dev_distances, dev_labels)
    counts_cal = counts_at_threshold(test_distances, test_labels, tau)

    return FoldResult(
        fold_index=split.fold_index,
        counts=counts,
        metrics=confusion_metrics(counts),
        best_epoch=result.best_epoch,
        epochs_run=len(result.log),
        calibrated_tau=tau,
        counts_calibrated=counts_cal,
        metrics_calibrated=confusion_metrics(counts_cal),
    )


def cross_validate(
    instances: list[VerificationInstance],
    table: EmbeddingTable,
    config: TrainConfig,
    k: int = 10,
    threads: int = 1,
) -> CvReport:
    """k-fold cross-validation: fit on train with dev early stopping, then
    test each fold's held-out instances at the midpoint threshold.

    Every fold derives its own random stream from the config seed, so the
    report is identical whether folds run sequentially or on a thread
    pool; folds are aggregated in index order either way.
    """
    split_rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=config.seed, spawn_key=(0,)))
    )
    splits = make_cv_splits(len(instances), k=k, rng=split_rng)
    fold_seeds = np.random.SeedSequence(
        entropy=config.seed, spawn_key=(1,)
    ).spawn(k)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            folds = list(
                pool.map(
                    lambda args: _run_fold(*args),
                    [
                        (splits[i], instances, table, config, fold_seeds[i])
                        for i in range(k)
                    ],
                )
            )
    else:
        folds = [
            _run_fold(splits[i], instances, table, config, fold_seeds[i])
            for i in range(k)
        ]
    folds.sort(key=lambda f: f.fold_index)
    return CvReport(folds=folds, seed=config.seed, config=config)


def verify_pair(model: Model, doc_a: str, doc_b: str) -> PairScore:
    """Full inference pipeline on two raw texts: normalize, segment,
    tokenize, encode, measure, decide.  Deterministic for a fixed model."""
    enc_a = encode_document(
        doc_a, model.table, model.config.max_words, model.config.max_sentences,
        dtype=model.config.numpy_dtype,
    )
    enc_b = encode_document(
        doc_b, model.table, model.config.max_words, model.config.max_sentences,
        dtype=model.config.numpy_dtype,
    )
    x_a = embed_document(model.params, enc_a)
    x_b = embed_document(model.params, enc_b)
    return decide(distance(x_a, x_b), model.thresholds)
