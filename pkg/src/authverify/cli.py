"""Command-line surface.

Subcommands: `synthetic` (generate a benchmark corpus plus embeddings),
`preprocess` (corpus to encoded cache), `train` (fit one model on an
80/10/10 split), `verify` (compare two text files under a checkpoint),
`cross-validate` (k-fold report), `gradcheck` (finite-difference suite).

All randomness flows from `--seed`; report output carries no timestamps,
so two runs with the same seed write identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .embeddings import load_embeddings
from .evaluate import (
    Model,
    cross_validate,
    load_checkpoint,
    save_checkpoint,
    verify_pair,
)
from .gradcheck import run_suite
from .preprocess import load_corpus
from .synthetic import SyntheticSpec, write_synthetic
from .train import TrainConfig, encode_instance, fit, make_cv_splits
from .numeric import make_rng

__all__ = ["main", "build_parser"]


def _load_config(args) -> TrainConfig:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            config = TrainConfig.from_dict(json.load(fh))
    else:
        config = TrainConfig()
    if args.seed is not None:
        config = config.updated(seed=args.seed)
    return config


def _write_or_print(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    else:
        print(text)


def _cmd_synthetic(args) -> int:
    spec = SyntheticSpec(
        n_authors=args.authors,
        n_instances=args.instances,
    )
    instances = write_synthetic(
        args.corpus, args.embeddings, spec, seed=args.seed if args.seed is not None else 0
    )
    print(
        f"wrote {len(instances)} instances to {args.corpus} and "
        f"{spec.vocab_size} embeddings to {args.embeddings}"
    )
    return 0


def _cmd_preprocess(args) -> int:
    config = _load_config(args)
    table = load_embeddings(args.embeddings, config.d_w)
    instances = load_corpus(args.corpus)
    payload: dict[str, np.ndarray] = {}
    labels = np.zeros(len(instances), dtype=np.int64)
    for i, inst in enumerate(instances):
        pair = encode_instance(inst, table, config)
        labels[i] = pair.label
        for side, doc in (("known", pair.known), ("unknown", pair.unknown)):
            payload[f"{i}_{side}_words"] = doc.words[: doc.num_sentences]
            payload[f"{i}_{side}_lengths"] = doc.sent_lengths
    payload["labels"] = labels
    payload["meta_json"] = np.array(
        json.dumps(
            {
                "num_instances": len(instances),
                "max_words": config.max_words,
                "max_sentences": config.max_sentences,
                "dim": config.d_w,
                "oov_rate": table.oov_rate,
            },
            sort_keys=True,
        )
    )
    with open(args.out, "wb") as fh:
        np.savez(fh, **payload)
    print(
        f"encoded {len(instances)} instances to {args.out} "
        f"(oov rate {table.oov_rate:.4f})"
    )
    return 0


def _cmd_train(args) -> int:
    config = _load_config(args)
    table = load_embeddings(args.embeddings, config.d_w)
    instances = load_corpus(args.corpus)
    split_rng = make_rng(config.seed)
    split = make_cv_splits(len(instances), k=10, rng=split_rng)[0]
    result = fit(
        [instances[i] for i in split.train_ids],
        [instances[i] for i in split.dev_ids],
        table,
        config,
    )
    save_checkpoint(args.checkpoint, result.params, config)
    log_text = "\n".join(json.dumps(entry) for entry in result.log)
    _write_or_print(log_text, args.out)
    print(
        f"best dev accuracy {result.best_dev_accuracy:.4f} at epoch "
        f"{result.best_epoch}; checkpoint written to {args.checkpoint}",
        file=sys.stderr,
    )
    return 0


def _cmd_verify(args) -> int:
    params, config = load_checkpoint(args.checkpoint)
    table = load_embeddings(args.embeddings, config.d_w)
    with open(args.doc_a, encoding="utf-8") as fh:
        doc_a = fh.read()
    with open(args.doc_b, encoding="utf-8") as fh:
        doc_b = fh.read()
    score = verify_pair(Model(params, config, table), doc_a, doc_b)
    payload = score.to_json_dict()
    payload["tau"] = config.thresholds.midpoint
    _write_or_print(json.dumps(payload, indent=2), args.out)
    return 0


def _cmd_cross_validate(args) -> int:
    config = _load_config(args)
    threads = 1 if args.deterministic else args.threads
    table = load_embeddings(args.embeddings, config.d_w)
    instances = load_corpus(args.corpus)
    report = cross_validate(instances, table, config, k=args.folds, threads=threads)
    _write_or_print(report.to_json(), args.out)
    return 0


def _cmd_gradcheck(args) -> int:
    reports = run_suite(
        n_lstm_configs=args.configs, seed=args.seed if args.seed is not None else 0
    )
    worst = 0
    for report in reports:
        status = "ok" if report.ok else "FAIL"
        print(f"{status:4s} {report.label} ({report.checked} partials)")
        for failure in report.failures[:5]:
            print(
                f"     {failure.array}{failure.index}: analytic={failure.analytic:.3e} "
                f"numeric={failure.numeric:.3e} err={failure.error:.3e}"
            )
        worst = max(worst, len(report.failures))
    return 0 if worst == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="authverify",
        description="Authorship verification with a hierarchical recurrent "
        "Siamese document encoder.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        if config:
            p.add_argument("--config", help="JSON file of TrainConfig overrides")
        p.add_argument("--seed", type=int, default=None, help="master random seed")

    p = sub.add_parser("synthetic", help="generate a synthetic benchmark corpus")
    p.add_argument("--corpus", required=True, help="output corpus JSONL path")
    p.add_argument("--embeddings", required=True, help="output embeddings path")
    p.add_argument("--instances", type=int, default=800)
    p.add_argument("--authors", type=int, default=40)
    add_common(p, config=False)
    p.set_defaults(func=_cmd_synthetic)

    p = sub.add_parser("preprocess", help="encode a corpus into an npz cache")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True, help="output .npz path")
    add_common(p)
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("train", help="train one model on an 80/10/10 split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--checkpoint", required=True, help="output checkpoint .npz")
    p.add_argument("--out", help="training log path (JSON lines); stdout if absent")
    add_common(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("verify", help="compare two text files under a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("doc_a", help="first text file")
    p.add_argument("doc_b", help="second text file")
    p.add_argument("--out", help="decision JSON path; stdout if absent")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("cross-validate", help="k-fold cross-validation report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--threads", type=int, default=1, help="fold-level parallelism")
    p.add_argument(
        "--deterministic",
        action="store_true",
        help="force single-threaded execution (reports are seed-deterministic "
        "either way)",
    )
    p.add_argument("--out", help="report JSON path; stdout if absent")
    add_common(p)
    p.set_defaults(func=_cmd_cross_validate)

    p = sub.add_parser("gradcheck", help="finite-difference gradient suite")
    p.add_argument("--configs", type=int, default=20, help="random LSTM configs")
    add_common(p, config=False)
    p.set_defaults(func=_cmd_gradcheck)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
