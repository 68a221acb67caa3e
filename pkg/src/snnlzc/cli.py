"""Command-line interface.

Subcommands: gen-data, train, eval, lzc, sweep, report.  Exit codes:
0 success, 2 configuration error, 3 data error, 4 numerical divergence.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .classifier import accuracy, read_classifier
from .core import read_spike_trains
from .encoding import demux_bits
from .errors import ConfigError, DataError, NumericalError, SnnLzcError
from .harness import (
    ExperimentConfig,
    TaskSpec,
    load_config,
    load_dataset,
    report_tables,
    run_experiment,
    synthesize_dataset,
    write_dataset,
)
from .learning import default_search_space
from .lzc import lz76_parse, lzc_normalized
from .network import forward, output_features, read_model


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snnlzc",
        description="Spiking-network training and evaluation with an "
        "LZ-complexity readout.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="synthesize a labeled two-class Poisson dataset")
    p.add_argument("--rate-a", type=float, required=True, help="class-0 rate in Hz")
    p.add_argument("--rate-b", type=float, required=True, help="class-1 rate in Hz")
    p.add_argument("--bins", type=int, default=1024)
    p.add_argument("--dt-ms", type=float, default=1.0)
    p.add_argument("--train", type=int, required=True)
    p.add_argument("--val", type=int, required=True)
    p.add_argument("--test", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("train", help="train one model at the configured (n, eta)")
    p.add_argument("--model", choices=("lif", "meta"), required=True)
    p.add_argument("--rule", choices=("bp", "stdp", "tempotron"), required=True)
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("eval", help="score a trained model + classifier on a dataset")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--classifier", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--report", type=Path, required=True, metavar="FILE.csv")

    p = sub.add_parser("lzc", help="LZ76 complexity of each train in a spike-train file")
    p.add_argument("--in", dest="infile", type=Path, required=True)
    p.add_argument("--format", choices=("csv",), default="csv")

    p = sub.add_parser("sweep", help="baseline/extended hyperparameter random search")
    p.add_argument("--mode", choices=("baseline", "extended"), required=True)
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--seeds", type=int, required=True, help="inner seeds per candidate")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("report", help="aggregate experiment results into a table")
    p.add_argument("--results", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, metavar="FILE.csv")
    p.add_argument("--plot", type=Path, default=None, metavar="DIR")

    return parser


def _cmd_gen_data(args: argparse.Namespace) -> int:
    task = TaskSpec(
        rate_a_hz=args.rate_a,
        rate_b_hz=args.rate_b,
        n_bins=args.bins,
        dt_ms=args.dt_ms,
        train_count=args.train,
        val_count=args.val,
        test_count=args.test,
    )
    cfg = ExperimentConfig(task=task, master_seed=args.seed)
    write_dataset(args.out, synthesize_dataset(cfg))
    print(f"wrote train/val/test spike-train files to {args.out}")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, output_dir=args.out)
    cfg = replace(cfg, model_kind=args.model, rule=args.rule, search=None)
    dataset = load_dataset(args.data)
    result = run_experiment(cfg, dataset=dataset)
    print(
        f"trained {cfg.model_kind}/{cfg.rule}: "
        f"val {result.val_acc * 100:.2f}%  test {result.test_acc * 100:.2f}%"
    )
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    model = read_model(args.model)
    clf = read_classifier(args.classifier)
    dataset = load_dataset(args.data)
    if dataset.grid.n_bins % model.n != 0:
        raise DataError(
            f"model width {model.n} does not divide sequence length {dataset.grid.n_bins}"
        )
    append_counts = clf.feature_dim == 2 * model.n
    if not append_counts and clf.feature_dim != model.n:
        raise DataError(
            f"classifier dim {clf.feature_dim} matches neither n nor 2n of the model"
        )
    lines = ["split,count,correct,accuracy"]
    for split in ("train", "val", "test"):
        bits, labels = dataset.split(split)
        feats = []
        for row in bits:
            trace = forward(model, demux_bits(row, model.n))
            f = output_features(trace)
            if append_counts:
                f = np.concatenate([f, trace.output_spikes.mean(axis=1)])
            feats.append(f)
        feats = np.array(feats)
        acc = accuracy(clf, X=feats, y=labels)
        correct = int(round(acc * len(labels)))
        lines.append(f"{split},{len(labels)},{correct},{acc * 100:.2f}")
        print(f"{split}: {acc * 100:.2f}% ({correct}/{len(labels)})")
    args.report.parent.mkdir(parents=True, exist_ok=True)
    args.report.write_text("\n".join(lines) + "\n")
    return 0


def _cmd_lzc(args: argparse.Namespace) -> int:
    trains, _ = read_spike_trains(args.infile)
    print("index,n,C,c")
    for i, train in enumerate(trains):
        result = lz76_parse(train)
        c = lzc_normalized(train)
        print(f"{i},{result.n},{result.component_count},{c:.6f}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, output_dir=args.out)
    space = cfg.search
    if space is None:
        space = default_search_space(args.mode, cfg.model_kind, cfg.rule)
    elif space.mode != args.mode:
        # The flag wins, with the stock ranges for the requested mode.
        space = default_search_space(args.mode, cfg.model_kind, cfg.rule)
    space = replace(space, budget=args.budget, inner_seeds=args.seeds)
    cfg = replace(cfg, search=space)
    dataset = load_dataset(args.data)
    result = run_experiment(cfg, dataset=dataset)
    print(
        f"sweep {args.mode} {cfg.model_kind}/{cfg.rule}: winner "
        f"{result.winner_params}  val {result.val_acc * 100:.2f}%  "
        f"test {result.test_acc * 100:.2f}%"
    )
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    table = report_tables(args.results, args.out, plot_dir=args.plot)
    print(f"wrote {args.out} ({len(table)} rows)")
    return 0


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "lzc": _cmd_lzc,
    "sweep": _cmd_sweep,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4
    except SnnLzcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
