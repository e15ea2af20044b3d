"""Command-line entry point.

Subcommands: train, experiment, sweep, ablate, time, eval-labels,
dump-embeddings. Configuration comes from a config file (a path or the name
of a bundled preset) with individual fields overridable by flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import TrainConfig, bundled_config_names, bundled_config_path, load_config
from .errors import SeclError
from .graphs import load_graph, read_label_file, write_matrix_binary
from .losses import ABLATIONS
from .metrics import evaluate
from .training import (
    ablate,
    load_dataset,
    run_experiment,
    sweep,
    time_report,
    train,
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True,
                   help="config file path or bundled preset name "
                        f"({', '.join(bundled_config_names())})")
    p.add_argument("--data-root", default=".",
                   help="directory relative dataset paths resolve against")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--ablation", choices=ABLATIONS, default=None)
    p.add_argument("--deterministic", action="store_true", default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lambda1", type=float, default=None)
    p.add_argument("--lambda2", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None, dest="learning_rate")
    p.add_argument("--out", default=None, help="output directory")


def _resolve_config(args) -> TrainConfig:
    name_or_path = args.config
    path = Path(name_or_path)
    if not path.exists() and not name_or_path.endswith(".cfg"):
        path = bundled_config_path(name_or_path)
    overrides = {
        key: getattr(args, key)
        for key in ("seed", "runs", "ablation", "deterministic", "epochs",
                    "lambda1", "lambda2", "tau", "r", "learning_rate")
        if getattr(args, key, None) is not None
    }
    return load_config(path, overrides=overrides, data_root=args.data_root)


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    g = load_dataset(cfg)
    _, record = train(cfg, g)
    print(json.dumps({"metrics": record.metrics,
                      "final_loss": record.loss_log[-1].total,
                      "wall_time_s": record.wall_time_s}, indent=2))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_matrix_binary(out / "embeddings_run0.bin", record.embeddings)
        with open(out / "labels_run0.txt", "w") as fh:
            fh.writelines(f"{lab}\n" for lab in record.cluster_labels)
    return 0


def cmd_experiment(args) -> int:
    cfg = _resolve_config(args)
    report, outdir = run_experiment(cfg, outdir=args.out)
    print(f"wrote {outdir}")
    print(json.dumps({"mean": report.mean, "std": report.std}, indent=2))
    return 0


def cmd_sweep(args) -> int:
    cfg = _resolve_config(args)
    grid = {}
    for spec in args.param:
        name, _, values = spec.partition("=")
        if not values:
            raise SystemExit(f"bad --param {spec!r}; expected name=v1,v2,...")
        grid[name] = [float(v) for v in values.split(",")]
    rows = sweep(cfg, grid, outdir=args.out or "sweep")
    print(f"{len(rows)} grid cells written")
    return 0


def cmd_ablate(args) -> int:
    cfg = _resolve_config(args)
    reports = ablate(cfg, outdir=args.out or "ablation")
    for mode, rep in reports.items():
        print(mode, json.dumps(rep.mean))
    return 0


def cmd_time(args) -> int:
    cfg = _resolve_config(args)
    seconds = time_report(cfg)
    print(f"{seconds:.3f} s for {cfg.epochs} epochs on {cfg.dataset}")
    return 0


def cmd_eval_labels(args) -> int:
    g = load_graph(args.edges, args.attributes, args.truth)
    pred = read_label_file(args.pred)
    print(json.dumps(evaluate(pred, g), indent=2))
    return 0


def cmd_dump_embeddings(args) -> int:
    cfg = _resolve_config(args)
    g = load_dataset(cfg)
    _, record = train(cfg, g, evaluate_after=False)
    out = Path(args.out or f"{cfg.dataset}_embeddings.bin")
    write_matrix_binary(out, record.embeddings)
    print(f"wrote {out} ({record.embeddings.shape[0]}x{record.embeddings.shape[1]})")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="secl",
                                     description="structure-enhanced contrastive graph clustering")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, helptext in (
        ("train", cmd_train, "one training run"),
        ("experiment", cmd_experiment, "multi-seed experiment with aggregation"),
        ("sweep", cmd_sweep, "hyperparameter grid sweep"),
        ("ablate", cmd_ablate, "run all ablation variants"),
        ("time", cmd_time, "wall-clock timing of one training"),
        ("dump-embeddings", cmd_dump_embeddings, "train once and dump embeddings"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        if name == "sweep":
            p.add_argument("--param", action="append", required=True,
                           help="name=v1,v2,... (repeatable for a grid)")
        p.set_defaults(fn=fn)

    p = sub.add_parser("eval-labels", help="metrics for precomputed cluster labels")
    p.add_argument("--edges", required=True)
    p.add_argument("--attributes", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--pred", required=True)
    p.set_defaults(fn=cmd_eval_labels)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SeclError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
