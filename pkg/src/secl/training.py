"""The training loop and experiment orchestration.

One epoch = one full-batch Adam step: build a fresh tape, run both encoders,
compute the active losses, backprop, update every parameter (assignment head
included). After the last epoch the attribute embeddings go through K-means
and the four clustering metrics plus modularity Q are reported.
"""

from __future__ import annotations

import csv
import itertools
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._version import __version__
from .clustering import kmeans
from .config import TrainConfig
from .encoders import (
    EncoderParams,
    assignment_logits,
    encode,
    init_params,
    smooth_attributes,
    tape_params,
)
from .errors import NumericError, ConfigError
from .graphs import Graph, build_operators, load_graph, write_matrix_binary
from .losses import (
    LossBreakdown,
    cross_view_contrastive_loss,
    modularity_loss,
    structural_contrastive_loss,
    total_loss,
)
from .metrics import MetricsReport, evaluate
from .optim import AdamState, adam_step
from .tape import Tape

ABLATION_METHOD_NAMES = {
    "full": "SECL",
    "no-M": "SECL-M",
    "no-CL": "SECL-CL",
    "no-SL": "SECL-SL",
}


@dataclass
class RunRecord:
    config: dict
    loss_log: list[LossBreakdown] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    wall_time_s: float = 0.0
    version: str = __version__
    embeddings: np.ndarray | None = None
    cluster_labels: np.ndarray | None = None


def load_dataset(cfg: TrainConfig) -> Graph:
    if not cfg.edges or not cfg.attributes:
        raise ConfigError("config lacks dataset edge/attribute paths")
    return load_graph(cfg.edges, cfg.attributes, cfg.labels)


def _forward(cfg: TrainConfig, params: EncoderParams, ops, x_hat):
    """One taped forward pass; returns tape, leaves, loss node, breakdown, h2."""
    tape = Tape()
    leaves, struct, attr, head = tape_params(tape, params)
    emb = encode(tape, struct, attr, ops.a, x_hat, activation=cfg.activation)
    l_cl = cross_view_contrastive_loss(tape, emb.h1, emb.h2, cfg.tau)
    l_sl = structural_contrastive_loss(
        tape, emb.h1, emb.h2, ops.a_tilde, dense_cap=cfg.dense_cap
    )
    logits = assignment_logits(tape, emb.h2, head)
    l_m = modularity_loss(tape, logits, ops.modularity)
    total, breakdown = total_loss(
        tape, l_cl, l_sl, l_m, cfg.lambda1, cfg.lambda2, cfg.ablation
    )
    return tape, leaves, total, breakdown, emb.h2


def train(cfg: TrainConfig, g: Graph, seed: int | None = None, evaluate_after=True):
    """Run the full training loop; returns (EncoderParams, RunRecord)."""
    cfg.validate()
    seed = cfg.seed if seed is None else seed
    started = time.perf_counter()
    ops = build_operators(g, dense_cap=max(cfg.dense_cap, g.n))
    x_hat = smooth_attributes(g, cfg.r)
    params = init_params(
        g.n,
        g.d,
        cfg.structure_widths,
        cfg.attribute_widths,
        cfg.clusters,
        seed=seed,
    )
    state = AdamState(learning_rate=cfg.learning_rate)
    record = RunRecord(config=cfg.snapshot())
    record.config["seed"] = seed
    last_finite = None
    h2_value = None
    for epoch in range(1, cfg.epochs + 1):
        tape, leaves, total, breakdown, h2 = _forward(cfg, params, ops, x_hat)
        if not np.isfinite(breakdown.total):
            raise NumericError(
                f"non-finite loss at epoch {epoch}; last finite: {last_finite}"
            )
        last_finite = breakdown
        record.loss_log.append(breakdown)
        grads_by_idx = tape.backward(total)
        grads = [grads_by_idx[leaf.idx] for leaf in leaves]
        flat = adam_step(params.flatten(), grads, state)
        params = EncoderParams.unflatten(flat, params)
        h2_value = h2.value
    record.embeddings = h2_value
    if evaluate_after:
        result = kmeans(
            h2_value,
            cfg.clusters,
            seed=seed * 9973 + 7,
            restarts=cfg.kmeans_restarts,
            max_iter=cfg.kmeans_max_iter,
        )
        record.cluster_labels = result.labels
        record.metrics = evaluate(result.labels, g)
    record.wall_time_s = time.perf_counter() - started
    return params, record


def _write_loss_log(path: Path, records: list[RunRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "epoch", "l_cl", "l_sl", "l_m", "total"])
        for k, rec in enumerate(records):
            for epoch, b in enumerate(rec.loss_log, start=1):
                writer.writerow(
                    [k, epoch]
                    + [format(v, ".17g") for v in (b.l_cl, b.l_sl, b.l_m, b.total)]
                )


def _write_metrics(outdir: Path, cfg: TrainConfig, records, report) -> None:
    method = ABLATION_METHOD_NAMES[cfg.ablation]
    with open(outdir / "metrics.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["dataset", "method", "seed", "acc", "nmi", "ari", "f1", "q", "wall_time_s"]
        )
        for k, rec in enumerate(records):
            met = rec.metrics
            wall = 0.0 if cfg.deterministic else rec.wall_time_s
            writer.writerow(
                [
                    cfg.dataset,
                    method,
                    cfg.seed + k,
                    *(
                        format(met.get(key, float("nan")), ".17g")
                        for key in ("acc", "nmi", "ari", "f1", "modularity_q")
                    ),
                    format(wall, ".6f"),
                ]
            )
    payload = {
        "dataset": cfg.dataset,
        "method": method,
        "config": cfg.snapshot(),
        "f1_average_headline": "macro",
        "report": report.as_dict(),
        "version": __version__,
    }
    with open(outdir / "metrics.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_experiment(cfg: TrainConfig, g: Graph | None = None, outdir=None):
    """Train over `runs` consecutive seeds, aggregate mean/std, persist
    metrics, loss logs, embedding dumps, and predicted labels."""
    cfg.validate()
    if g is None:
        g = load_dataset(cfg)
    if outdir is None:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        outdir = Path(f"{cfg.dataset}-{cfg.digest()}-{stamp}")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    report = MetricsReport()
    records = []
    failure = None
    try:
        for k in range(cfg.runs):
            _, rec = train(cfg, g, seed=cfg.seed + k)
            records.append(rec)
            report.add_run(rec.metrics)
            write_matrix_binary(outdir / f"embeddings_run{k}.bin", rec.embeddings)
            with open(outdir / f"labels_run{k}.txt", "w") as fh:
                for lab in rec.cluster_labels:
                    fh.write(f"{lab}\n")
    except NumericError as exc:
        failure = exc
    report.aggregate()
    _write_loss_log(outdir / "loss_log.csv", records)
    _write_metrics(outdir, cfg, records, report)
    if failure is not None:
        raise NumericError(
            f"experiment failed after {len(records)} completed runs "
            f"(partial results in {outdir}): {failure}"
        )
    return report, outdir


_SWEEPABLE = {"lambda1", "lambda2", "r", "tau", "learning_rate", "epochs"}


def sweep(cfg: TrainConfig, grid: dict[str, list], outdir) -> list[dict]:
    """Cartesian grid of run_experiment calls; returns (and writes) a
    long-format table with one row per grid cell."""
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ConfigError("empty sweep grid")
    unknown = set(grid) - _SWEEPABLE
    if unknown:
        raise ConfigError(f"cannot sweep over {sorted(unknown)}")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    g = load_dataset(cfg)
    names = sorted(grid)
    rows = []
    for combo in itertools.product(*(grid[n] for n in names)):
        sub = TrainConfig(**cfg.snapshot())
        for name, value in zip(names, combo):
            setattr(sub, name, type(getattr(sub, name))(value))
        cell = "_".join(f"{n}-{v}" for n, v in zip(names, combo))
        report, _ = run_experiment(sub, g=g, outdir=outdir / cell)
        row = {n: v for n, v in zip(names, combo)}
        for key, val in report.mean.items():
            row[f"{key}_mean"] = val
            row[f"{key}_std"] = report.std[key]
        rows.append(row)
    if rows:
        keys = list(rows[0])
        with open(outdir / "sweep.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=keys)
            writer.writeheader()
            writer.writerows(rows)
    return rows


def ablate(cfg: TrainConfig, outdir) -> dict[str, MetricsReport]:
    """run_experiment once per ablation mode; writes a comparison CSV."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    g = load_dataset(cfg)
    out = {}
    for mode in ABLATION_METHOD_NAMES:
        sub = TrainConfig(**cfg.snapshot())
        sub.ablation = mode
        report, _ = run_experiment(sub, g=g, outdir=outdir / ABLATION_METHOD_NAMES[mode])
        out[mode] = report
    with open(outdir / "ablation.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        keys = sorted({k for rep in out.values() for k in rep.mean})
        writer.writerow(["method"] + [f"{k}_mean" for k in keys] + [f"{k}_std" for k in keys])
        for mode, rep in out.items():
            writer.writerow(
                [ABLATION_METHOD_NAMES[mode]]
                + [rep.mean.get(k, "") for k in keys]
                + [rep.std.get(k, "") for k in keys]
            )
    return out


def time_report(cfg: TrainConfig, g: Graph | None = None) -> float:
    """Wall-clock seconds for one training run, metrics off."""
    if g is None:
        g = load_dataset(cfg)
    start = time.perf_counter()
    train(cfg, g, seed=cfg.seed, evaluate_after=False)
    return time.perf_counter() - start
