"""Release acceptance suite: one test per criterion, at the stated tolerances.

Criteria 5-7 exercise published benchmark datasets (cora, bat, citeseer).
Those files are not redistributable with this package; the tests run the
full check whenever the files are placed under data/<name>/ and skip with
an explicit reason otherwise.
"""

import itertools
import time
from pathlib import Path

import numpy as np
import pytest

from secl.config import TrainConfig, bundled_config_names, bundled_config_path, load_config
from secl.encoders import init_params, smooth_attributes
from secl.graphs import Graph, build_operators, load_graph
from secl.losses import modularity_loss
from secl.metrics import accuracy, ari, f1_score, modularity_score, nmi
from secl.optim import finite_difference_grad
from secl.synthetic import random_graph
from secl.tape import Tape
from secl.training import ablate, run_experiment, train

from helpers import (
    build_loss,
    loss_of_flat,
    pair_counting_modularity,
    relative_gradient_error,
    tape_gradients,
)

REPO_ROOT = Path(__file__).resolve().parents[1]
DATA_ROOT = REPO_ROOT  # bundled configs use paths like data/<name>/edges.txt


def _dataset_available(name: str) -> bool:
    cfg = load_config(bundled_config_path(name), data_root=DATA_ROOT)
    return Path(cfg.edges).exists() and Path(cfg.attributes).exists()


def _load_benchmark(name: str, **overrides) -> tuple[TrainConfig, Graph]:
    cfg = load_config(bundled_config_path(name), overrides, data_root=DATA_ROOT)
    g = load_graph(cfg.edges, cfg.attributes, cfg.labels)
    return cfg, g


def _random_graph_no_isolates(n: int, d: int, edge_prob: float, seed: int) -> Graph:
    """Random graph where every node has degree >= 1. An isolated node's
    zero adjacency row gives an exactly-zero embedding row, where the
    epsilon-guarded L2 normalization is too sharply curved for a finite
    difference with h=1e-5 to probe meaningfully."""
    g = random_graph(n, d, edge_prob=edge_prob, seed=seed)
    deg = np.zeros(n, dtype=int)
    for i, j in g.edges:
        deg[i] += 1
        deg[j] += 1
    extra = [(i, (i + 1) % n) for i in range(n) if deg[i] == 0]
    if extra:
        edges = np.vstack([g.edges, np.array(extra)])
        g = Graph(n=n, edges=edges, attributes=g.attributes, labels=g.labels)
    return g


def test_criterion_1_gradient_oracle_suite():
    """Tape gradients of every loss match central finite differences
    (h=1e-5, relative error <= 1e-4 where |analytic| > 1e-6) on 20 random
    models; the whole suite finishes in under a minute."""
    started = time.perf_counter()
    for seed in range(20):
        n = (8, 12, 16)[seed % 3]
        g = _random_graph_no_isolates(n, d=5, edge_prob=0.4, seed=seed)
        ops = build_operators(g)
        x_hat = smooth_attributes(g, r=2)
        params = init_params(g.n, g.d, [4], [4], 3, seed=seed + 100)
        for which in ("cl", "sl", "m", "total"):
            forward = build_loss(which, ops, x_hat, tau=0.5, lam1=0.1, lam2=1.0)
            analytic, _ = tape_gradients(forward, params)
            numeric = finite_difference_grad(
                loss_of_flat(forward, params), params.flatten(), h=1e-5
            )
            err = relative_gradient_error(analytic, numeric, floor=1e-6)
            assert err <= 1e-4, f"seed={seed} loss={which}: rel err {err:.3e}"
    assert time.perf_counter() - started < 60.0


def test_criterion_2_modularity_oracle():
    """modularity_score matches an independent pair-counting Q within 1e-10
    on 100 random small graphs; modularity_loss at one-hot logits matches it
    within 1e-6; the two-disjoint-triangles partition scores exactly 0.5."""
    rng = np.random.default_rng(0)
    checked = 0
    while checked < 100:
        n = int(rng.integers(2, 9))
        g = random_graph(n, d=2, edge_prob=0.5, seed=int(rng.integers(1 << 30)))
        if g.m == 0:
            continue
        labels = rng.integers(0, 3, size=n)
        q = modularity_score(labels, g)
        assert abs(q - pair_counting_modularity(labels, g)) <= 1e-10

        ops = build_operators(g)
        one_hot_logits = np.zeros((n, 3))
        one_hot_logits[np.arange(n), labels] = 1e4
        tape = Tape()
        node = modularity_loss(tape, tape.constant(one_hot_logits), ops.modularity)
        assert abs(float(node.value[0, 0]) - q) <= 1e-6
        checked += 1

    two_triangles = Graph(
        n=6,
        edges=np.array([(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]),
        attributes=np.zeros((6, 1)),
    )
    assert modularity_score([0, 0, 0, 1, 1, 1], two_triangles) == 0.5


def _brute_force_accuracy(pred, truth):
    """Max matched fraction over every injective cluster->class mapping."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    pred_ids = sorted(set(pred.tolist()))
    class_ids = sorted(set(truth.tolist()))
    # pad with unusable dummy targets so every cluster gets some image
    candidates = class_ids + [-(k + 1) for k in range(len(pred_ids))]
    best = 0
    for perm in itertools.permutations(candidates, len(pred_ids)):
        mapping = dict(zip(pred_ids, perm))
        best = max(best, sum(mapping[p] == t for p, t in zip(pred, truth)))
    return best / len(truth)


def test_criterion_3_metric_oracles():
    """Hungarian-matched accuracy equals factorial brute force on 200 random
    label pairs (up to 6 clusters); NMI/ARI/F1 reproduce hand-worked cases."""
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = int(rng.integers(2, 30))
        c = int(rng.integers(1, 7))
        truth = rng.integers(0, c, size=n)
        pred = rng.integers(0, c, size=n)
        assert accuracy(pred, truth) == pytest.approx(
            _brute_force_accuracy(pred, truth), abs=1e-12
        )

    # hand-derived cases
    assert accuracy([0, 0, 1, 1], [0, 1, 0, 1]) == 0.5
    assert nmi([0, 1, 2, 3], [0, 0, 1, 1]) == pytest.approx(
        np.log(2) / np.sqrt(np.log(4) * np.log(2)), abs=1e-12
    )
    assert nmi([0, 0, 0, 0], [0, 0, 1, 1]) == 0.0
    assert ari([0, 1, 0, 1], [0, 0, 1, 1]) == pytest.approx(-0.5, abs=1e-12)
    # mapped prediction [0,0,1,0] against truth [0,0,1,1]:
    # class 0 F1 = 4/5, class 1 F1 = 2/3, macro = 11/15
    assert f1_score([0, 0, 1, 0], [0, 0, 1, 1]) == pytest.approx(11 / 15, abs=1e-12)


def test_criterion_4_operator_equivalence():
    """Sparse smoothing, blockwise structural loss, and matrix-free
    modularity all match dense oracles within 1e-9 on graphs up to N=200."""
    for seed, n in enumerate((50, 120, 200)):
        g = random_graph(n, d=8, edge_prob=0.05, seed=seed)
        ops = build_operators(g)

        # smoothing vs dense matrix power
        a_hat = ops.a_hat.toarray()
        dense_smoothed = np.linalg.matrix_power(a_hat, 3) @ g.attributes
        assert np.abs(smooth_attributes(g, 3) - dense_smoothed).max() <= 1e-9

        params = init_params(g.n, g.d, [6], [6], 3, seed=seed)
        x_hat = smooth_attributes(g, 2)

        # blockwise structural loss vs the dense N x N path
        for which in ("sl",):
            blockwise = build_loss(which, ops, x_hat, dense_cap=1)
            dense = build_loss(which, ops, x_hat, dense_cap=10**9)
            g_blk, v_blk = tape_gradients(blockwise, params)
            g_dns, v_dns = tape_gradients(dense, params)
            assert abs(v_blk - v_dns) <= 1e-9
            for a, b in zip(g_blk, g_dns):
                assert np.abs(a - b).max() <= 1e-9

        # matrix-free modularity vs the dense trace
        labels = np.random.default_rng(seed).integers(0, 3, size=n)
        u = np.zeros((n, 3))
        u[np.arange(n), labels] = 1.0
        b = ops.modularity.dense()
        dense_q = np.trace(u.T @ b @ u) / (2.0 * g.m)
        assert abs(modularity_score(labels, g) - dense_q) <= 1e-9


@pytest.mark.skipif(
    not _dataset_available("cora"),
    reason="cora dataset files are not present under data/cora/ "
    "(not redistributable; place edges.txt/attrs.txt/labels.txt there to run)",
)
def test_criterion_5_cora_reproduction(tmp_path):
    """Bundled cora preset, 10 runs: mean ACC within 3 points of 74.79 and
    mean NMI within 3 points of 56.88; fallback gate ACC >= 70."""
    cfg, g = _load_benchmark("cora")
    started = time.perf_counter()
    report, _ = run_experiment(cfg, g=g, outdir=tmp_path / "cora")
    elapsed = time.perf_counter() - started
    acc = 100.0 * report.mean["acc"]
    nmi_val = 100.0 * report.mean["nmi"]
    in_band = abs(acc - 74.79) <= 3.0 and abs(nmi_val - 56.88) <= 3.0
    assert in_band or acc >= 70.0, f"acc={acc:.2f} nmi={nmi_val:.2f}"
    assert elapsed <= 600.0, f"10-run budget exceeded: {elapsed:.0f}s"


@pytest.mark.skipif(
    not _dataset_available("bat"),
    reason="bat dataset files are not present under data/bat/ "
    "(not redistributable; place edges.txt/attrs.txt/labels.txt there to run)",
)
def test_criterion_6_bat_reproduction(tmp_path):
    """Bundled bat preset, 10 runs: mean ACC within 4 points of 78.40,
    under a minute."""
    cfg, g = _load_benchmark("bat")
    started = time.perf_counter()
    report, _ = run_experiment(cfg, g=g, outdir=tmp_path / "bat")
    elapsed = time.perf_counter() - started
    acc = 100.0 * report.mean["acc"]
    assert abs(acc - 78.40) <= 4.0, f"acc={acc:.2f}"
    assert elapsed <= 60.0, f"10-run budget exceeded: {elapsed:.0f}s"


@pytest.mark.skipif(
    not _dataset_available("citeseer"),
    reason="citeseer dataset files are not present under data/citeseer/ "
    "(not redistributable; place edges.txt/attrs.txt/labels.txt there to run)",
)
def test_criterion_7_citeseer_ablation_ordering(tmp_path):
    """Full model mean ACC >= each single-loss ablation over 10 runs
    (ties allowed within half a point)."""
    cfg, _ = _load_benchmark("citeseer")
    reports = ablate(cfg, tmp_path / "citeseer-ablation")
    full_acc = 100.0 * reports["full"].mean["acc"]
    for mode in ("no-M", "no-CL", "no-SL"):
        mode_acc = 100.0 * reports[mode].mean["acc"]
        assert full_acc >= mode_acc - 0.5, f"{mode}: {mode_acc:.2f} > {full_acc:.2f}"


def test_criterion_8_determinism(tmp_path):
    """Two deterministic invocations with identical config and seeds produce
    byte-identical metrics.csv and embedding dumps."""
    cfg = load_config(
        bundled_config_path("synthetic"),
        {"epochs": 20, "runs": 3, "deterministic": True},
        data_root=DATA_ROOT,
    )
    run_experiment(cfg, outdir=tmp_path / "a")
    run_experiment(cfg, outdir=tmp_path / "b")
    names = ["metrics.csv"] + [f"embeddings_run{k}.bin" for k in range(cfg.runs)]
    for name in names:
        first = (tmp_path / "a" / name).read_bytes()
        second = (tmp_path / "b" / name).read_bytes()
        assert first == second, f"{name} differs between invocations"


def test_criterion_9_training_progress_on_bundled_configs():
    """On every bundled config whose dataset files are present, the final
    total loss beats the first epoch's and every logged value is finite."""
    ran = 0
    for name in bundled_config_names():
        if not _dataset_available(name):
            continue
        cfg, g = _load_benchmark(name)
        _, record = train(cfg, g, evaluate_after=False)
        totals = [b.total for b in record.loss_log]
        assert len(totals) == cfg.epochs
        for b in record.loss_log:
            assert all(
                np.isfinite(v) for v in (b.l_cl, b.l_sl, b.l_m, b.total)
            ), f"{name}: non-finite loss logged"
        assert totals[-1] < totals[0], f"{name}: no training progress"
        ran += 1
    assert ran >= 1, "no bundled dataset available to exercise"
