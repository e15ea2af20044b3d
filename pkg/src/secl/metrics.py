"""Clustering evaluation: Hungarian-matched accuracy, NMI, ARI, F1, and
modularity Q, plus the mean/std aggregation used for multi-seed reporting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DegenerateGraphError, ShapeError
from .graphs import Graph, degree_vector


def _check_pair(pred, truth):
    pred = np.asarray(pred, dtype=np.int64).reshape(-1)
    truth = np.asarray(truth, dtype=np.int64).reshape(-1)
    if pred.shape != truth.shape:
        raise ShapeError(
            f"label vectors differ in length: {pred.shape[0]} vs {truth.shape[0]}"
        )
    return pred, truth


def contingency(pred: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Counts[t, p] = |{i : truth_i = t, pred_i = p}|."""
    nt = int(truth.max()) + 1 if truth.size else 0
    np_ = int(pred.max()) + 1 if pred.size else 0
    table = np.zeros((nt, np_), dtype=np.int64)
    np.add.at(table, (truth, pred), 1)
    return table


def _mapping_f1(table: np.ndarray, assign: np.ndarray) -> float:
    """Macro F1 of a class->cluster assignment over the contingency table;
    assign[t] = cluster index matched to class t, or -1."""
    row = table.sum(axis=1)
    col = table.sum(axis=0)
    f1s = []
    for t in range(table.shape[0]):
        p = assign[t]
        tp = table[t, p] if p >= 0 else 0
        denom = row[t] + (col[p] if p >= 0 else 0)
        f1s.append(2.0 * tp / denom if denom > 0 else 0.0)
    return float(np.mean(f1s))


_EXACT_ASSIGNMENT_LIMIT = 8  # k! enumeration is cheap up to here


def hungarian_mapping(pred: np.ndarray, truth: np.ndarray) -> dict[int, int]:
    """Optimal cluster-id -> class-id assignment maximizing matched count.

    For small contingency tables, accuracy ties are broken by macro F1 so
    the mapping (and every metric built on it) is invariant under relabeling
    of the cluster ids. Cluster ids left without a class map to -1.
    """
    table = contingency(pred, truth)
    nt, np_ = table.shape
    k = max(nt, np_)
    padded = np.zeros((k, k), dtype=np.int64)
    padded[:nt, :np_] = table
    if k <= _EXACT_ASSIGNMENT_LIMIT:
        from itertools import permutations

        best = None
        for perm in permutations(range(k)):
            assign = np.array([perm[t] if perm[t] < np_ else -1 for t in range(nt)])
            count = sum(int(table[t, p]) for t, p in enumerate(assign) if p >= 0)
            key = (count, _mapping_f1(table, assign))
            if best is None or key > best[0]:
                best = (key, assign)
        assign = best[1]
        rows = np.arange(nt)
        cols = assign
    else:
        rows, cols = linear_sum_assignment(-padded)
    mapping = {}
    for t, p in zip(rows, cols):
        if 0 <= p < np_:
            mapping[int(p)] = int(t) if t < nt else -1
    # clusters the assignment skipped still need a (non-matching) target
    for p in range(np_):
        mapping.setdefault(p, -1)
    return mapping


def accuracy(pred, truth) -> float:
    """Fraction matched under the best cluster-to-class assignment."""
    pred, truth = _check_pair(pred, truth)
    mapping = hungarian_mapping(pred, truth)
    mapped = np.array([mapping[int(p)] for p in pred])
    return float((mapped == truth).mean())


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(pred, truth, average: str = "geometric") -> float:
    """I(pred; truth) normalized by the (geometric, by default) mean entropy."""
    pred, truth = _check_pair(pred, truth)
    table = contingency(pred, truth).astype(np.float64)
    n = table.sum()
    ht = _entropy(table.sum(axis=1))
    hp = _entropy(table.sum(axis=0))
    if ht == 0.0 and hp == 0.0:
        return 1.0  # both constant: identical degenerate partitions
    if ht == 0.0 or hp == 0.0:
        return 0.0
    pij = table / n
    outer = np.outer(table.sum(axis=1) / n, table.sum(axis=0) / n)
    mask = pij > 0
    mi = float((pij[mask] * np.log(pij[mask] / outer[mask])).sum())
    if average == "geometric":
        denom = np.sqrt(ht * hp)
    elif average == "arithmetic":
        denom = 0.5 * (ht + hp)
    else:
        raise ValueError(f"unknown NMI average {average!r}")
    return float(mi / denom)


def ari(pred, truth) -> float:
    """Adjusted Rand Index via pair counting on the contingency table."""
    pred, truth = _check_pair(pred, truth)
    table = contingency(pred, truth).astype(np.float64)
    n = table.sum()

    def comb2(x):
        return x * (x - 1.0) / 2.0

    sum_ij = comb2(table).sum()
    sum_t = comb2(table.sum(axis=1)).sum()
    sum_p = comb2(table.sum(axis=0)).sum()
    total = comb2(n)
    expected = sum_t * sum_p / total if total > 0 else 0.0
    max_index = 0.5 * (sum_t + sum_p)
    if max_index == expected:
        return 1.0  # degenerate: both partitions trivial and identical
    return float((sum_ij - expected) / (max_index - expected))


def f1_score(pred, truth, average: str = "macro") -> float:
    """Per-class F1 after remapping clusters by the same Hungarian assignment
    used for accuracy; averaged macro (unweighted) or weighted by class size."""
    pred, truth = _check_pair(pred, truth)
    mapping = hungarian_mapping(pred, truth)
    mapped = np.array([mapping[int(p)] for p in pred])
    classes = np.unique(truth)
    f1s, weights = [], []
    for cls in classes:
        tp = float(((mapped == cls) & (truth == cls)).sum())
        fp = float(((mapped == cls) & (truth != cls)).sum())
        fn = float(((mapped != cls) & (truth == cls)).sum())
        denom = 2.0 * tp + fp + fn
        f1s.append(2.0 * tp / denom if denom > 0 else 0.0)
        weights.append(float((truth == cls).sum()))
    f1s = np.asarray(f1s)
    if average == "macro":
        return float(f1s.mean())
    if average == "weighted":
        w = np.asarray(weights)
        return float((f1s * w).sum() / w.sum())
    raise ValueError(f"unknown F1 average {average!r}")


def modularity_score(labels, g: Graph) -> float:
    """Newman modularity Q of a hard partition: (1/2m) Tr(U^T B U)."""
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if labels.shape[0] != g.n:
        raise ShapeError(f"label vector length {labels.shape[0]} vs n={g.n}")
    if g.m == 0:
        raise DegenerateGraphError("modularity is undefined for an edgeless graph")
    m = float(g.m)
    same = labels[g.edges[:, 0]] == labels[g.edges[:, 1]]
    intra = float(same.sum())  # undirected edges inside communities
    deg = degree_vector(g)
    deg_c = np.zeros(int(labels.max()) + 1)
    np.add.at(deg_c, labels, deg)
    return float(intra / m - ((deg_c / (2.0 * m)) ** 2).sum())


@dataclass
class MetricsReport:
    """Per-run metric values and their mean/std aggregates."""

    per_run: list[dict[str, float]] = field(default_factory=list)
    mean: dict[str, float] = field(default_factory=dict)
    std: dict[str, float] = field(default_factory=dict)

    def add_run(self, values: dict[str, float]) -> None:
        self.per_run.append(dict(values))

    def aggregate(self) -> None:
        keys = sorted({k for run in self.per_run for k in run})
        self.mean = {}
        self.std = {}
        for k in keys:
            vals = np.asarray([run[k] for run in self.per_run if k in run])
            self.mean[k] = float(vals.mean())
            self.std[k] = float(vals.std())  # population std; 0 for a single run

    def as_dict(self) -> dict:
        return {"per_run": self.per_run, "mean": self.mean, "std": self.std}


def evaluate(pred, g: Graph) -> dict[str, float]:
    """All metrics for one predicted labeling; truth-based ones only when
    ground-truth labels exist."""
    out = {}
    if g.labels is not None:
        out["acc"] = accuracy(pred, g.labels)
        out["nmi"] = nmi(pred, g.labels)
        out["ari"] = ari(pred, g.labels)
        out["f1"] = f1_score(pred, g.labels, average="macro")
        out["f1_weighted"] = f1_score(pred, g.labels, average="weighted")
    if g.m >= 1:
        out["modularity_q"] = modularity_score(pred, g)
    return out
