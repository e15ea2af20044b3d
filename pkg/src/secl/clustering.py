"""K-means with k-means++ seeding, Lloyd iterations, and restarts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError


@dataclass
class ClusterResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    iterations_run: int
    inertia_history: list[float] = field(default_factory=list)


def _plusplus_init(x: np.ndarray, c: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((c, x.shape[1]))
    idx = int(rng.integers(n))
    centroids[0] = x[idx]
    d2 = ((x - centroids[0]) ** 2).sum(axis=1)
    for k in range(1, c):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids[k] = x[idx]
        d2 = np.minimum(d2, ((x - centroids[k]) ** 2).sum(axis=1))
    return centroids


def _lloyd(x, centroids, max_iter):
    n, c = x.shape[0], centroids.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        # squared distances via the expansion; argmin is exact enough in f64
        d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        inertia = float(d2[np.arange(n), new_labels].sum())
        history.append(inertia)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for k in range(c):
            mask = labels == k
            if mask.any():
                centroids[k] = x[mask].mean(axis=0)
            else:
                # re-seed an empty cluster at the point farthest from its centroid
                far = int(d2[np.arange(n), labels].argmax())
                centroids[k] = x[far]
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    inertia = float(d2[np.arange(n), labels].sum())
    return labels, centroids, inertia, it, history


def kmeans(
    h: np.ndarray,
    c: int,
    seed: int = 0,
    restarts: int = 10,
    max_iter: int = 300,
) -> ClusterResult:
    """Best-inertia result over `restarts` independent k-means++ runs."""
    x = np.asarray(h, dtype=np.float64)
    if x.ndim != 2:
        raise ConfigError(f"kmeans expects a 2-D matrix, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise NumericError("kmeans: non-finite input")
    if c < 1 or c > x.shape[0]:
        raise ConfigError(f"cluster count {c} out of range [1, {x.shape[0]}]")
    master = np.random.default_rng(seed)
    restart_seeds = master.integers(0, 2**63 - 1, size=max(restarts, 1))
    best = None
    for rs in restart_seeds:
        rng = np.random.default_rng(int(rs))
        centroids = _plusplus_init(x, c, rng)
        labels, centroids, inertia, its, history = _lloyd(x, centroids, max_iter)
        if best is None or inertia < best.inertia:
            best = ClusterResult(labels, centroids, inertia, its, history)
    return best
