"""Deterministic synthetic benchmark graphs (stochastic block model plus
cluster-separated Gaussian attributes). Used for the bundled `synthetic`
config and for randomized test instances."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .graphs import Graph, save_graph


def make_sbm_graph(
    nodes_per_cluster: int = 30,
    clusters: int = 3,
    d: int = 16,
    p_in: float = 0.2,
    p_out: float = 0.02,
    attr_scale: float = 1.0,
    noise: float = 0.6,
    seed: int = 0,
) -> Graph:
    """Planted-partition graph whose attributes carry the same clusters."""
    rng = np.random.default_rng(seed)
    n = nodes_per_cluster * clusters
    labels = np.repeat(np.arange(clusters), nodes_per_cluster)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            p = p_in if labels[i] == labels[j] else p_out
            if rng.random() < p:
                edges.append((i, j))
    if not edges:  # keep the graph non-degenerate for modularity
        edges.append((0, 1))
    centers = rng.normal(scale=attr_scale, size=(clusters, d))
    attrs = centers[labels] + rng.normal(scale=noise, size=(n, d))
    return Graph(
        n=n,
        edges=np.asarray(edges, dtype=np.int64),
        attributes=attrs,
        labels=labels,
    )


def random_graph(n: int, d: int, edge_prob: float = 0.3, seed: int = 0,
                 with_labels: bool = False, num_classes: int = 3) -> Graph:
    """Erdos-Renyi graph with random attributes; at least one edge."""
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, k=1)
    mask = rng.random(iu[0].shape[0]) < edge_prob
    edges = np.stack([iu[0][mask], iu[1][mask]], axis=1)
    if edges.shape[0] == 0:
        edges = np.array([[0, 1]], dtype=np.int64)
    attrs = rng.normal(size=(n, d))
    labels = rng.integers(0, num_classes, size=n) if with_labels else None
    return Graph(n=n, edges=edges, attributes=attrs, labels=labels)


def write_synthetic_dataset(root, seed: int = 7) -> Path:
    """Write the bundled synthetic dataset files under root/synthetic/."""
    out = Path(root) / "synthetic"
    out.mkdir(parents=True, exist_ok=True)
    g = make_sbm_graph(seed=seed)
    save_graph(g, out / "edges.txt", out / "attrs.txt", out / "labels.txt")
    return out
