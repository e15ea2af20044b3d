"""Graph loading and the graph-derived operators used throughout training.

A graph is an undirected, unweighted edge list plus a dense attribute matrix
and optional ground-truth labels. Adjacency-like matrices are kept sparse
(CSR); the modularity matrix B = A - k k^T / 2m is materialized densely only
below a configurable node-count cap and otherwise applied matrix-free from
its (A, k, m) factored form.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import (
    DegenerateGraphError,
    IndexErrorSecl,
    NumericError,
    ParseError,
    ShapeError,
)

DENSE_B_CAP = 10_000


@dataclass(frozen=True)
class Graph:
    """Undirected attributed graph.

    edges holds each undirected pair once as (i, j) with i < j, row-sorted;
    attributes is N x d float64; labels, when present, are class ids in [0, C).
    """

    n: int
    edges: np.ndarray
    attributes: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= self.n):
            raise IndexErrorSecl(
                f"edge endpoint out of range [0, {self.n}): "
                f"min={edges.min() if edges.size else None}, max={edges.max()}"
            )
        if np.any(edges[:, 0] == edges[:, 1]):
            raise ParseError("self-loop edge rejected")
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        edges = np.unique(np.stack([lo, hi], axis=1), axis=0)
        object.__setattr__(self, "edges", edges)
        attrs = np.ascontiguousarray(self.attributes, dtype=np.float64)
        if attrs.ndim != 2 or attrs.shape[0] != self.n:
            raise ShapeError(
                f"attribute matrix shape {attrs.shape} does not match n={self.n}"
            )
        if not np.isfinite(attrs).all():
            raise NumericError("attribute matrix contains non-finite entries")
        object.__setattr__(self, "attributes", attrs)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
            if labels.shape[0] != self.n:
                raise ShapeError(
                    f"label vector length {labels.shape[0]} does not match n={self.n}"
                )
            object.__setattr__(self, "labels", labels)

    @property
    def m(self) -> int:
        """Undirected edge count."""
        return int(self.edges.shape[0])

    @property
    def d(self) -> int:
        return int(self.attributes.shape[1])

    @property
    def num_classes(self) -> int:
        if self.labels is None:
            return 0
        return int(self.labels.max()) + 1 if self.labels.size else 0


def adjacency(g: Graph) -> sp.csr_matrix:
    """Sparse symmetric adjacency A with zero diagonal."""
    if g.m == 0:
        return sp.csr_matrix((g.n, g.n), dtype=np.float64)
    i, j = g.edges[:, 0], g.edges[:, 1]
    rows = np.concatenate([i, j])
    cols = np.concatenate([j, i])
    data = np.ones(rows.shape[0], dtype=np.float64)
    return sp.csr_matrix((data, (rows, cols)), shape=(g.n, g.n))


def self_loop_adjacency(g: Graph) -> sp.csr_matrix:
    """A-tilde = A + I."""
    return (adjacency(g) + sp.identity(g.n, dtype=np.float64, format="csr")).tocsr()


def degree_vector(g: Graph) -> np.ndarray:
    """Degree of every node over A (self-loops excluded)."""
    deg = np.zeros(g.n, dtype=np.float64)
    if g.m:
        np.add.at(deg, g.edges[:, 0], 1.0)
        np.add.at(deg, g.edges[:, 1], 1.0)
    return deg


def normalized_adjacency(g: Graph) -> sp.csr_matrix:
    """A-hat = D~^{-1/2} (A + I) D~^{-1/2}; symmetric, spectrum in [-1, 1]."""
    a_tilde = self_loop_adjacency(g)
    d_tilde = np.asarray(a_tilde.sum(axis=1)).ravel()
    inv_sqrt = 1.0 / np.sqrt(d_tilde)  # >= 1 thanks to the self-loops
    scale = sp.diags(inv_sqrt)
    return (scale @ a_tilde @ scale).tocsr()


class ModularityOperator:
    """B = A - k k^T / 2m held in factored form; dense only on demand.

    apply(U) computes B @ U in O(nnz(A) + N*C); dense() materializes the
    N x N matrix and is refused above `dense_cap` nodes.
    """

    def __init__(self, g: Graph, dense_cap: int = DENSE_B_CAP):
        if g.m == 0:
            raise DegenerateGraphError("modularity is undefined for an edgeless graph")
        self.a = adjacency(g)
        self.k = degree_vector(g)
        self.m = g.m
        self.n = g.n
        self.dense_cap = dense_cap

    def apply(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        ku = self.k @ u  # length-C row
        return self.a @ u - np.outer(self.k, ku) / (2.0 * self.m)

    def dense(self) -> np.ndarray:
        if self.n > self.dense_cap:
            raise MemoryError(
                f"refusing to materialize {self.n}x{self.n} modularity matrix "
                f"(cap {self.dense_cap})"
            )
        return self.a.toarray() - np.outer(self.k, self.k) / (2.0 * self.m)


def modularity_matrix(g: Graph, dense_cap: int = DENSE_B_CAP) -> np.ndarray:
    """Dense modularity matrix B_ij = A_ij - k_i k_j / 2m; rows sum to zero."""
    return ModularityOperator(g, dense_cap=dense_cap).dense()


@dataclass(frozen=True)
class GraphOperators:
    """All graph-derived operators needed by one training run."""

    a: sp.csr_matrix
    a_tilde: sp.csr_matrix
    a_hat: sp.csr_matrix
    degrees: np.ndarray
    modularity: ModularityOperator | None = field(default=None)


def build_operators(g: Graph, dense_cap: int = DENSE_B_CAP) -> GraphOperators:
    mod = ModularityOperator(g, dense_cap=dense_cap) if g.m >= 1 else None
    return GraphOperators(
        a=adjacency(g),
        a_tilde=self_loop_adjacency(g),
        a_hat=normalized_adjacency(g),
        degrees=degree_vector(g),
        modularity=mod,
    )


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------

_BIN_MAGIC_LEN = 8  # two little-endian uint32: rows, cols


def _data_lines(path: Path):
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line


def read_edge_file(path) -> list[tuple[int, int]]:
    """Parse one 'i j' pair per line; '#' comments allowed; self-loops rejected."""
    path = Path(path)
    edges = []
    for lineno, line in _data_lines(path):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected 'i j', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-integer endpoint in {line!r}")
        if i == j:
            raise ParseError(f"{path}:{lineno}: self-loop '{i} {i}' rejected")
        if i < 0 or j < 0:
            raise IndexErrorSecl(f"{path}:{lineno}: negative node id in {line!r}")
        edges.append((i, j))
    return edges


def read_attribute_file(path) -> np.ndarray:
    """Read an N x d attribute matrix.

    Text files hold one row of floats per line, optionally preceded by an
    'N d' header line (validated when present). Files ending in '.bin' are
    raw little-endian float64 with an 8-byte (uint32 N, uint32 d) header.
    """
    path = Path(path)
    if path.suffix == ".bin":
        return _read_matrix_binary(path)
    rows = list(_data_lines(path))
    if not rows:
        raise ParseError(f"{path}: empty attribute file")
    first_tokens = rows[0][1].split()
    start = 0
    if len(first_tokens) == 2:
        # candidate 'N d' header: accept only if it matches the remaining data
        try:
            hn, hd = int(first_tokens[0]), int(first_tokens[1])
        except ValueError:
            hn = hd = -1
        if (
            hn == len(rows) - 1
            and len(rows) > 1
            and len(rows[1][1].split()) == hd
        ):
            start = 1
    data = []
    width = None
    for lineno, line in rows[start:]:
        vals = line.split()
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise ParseError(
                f"{path}:{lineno}: expected {width} values, got {len(vals)}"
            )
        try:
            data.append([float(v) for v in vals])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-numeric attribute value")
    return np.asarray(data, dtype=np.float64)


def _read_matrix_binary(path: Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _BIN_MAGIC_LEN:
        raise ParseError(f"{path}: truncated binary matrix header")
    n, d = struct.unpack("<II", raw[:_BIN_MAGIC_LEN])
    expect = _BIN_MAGIC_LEN + 8 * n * d
    if len(raw) != expect:
        raise ParseError(
            f"{path}: binary matrix payload is {len(raw)} bytes, expected {expect}"
        )
    mat = np.frombuffer(raw, dtype="<f8", offset=_BIN_MAGIC_LEN)
    return np.ascontiguousarray(mat.reshape(n, d))


def write_matrix_binary(path, mat: np.ndarray) -> None:
    mat = np.ascontiguousarray(mat, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", mat.shape[0], mat.shape[1]))
        fh.write(mat.astype("<f8").tobytes())


def read_label_file(path) -> np.ndarray:
    path = Path(path)
    labels = []
    for lineno, line in _data_lines(path):
        try:
            labels.append(int(line.split()[0]))
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-integer label {line!r}")
    return np.asarray(labels, dtype=np.int64)


def load_graph(edge_path, attr_path, label_path=None) -> Graph:
    """Load a Graph; N comes from the attribute matrix row count."""
    attrs = read_attribute_file(attr_path)
    n = attrs.shape[0]
    edge_pairs = read_edge_file(edge_path)
    raw_count = len(edge_pairs)
    edges = np.asarray(edge_pairs, dtype=np.int64).reshape(-1, 2)
    if edges.size and edges.max() >= n:
        raise IndexErrorSecl(
            f"{edge_path}: endpoint {edges.max()} >= node count {n}"
        )
    labels = read_label_file(label_path) if label_path is not None else None
    g = Graph(n=n, edges=edges, attributes=attrs, labels=labels)
    # raw line count vs deduplicated undirected count, for dataset auditing
    object.__setattr__(g, "raw_edge_lines", raw_count)
    return g


def save_graph(g: Graph, edge_path, attr_path, label_path=None) -> None:
    """Write a Graph back out in the text formats load_graph reads."""
    with open(edge_path, "w") as fh:
        for i, j in g.edges:
            fh.write(f"{i} {j}\n")
    with open(attr_path, "w") as fh:
        fh.write(f"{g.n} {g.d}\n")
        for row in g.attributes:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
    if label_path is not None and g.labels is not None:
        with open(label_path, "w") as fh:
            for lab in g.labels:
                fh.write(f"{lab}\n")
