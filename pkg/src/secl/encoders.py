"""Attribute smoothing, the two MLP encoders, and the cluster-assignment head.

The structure encoder consumes each node's adjacency row (input width N, first
product sparse-left); the attribute encoder consumes the smoothed attribute
matrix. Both end in row L2 normalization so the two views share a unit sphere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, ShapeError
from .graphs import Graph, normalized_adjacency
from .tape import Node, Tape


@dataclass
class EncoderParams:
    """Per-layer (weight, bias) pairs for both MLPs plus the assignment head W."""

    structure_layers: list[tuple[np.ndarray, np.ndarray]]
    attribute_layers: list[tuple[np.ndarray, np.ndarray]]
    modularity_head: np.ndarray  # d' x C, no bias

    def flatten(self) -> list[np.ndarray]:
        out = []
        for w, b in self.structure_layers + self.attribute_layers:
            out.extend([w, b])
        out.append(self.modularity_head)
        return out

    @classmethod
    def unflatten(cls, flat: list[np.ndarray], template: "EncoderParams"):
        it = iter(flat)
        struct = [(next(it), next(it)) for _ in template.structure_layers]
        attr = [(next(it), next(it)) for _ in template.attribute_layers]
        return cls(struct, attr, next(it))

    @property
    def latent_dim(self) -> int:
        return self.attribute_layers[-1][0].shape[1]

    @property
    def num_clusters(self) -> int:
        return self.modularity_head.shape[1]


@dataclass
class Embeddings:
    """Unit-row structure view h1 and attribute view h2 (taped nodes)."""

    h1: Node
    h2: Node


def smooth_attributes(g: Graph, r: int) -> np.ndarray:
    """Low-pass filter the attributes: r sparse products by A-hat.

    Computed once per run; the result is a constant of training.
    """
    if r < 0:
        raise ConfigError(f"filter depth must be >= 0, got {r}")
    x = g.attributes
    if r == 0:
        return x.copy()
    a_hat = normalized_adjacency(g)
    for _ in range(r):
        x = a_hat @ x
    return np.ascontiguousarray(x)


def _layer_dims(input_width: int, widths: list[int]) -> list[tuple[int, int]]:
    dims = []
    prev = input_width
    for w in widths:
        if w <= 0:
            raise ConfigError(f"layer width must be positive, got {w}")
        dims.append((prev, w))
        prev = w
    return dims


def init_params(
    n: int,
    d: int,
    structure_widths: list[int],
    attribute_widths: list[int],
    num_clusters: int,
    seed: int,
) -> EncoderParams:
    """Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] weights, zero biases."""
    if not structure_widths or not attribute_widths:
        raise ConfigError("each encoder needs at least one layer")
    if structure_widths[-1] != attribute_widths[-1]:
        raise ConfigError(
            "both encoders must end at the same latent width, got "
            f"{structure_widths[-1]} and {attribute_widths[-1]}"
        )
    if num_clusters <= 0:
        raise ConfigError(f"cluster count must be positive, got {num_clusters}")
    rng = np.random.default_rng(seed)

    def make(dims):
        layers = []
        for fan_in, fan_out in dims:
            bound = 1.0 / np.sqrt(fan_in)
            w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            layers.append((w, np.zeros((1, fan_out))))
        return layers

    structure = make(_layer_dims(n, structure_widths))
    attribute = make(_layer_dims(d, attribute_widths))
    d_latent = attribute_widths[-1]
    bound = 1.0 / np.sqrt(d_latent)
    head = rng.uniform(-bound, bound, size=(d_latent, num_clusters))
    return EncoderParams(structure, attribute, head)


def _mlp(tape: Tape, x, layers: list[tuple[Node, Node]], activation: str) -> Node:
    """Apply the layer stack; x is a sparse constant or a taped node."""
    h = x
    last = len(layers) - 1
    for i, (w, b) in enumerate(layers):
        if sp.issparse(h):
            h = tape.matmul_sparse_left(h, w)
        else:
            h = tape.matmul(h, w)
        h = tape.add(h, b)
        if i < last and activation == "tanh":
            h = tape.tanh(h)
    return h


def tape_params(tape: Tape, params: EncoderParams):
    """Register every parameter array as a leaf; returns (leaves, layer views)."""
    struct = [(tape.leaf(w), tape.leaf(b)) for w, b in params.structure_layers]
    attr = [(tape.leaf(w), tape.leaf(b)) for w, b in params.attribute_layers]
    head = tape.leaf(params.modularity_head)
    leaves = []
    for w, b in struct + attr:
        leaves.extend([w, b])
    leaves.append(head)
    return leaves, struct, attr, head


def encode(
    tape: Tape,
    struct_layers,
    attr_layers,
    a: sp.csr_matrix,
    x_hat: np.ndarray,
    activation: str = "tanh",
) -> Embeddings:
    """Forward both encoders on the tape and row-normalize each view."""
    if a.shape[0] != x_hat.shape[0]:
        raise ShapeError(
            f"encode: adjacency {a.shape} vs attributes {x_hat.shape}"
        )
    h1 = tape.row_l2_normalize(_mlp(tape, a, struct_layers, activation))
    h2 = tape.row_l2_normalize(
        _mlp(tape, tape.constant(x_hat), attr_layers, activation)
    )
    return Embeddings(h1=h1, h2=h2)


def assignment_logits(tape: Tape, h2: Node, head: Node) -> Node:
    """H2 @ W; the softmax lives inside the modularity loss."""
    return tape.matmul(h2, head)
