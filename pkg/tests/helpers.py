"""Shared test utilities: full-model loss evaluation as a plain function of
parameter arrays (for finite-difference checks) and dense brute-force oracles."""

import numpy as np

from secl.encoders import (
    EncoderParams,
    assignment_logits,
    encode,
    tape_params,
)
from secl.graphs import Graph, build_operators
from secl.losses import (
    cross_view_contrastive_loss,
    modularity_loss,
    structural_contrastive_loss,
    total_loss,
)
from secl.tape import Tape


def build_loss(which, ops, x_hat, tau=0.5, lam1=0.1, lam2=1.0,
               dense_cap=4096, activation="tanh"):
    """Returns f(params: EncoderParams) -> (tape, leaves, loss node)."""

    def forward(params):
        tape = Tape()
        leaves, struct, attr, head = tape_params(tape, params)
        emb = encode(tape, struct, attr, ops.a, x_hat, activation=activation)
        if which == "cl":
            node = cross_view_contrastive_loss(tape, emb.h1, emb.h2, tau)
        elif which == "sl":
            node = structural_contrastive_loss(
                tape, emb.h1, emb.h2, ops.a_tilde, dense_cap=dense_cap)
        elif which == "m":
            logits = assignment_logits(tape, emb.h2, head)
            node = modularity_loss(tape, logits, ops.modularity)
        elif which == "total":
            l_cl = cross_view_contrastive_loss(tape, emb.h1, emb.h2, tau)
            l_sl = structural_contrastive_loss(
                tape, emb.h1, emb.h2, ops.a_tilde, dense_cap=dense_cap)
            logits = assignment_logits(tape, emb.h2, head)
            l_m = modularity_loss(tape, logits, ops.modularity)
            node, _ = total_loss(tape, l_cl, l_sl, l_m, lam1, lam2, "full")
        else:
            raise ValueError(which)
        return tape, leaves, node

    return forward


def tape_gradients(forward, params: EncoderParams):
    tape, leaves, node = forward(params)
    grads = tape.backward(node)
    return [grads[leaf.idx] for leaf in leaves], float(node.value[0, 0])


def loss_of_flat(forward, template: EncoderParams):
    """Adapter: list-of-arrays -> scalar loss, for finite differences."""

    def fn(flat):
        params = EncoderParams.unflatten(flat, template)
        _, _, node = forward(params)
        return float(node.value[0, 0])

    return fn


def dense_normalized_adjacency(g: Graph) -> np.ndarray:
    """Brute-force D~^{-1/2} (A + I) D~^{-1/2} by dense triple product."""
    a = np.zeros((g.n, g.n))
    for i, j in g.edges:
        a[i, j] = a[j, i] = 1.0
    a_tilde = a + np.eye(g.n)
    d = np.diag(1.0 / np.sqrt(a_tilde.sum(axis=1)))
    return d @ a_tilde @ d


def pair_counting_modularity(labels, g: Graph) -> float:
    """Independent modularity oracle: sum over communities of
    e_c / m - (deg_c / 2m)^2."""
    labels = np.asarray(labels)
    m = g.m
    q = 0.0
    deg = np.zeros(g.n)
    for i, j in g.edges:
        deg[i] += 1
        deg[j] += 1
    for c in np.unique(labels):
        members = labels == c
        e_c = sum(1 for i, j in g.edges if members[i] and members[j])
        deg_c = deg[members].sum()
        q += e_c / m - (deg_c / (2.0 * m)) ** 2
    return q


def relative_gradient_error(analytic, numeric, floor=1e-6):
    """Max relative error over entries where the analytic gradient is
    meaningfully nonzero."""
    worst = 0.0
    for a, n in zip(analytic, numeric):
        mask = np.abs(a) > floor
        if mask.any():
            rel = np.abs(a[mask] - n[mask]) / np.abs(a[mask])
            worst = max(worst, float(rel.max()))
    return worst
