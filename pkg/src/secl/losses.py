"""The three training objectives and their weighted combination.

All functions take a Tape plus taped nodes and return scalar nodes, so
gradients flow back to every encoder parameter. Each loss has a dense and a
memory-frugal path; the dense path is the oracle the frugal path is tested
against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, NumericError
from .graphs import ModularityOperator
from .tape import Node, Tape

DENSE_SIMILARITY_CAP = 4096  # above this, never materialize N x N

ABLATIONS = ("full", "no-M", "no-CL", "no-SL")


@dataclass
class LossBreakdown:
    l_cl: float
    l_sl: float
    l_m: float
    total: float
    lambda1: float
    lambda2: float


def cross_view_contrastive_loss(tape: Tape, h1: Node, h2: Node, tau: float) -> Node:
    """InfoNCE across the two views, both directions, same-view pairs excluded.

    For each node the positive is its twin in the other view; the denominator
    runs over all N cross-view similarities (the positive included). The
    row-logsumexp keeps small temperatures finite.
    """
    if tau <= 0:
        raise ConfigError(f"temperature must be positive, got {tau}")
    s = tape.scale(tape.matmul(h1, tape.transpose(h2)), 1.0 / tau)
    diag = tape.gather_diagonal(s)
    # direction 1 -> 2: rows of s; direction 2 -> 1: rows of s^T (same diagonal)
    loss12 = tape.reduce_mean(tape.subtract(tape.row_logsumexp(s), diag))
    loss21 = tape.reduce_mean(tape.subtract(tape.row_logsumexp(tape.transpose(s)), diag))
    return tape.scale(tape.add(loss12, loss21), 0.5)


def structural_contrastive_loss(
    tape: Tape,
    h1: Node,
    h2: Node,
    a_tilde: sp.csr_matrix,
    dense_cap: int = DENSE_SIMILARITY_CAP,
) -> Node:
    """Mean squared gap between the cross-view similarity and A + I.

    Below the cap: plain MSE on the dense N x N similarity. Above: the
    expansion sum(S^2) - 2 sum_{A~_ij=1} S_ij + nnz(A~), with sum(S^2)
    computed from the two d' x d' Gram matrices so N x N never exists.
    """
    n = h1.shape[0]
    if n <= dense_cap:
        s = tape.matmul(h1, tape.transpose(h2))
        target = tape.constant(a_tilde.toarray())
        return tape.reduce_mean(tape.square(tape.subtract(s, target)))
    # sum_ij S_ij^2 = Tr((h1^T h1)(h2^T h2)) = <Gram1, Gram2>
    g1 = tape.matmul(tape.transpose(h1), h1)
    g2 = tape.matmul(tape.transpose(h2), h2)
    sum_s2 = tape.reduce_sum(tape.multiply(g1, g2))
    # sum over nonzeros of A~ of S_ij = <h1, A~ h2>
    edge_sum = tape.reduce_sum(tape.multiply(h1, tape.matmul_sparse_left(a_tilde, h2)))
    nnz = tape.constant(float(a_tilde.nnz))
    gap = tape.add(tape.subtract(sum_s2, tape.scale(edge_sum, 2.0)), nnz)
    return tape.scale(gap, 1.0 / float(n * n))


def modularity_loss(tape: Tape, logits: Node, b_op: ModularityOperator) -> Node:
    """(1/2m) Tr(U~^T B U~) with U~ = row-softmax(logits); maximized via the
    minus sign in the total objective. B is applied matrix-free."""
    if not np.isfinite(logits.value).all():
        raise NumericError("modularity_loss: non-finite logits")
    u = tape.softmax_rows(logits)
    tr = tape.trace_quadratic(u, b_op.apply, (b_op.n, b_op.n))
    return tape.scale(tr, 1.0 / (2.0 * b_op.m))


def total_loss(
    tape: Tape,
    l_cl: Node | None,
    l_sl: Node | None,
    l_m: Node | None,
    lambda1: float,
    lambda2: float,
    ablation: str = "full",
) -> tuple[Node, LossBreakdown]:
    """total = L_SL + lambda1 L_CL - lambda2 L_M, with one term dropped per
    ablation mode (no-M / no-CL / no-SL)."""
    if lambda1 < 0 or lambda2 < 0:
        raise ConfigError("loss weights must be non-negative")
    if ablation not in ABLATIONS:
        raise ConfigError(f"unknown ablation {ablation!r}; expected one of {ABLATIONS}")
    terms = []
    if ablation != "no-SL":
        if l_sl is None:
            raise ConfigError("ablation keeps L_SL but no L_SL node was given")
        terms.append(l_sl)
    if ablation != "no-CL":
        if l_cl is None:
            raise ConfigError("ablation keeps L_CL but no L_CL node was given")
        terms.append(tape.scale(l_cl, lambda1))
    if ablation != "no-M":
        if l_m is None:
            raise ConfigError("ablation keeps L_M but no L_M node was given")
        terms.append(tape.scale(l_m, -lambda2))
    total = terms[0]
    for t in terms[1:]:
        total = tape.add(total, t)

    def val(node):
        return float(node.value[0, 0]) if node is not None else 0.0

    breakdown = LossBreakdown(
        l_cl=val(l_cl),
        l_sl=val(l_sl),
        l_m=val(l_m),
        total=float(total.value[0, 0]),
        lambda1=lambda1,
        lambda2=lambda2,
    )
    return total, breakdown
