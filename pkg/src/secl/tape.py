"""Minimal reverse-mode autodiff over dense 64-bit arrays.

The op set is exactly what the training graph needs: dense and sparse-left
matmul, elementwise arithmetic, row L2 normalization, row softmax and
logsumexp, reductions, diagonal gather, tanh, and a trace-of-quadratic-form
against a constant symmetric operator. Every value is a 2-D float64 array;
scalars are 1x1. A tape is built fresh per training step and backward() may
run once per tape.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import NumericError, ShapeError

ROW_NORM_EPS = 1e-12  # inside the sqrt, so zero rows stay finite


def _as_matrix(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(1, -1)
    elif a.ndim != 2:
        raise ShapeError(f"tape values must be 2-D, got shape {a.shape}")
    return a


class Node:
    __slots__ = ("idx", "value", "parents", "vjp", "is_leaf", "adjoint")

    def __init__(self, idx, value, parents, vjp, is_leaf=False):
        self.idx = idx
        self.value = value
        self.parents = parents
        self.vjp = vjp  # maps upstream gradient -> tuple of parent gradients
        self.is_leaf = is_leaf
        self.adjoint = None

    @property
    def shape(self):
        return self.value.shape


class Tape:
    """Append-only record of operations; nodes are topologically ordered."""

    def __init__(self):
        self.nodes: list[Node] = []
        self._backward_done = False

    def _push(self, value, parents=(), vjp=None, is_leaf=False) -> Node:
        node = Node(len(self.nodes), _as_matrix(value), tuple(parents), vjp, is_leaf)
        self.nodes.append(node)
        return node

    # -- inputs ------------------------------------------------------------

    def leaf(self, value) -> Node:
        """A trainable parameter: gradients accumulate here."""
        return self._push(value, is_leaf=True)

    def constant(self, value) -> Node:
        """A non-trainable input; no gradient flows into it."""
        return self._push(value)

    # -- ops ---------------------------------------------------------------

    def _check(self, op, cond, a, b=None):
        if not cond:
            other = f" and {b.shape}" if b is not None else ""
            raise ShapeError(f"{op}: incompatible shapes {a.shape}{other}")

    def matmul(self, a: Node, b: Node) -> Node:
        self._check("matmul", a.shape[1] == b.shape[0], a, b)
        av, bv = a.value, b.value
        return self._push(
            av @ bv,
            (a, b),
            lambda g: (g @ bv.T, av.T @ g),
        )

    def matmul_sparse_left(self, s, x: Node) -> Node:
        """s @ x with s a constant scipy sparse matrix."""
        if not sp.issparse(s):
            raise ShapeError("matmul_sparse_left: left operand must be sparse")
        if s.shape[1] != x.shape[0]:
            raise ShapeError(
                f"matmul_sparse_left: incompatible shapes {s.shape} and {x.shape}"
            )
        st = s.T.tocsr()
        return self._push(s @ x.value, (x,), lambda g: (st @ g,))

    def add(self, a: Node, b: Node) -> Node:
        """Elementwise add; b may be a 1 x d row broadcast over a's rows."""
        if a.shape == b.shape:
            return self._push(a.value + b.value, (a, b), lambda g: (g, g))
        if b.shape == (1, a.shape[1]):
            return self._push(
                a.value + b.value,
                (a, b),
                lambda g: (g, g.sum(axis=0, keepdims=True)),
            )
        raise ShapeError(f"add: incompatible shapes {a.shape} and {b.shape}")

    def subtract(self, a: Node, b: Node) -> Node:
        self._check("subtract", a.shape == b.shape, a, b)
        return self._push(a.value - b.value, (a, b), lambda g: (g, -g))

    def scale(self, a: Node, c: float) -> Node:
        c = float(c)
        return self._push(a.value * c, (a,), lambda g: (g * c,))

    def transpose(self, a: Node) -> Node:
        return self._push(a.value.T, (a,), lambda g: (g.T,))

    def multiply(self, a: Node, b: Node) -> Node:
        self._check("multiply", a.shape == b.shape, a, b)
        av, bv = a.value, b.value
        return self._push(av * bv, (a, b), lambda g: (g * bv, g * av))

    def square(self, a: Node) -> Node:
        av = a.value
        return self._push(av * av, (a,), lambda g: (2.0 * av * g,))

    def exp(self, a: Node) -> Node:
        out = np.exp(a.value)
        return self._push(out, (a,), lambda g: (g * out,))

    def log(self, a: Node) -> Node:
        av = a.value
        return self._push(np.log(av), (a,), lambda g: (g / av,))

    def tanh(self, a: Node) -> Node:
        out = np.tanh(a.value)
        return self._push(out, (a,), lambda g: (g * (1.0 - out * out),))

    def reduce_sum(self, a: Node) -> Node:
        shape = a.shape
        return self._push(
            a.value.sum(),
            (a,),
            lambda g: (np.full(shape, float(g[0, 0])),),
        )

    def reduce_mean(self, a: Node) -> Node:
        shape = a.shape
        size = a.value.size
        return self._push(
            a.value.mean(),
            (a,),
            lambda g: (np.full(shape, float(g[0, 0]) / size),),
        )

    def row_l2_normalize(self, a: Node) -> Node:
        av = a.value
        inv = 1.0 / np.sqrt((av * av).sum(axis=1, keepdims=True) + ROW_NORM_EPS)
        out = av * inv

        def vjp(g):
            dot = (g * av).sum(axis=1, keepdims=True)
            return (g * inv - av * (dot * inv**3),)

        return self._push(out, (a,), vjp)

    def softmax_rows(self, a: Node) -> Node:
        av = a.value
        shifted = av - av.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        p = e / e.sum(axis=1, keepdims=True)

        def vjp(g):
            dot = (g * p).sum(axis=1, keepdims=True)
            return (p * (g - dot),)

        return self._push(p, (a,), vjp)

    def row_logsumexp(self, a: Node) -> Node:
        """Per-row log(sum(exp(row))) as an N x 1 column; the stable form."""
        av = a.value
        mx = av.max(axis=1, keepdims=True)
        e = np.exp(av - mx)
        s = e.sum(axis=1, keepdims=True)
        out = mx + np.log(s)
        softmax = e / s
        return self._push(out, (a,), lambda g: (g * softmax,))

    def gather_diagonal(self, a: Node) -> Node:
        self._check("gather_diagonal", a.shape[0] == a.shape[1], a)
        n = a.shape[0]

        def vjp(g):
            out = np.zeros((n, n))
            np.fill_diagonal(out, g.ravel())
            return (out,)

        return self._push(np.diag(a.value).reshape(-1, 1), (a,), vjp)

    def trace_quadratic(self, u: Node, b_apply, b_shape) -> Node:
        """Tr(U^T B U) for a constant symmetric operator B given as a
        closure computing B @ U; gradient is 2 B U."""
        if b_shape[1] != u.shape[0]:
            raise ShapeError(
                f"trace_quadratic: incompatible shapes {tuple(b_shape)} and {u.shape}"
            )
        bu = b_apply(u.value)
        val = float((u.value * bu).sum())
        return self._push(val, (u,), lambda g: (2.0 * float(g[0, 0]) * bu,))

    # -- backward ----------------------------------------------------------

    def backward(self, loss: Node) -> dict[int, np.ndarray]:
        """Reverse traversal from a scalar loss; returns leaf gradients
        keyed by node index. A second call on the same tape is an error."""
        if loss.shape != (1, 1):
            raise ShapeError(f"backward: loss must be scalar, got shape {loss.shape}")
        if self._backward_done:
            raise RuntimeError("backward() already ran on this tape; build a new one")
        self._backward_done = True
        loss.adjoint = np.ones((1, 1))
        for node in reversed(self.nodes[: loss.idx + 1]):
            if node.adjoint is None or not node.parents:
                continue
            grads = node.vjp(node.adjoint)
            for parent, grad in zip(node.parents, grads):
                if parent.adjoint is None:
                    parent.adjoint = np.zeros(parent.shape)
                parent.adjoint += grad
        out = {}
        for node in self.nodes:
            if node.is_leaf:
                grad = node.adjoint if node.adjoint is not None else np.zeros(node.shape)
                if not np.isfinite(grad).all():
                    raise NumericError("non-finite gradient encountered in backward()")
                out[node.idx] = grad
        return out
