"""Adam optimizer and the central-difference gradient oracle."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ShapeError


@dataclass
class AdamState:
    """First/second moment accumulators, one pair per parameter array."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    def ensure(self, params: list[np.ndarray]) -> None:
        if not self.m:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]


def adam_step(
    params: list[np.ndarray], grads: list[np.ndarray], state: AdamState
) -> list[np.ndarray]:
    """One bias-corrected Adam update; returns new parameter arrays."""
    state.ensure(params)
    if len(params) != len(grads):
        raise ShapeError(
            f"adam_step: {len(params)} params but {len(grads)} gradients"
        )
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**state.t
    bc2 = 1.0 - b2**state.t
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise ShapeError(
                f"adam_step: param shape {p.shape} vs gradient shape {g.shape}"
            )
        if not np.isfinite(g).all():
            raise NumericError("adam_step: non-finite gradient entry")
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g
        m_hat = state.m[i] / bc1
        v_hat = state.v[i] / bc2
        out.append(p - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps))
    return out


def finite_difference_grad(loss_fn, params: list[np.ndarray], h: float = 1e-5):
    """Central differences (f(x+h) - f(x-h)) / 2h over every scalar entry.

    loss_fn takes the parameter list and returns a float; it must be
    deterministic. This is the oracle the tape gradients are checked against.
    """
    grads = []
    work = [p.copy() for p in params]
    for k, p in enumerate(work):
        grad = np.zeros_like(p)
        flat = p.reshape(-1)
        gflat = grad.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + h
            f_plus = loss_fn(work)
            flat[idx] = orig - h
            f_minus = loss_fn(work)
            flat[idx] = orig
            gflat[idx] = (f_plus - f_minus) / (2.0 * h)
        grads.append(grad)
    return grads
