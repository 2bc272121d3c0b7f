"""Adam updates and a finite-difference gradient checker."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass
class AdamState:
    step: int
    m: list[np.ndarray]
    v: list[np.ndarray]


def init_adam(params: Sequence[np.ndarray]) -> AdamState:
    return AdamState(
        step=0,
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
    )


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[list[np.ndarray], AdamState]:
    """One bias-corrected Adam update; returns new params and state."""
    if len(params) != len(grads):
        raise ValueError(f"{len(params)} params vs {len(grads)} grads")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"shape mismatch: param {p.shape} vs grad {g.shape}")
    t = state.step + 1
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * (g * g)
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        new_params.append(p - lr * m_hat / (np.sqrt(v_hat) + eps))
        new_m.append(m)
        new_v.append(v)
    return new_params, AdamState(step=t, m=new_m, v=new_v)


def gradient_check(
    loss_fn: Callable[[], tuple[float, list[np.ndarray]]],
    arrays: Sequence[np.ndarray],
    epsilon: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    `loss_fn` evaluates the scalar loss and its analytic gradients for the
    current contents of `arrays`; the checker perturbs every entry of every
    array in place.  Near-zero pairs are compared against a small floor so
    finite-difference noise does not blow up the ratio.
    """
    _, analytic = loss_fn()
    analytic = [a.copy() for a in analytic]
    if len(analytic) != len(arrays):
        raise ValueError("loss_fn gradients do not align with arrays")
    worst = 0.0
    for arr, grad in zip(arrays, analytic):
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + epsilon
            lp, _ = loss_fn()
            flat[idx] = orig - epsilon
            lm, _ = loss_fn()
            flat[idx] = orig
            numeric = (lp - lm) / (2.0 * epsilon)
            denom = max(abs(gflat[idx]), abs(numeric), 1e-6)
            worst = max(worst, abs(gflat[idx] - numeric) / denom)
    return worst
