"""Bias-corrected Adam over named parameter dicts."""

from __future__ import annotations

import numpy as np

from ..errors import NarError
from .model import ModelState

DEFAULT_LR = 1e-3
DEFAULT_BETA1 = 0.9
DEFAULT_BETA2 = 0.999
DEFAULT_EPS = 1e-8


def adam_update(
    params: dict[str, np.ndarray],
    m: dict[str, np.ndarray],
    v: dict[str, np.ndarray],
    step: int,
    grads: dict[str, np.ndarray],
    lr: float = DEFAULT_LR,
    beta1: float = DEFAULT_BETA1,
    beta2: float = DEFAULT_BETA2,
    eps: float = DEFAULT_EPS,
) -> int:
    """One in-place update; returns the incremented step counter.

    theta -= lr * m_hat / (sqrt(v_hat) + eps) with the usual 1/(1 - beta^t)
    bias corrections.
    """
    step += 1
    bc1 = 1.0 - beta1**step
    bc2 = 1.0 - beta2**step
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            bad = int(np.size(g) - np.isfinite(g).sum())
            raise NarError(
                f"non-finite gradient for {name!r} at step {step} ({bad} bad entries)"
            )
        p = params[name]
        g = g.astype(p.dtype, copy=False)
        m[name] = beta1 * m[name] + (1.0 - beta1) * g
        v[name] = beta2 * v[name] + (1.0 - beta2) * (g * g)
        m_hat = m[name] / bc1
        v_hat = v[name] / bc2
        p -= (lr * m_hat / (np.sqrt(v_hat) + eps)).astype(p.dtype)
    return step


def adam_step(
    state: ModelState,
    grads: dict[str, np.ndarray],
    lr: float = DEFAULT_LR,
    beta1: float = DEFAULT_BETA1,
    beta2: float = DEFAULT_BETA2,
    eps: float = DEFAULT_EPS,
) -> None:
    """Apply one Adam update to a model state (mutates params/moments/step)."""
    missing = set(grads) - set(state.params)
    if missing:
        raise KeyError(f"gradients for unknown parameters: {sorted(missing)}")
    state.step = adam_update(
        state.params, state.m, state.v, state.step, grads, lr, beta1, beta2, eps
    )
