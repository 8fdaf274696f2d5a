"""Two simultaneous Weak Aggregating Algorithm instances.

The decision side down-weights experts by cumulative loss, the dual side
up-weights them; both use the fixed learning rate ``1/sqrt(n)``.  Weights are
computed in log space and normalised with log-sum-exp.
"""
from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

SIDES = ("y", "lambda")


def update_weights(cumulative_losses, alphas, n: int, side: str = "y") -> np.ndarray:
    """Mixture probabilities for round ``n + 1`` from cumulative losses after round ``n``.

    ``n == 0`` returns the prior ``alphas``.
    """
    alphas = np.asarray(alphas, dtype=float)
    if np.any(alphas <= 0):
        raise ValueError("prior weights must be strictly positive")
    if abs(alphas.sum() - 1.0) > 1e-9:
        raise ValueError("prior weights must sum to 1")
    if n < 0:
        raise ValueError("round must be nonnegative")
    if n == 0:
        return alphas / alphas.sum()
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}")
    sign = -1.0 if side == "y" else 1.0
    logw = np.log(alphas) + sign * np.asarray(cumulative_losses, dtype=float) / np.sqrt(n)
    return np.exp(logw - logsumexp(logw))


def aggregate(ys, lams, p_y, p_lam):
    """Convex combinations ``sum p_y[e] ys[e]`` and ``sum p_lam[e] lams[e]``."""
    ys = np.asarray(ys, dtype=float)
    y = np.asarray(p_y, dtype=float) @ ys.reshape(len(p_y), -1)
    lam = float(np.asarray(p_lam, dtype=float) @ np.asarray(lams, dtype=float))
    return y, lam


def entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())
