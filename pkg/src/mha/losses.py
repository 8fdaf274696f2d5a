"""Built-in convex loss library.

Every loss here is convex in the decision ``y`` for each fixed observation:

``quadratic_tracking``  ``||y - x||^2``                  (needs m == d)
``ridge_constraint``    ``||y||^2``
``linear_cost``         ``<y, x>``                        (needs m == d)
``variance_proxy``      ``||y||^2 * ||x||^2 / d``
``portfolio_variance``  ``(<y, x>)^2``                    (needs m == d)
"""
from __future__ import annotations

import numpy as np

from .core import ConfigError, LossSpec


def quadratic_tracking(y, X):
    diff = y[None, :] - X
    return np.einsum("ij,ij->i", diff, diff)


def quadratic_tracking_grad(y, X):
    return 2.0 * (y[None, :] - X)


def ridge_constraint(y, X):
    return np.full(X.shape[0], float(y @ y))


def ridge_constraint_grad(y, X):
    return np.broadcast_to(2.0 * y, (X.shape[0], y.size))


def linear_cost(y, X):
    return X @ y


def linear_cost_grad(y, X):
    return X


def variance_proxy(y, X):
    return float(y @ y) * np.einsum("ij,ij->i", X, X) / X.shape[1]


def variance_proxy_grad(y, X):
    scale = np.einsum("ij,ij->i", X, X) / X.shape[1]
    return 2.0 * scale[:, None] * y[None, :]


def portfolio_variance(y, X):
    return (X @ y) ** 2


def portfolio_variance_grad(y, X):
    return 2.0 * (X @ y)[:, None] * X


BUILTIN_LOSSES = {
    "quadratic_tracking": (quadratic_tracking, quadratic_tracking_grad, True),
    "ridge_constraint": (ridge_constraint, ridge_constraint_grad, False),
    "linear_cost": (linear_cost, linear_cost_grad, True),
    "variance_proxy": (variance_proxy, variance_proxy_grad, False),
    "portfolio_variance": (portfolio_variance, portfolio_variance_grad, True),
}


def make_loss_spec(main: str, constraint: str, m: int | None = None, d: int | None = None) -> LossSpec:
    """Assemble a :class:`LossSpec` from two built-in loss names."""
    parts = []
    for name in (main, constraint):
        try:
            fn, grad, needs_match = BUILTIN_LOSSES[name]
        except KeyError:
            raise ConfigError(f"unknown loss {name!r}; choose from {sorted(BUILTIN_LOSSES)}") from None
        if needs_match and m is not None and d is not None and m != d:
            raise ConfigError(f"loss {name!r} needs decision dimension == observation dimension")
        parts.append((fn, grad))
    (u, gu), (c, gc) = parts
    return LossSpec(u=u, c=c, grad_u=gu, grad_c=gc, name=f"{main}/{constraint}")
