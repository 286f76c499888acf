"""Barrier functions with exact gradients, and the linear class-K map.

Both barriers are treated as globally defined smooth functions; no regular
value / domain analysis is attempted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError, as_vector


@dataclass(frozen=True)
class BarrierEval:
    value: float
    grad: np.ndarray


@dataclass(frozen=True)
class LinearClassK:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigurationError("class-K slope alpha must be positive")

    def __call__(self, r):
        return self.alpha * r


def classk_apply(k, r):
    """Evaluate the extended class-K map r -> alpha * r (negative r allowed)."""
    return k.alpha * r


def double_integrator_barrier(x, x1max, rho, Delta):
    """Backstepping barrier for the position limit ``|x1| <= x1max``.

    h(x) = (x1max^2 - x1^2) - (x2 + Delta*x1)^2 / rho
    """
    if not rho > 0:
        raise ConfigurationError("rho must be positive")
    x = as_vector(x, "x")
    x1, x2 = x[0], x[1]
    e = x2 + Delta * x1
    value = (x1max ** 2 - x1 ** 2) - e * e / rho
    grad = np.array([-2.0 * x1 - (2.0 * Delta / rho) * e, -(2.0 / rho) * e])
    return BarrierEval(float(value), grad)


def logsumexp_box_barrier(q, qm, lambda_h):
    """Soft-min of the per-joint margins ``qm^2 - q_i^2``.

    h(q) = -(1/lambda_h) log(sum_i exp(-lambda_h (qm^2 - q_i^2)))

    The gradient is ``-2 q_i w_i`` with ``w`` the softmin weights. Exponents
    are shifted by their maximum before exponentiation.
    """
    if not lambda_h > 0:
        raise ConfigurationError("lambda_h must be positive")
    if not qm > 0:
        raise ConfigurationError("qm must be positive")
    q = as_vector(q, "q")
    margins = qm ** 2 - q ** 2
    z = -lambda_h * margins
    zmax = z.max()
    e = np.exp(z - zmax)
    total = e.sum()
    value = -(zmax + math.log(total)) / lambda_h
    w = e / total
    return BarrierEval(float(value), -2.0 * q * w)
