"""Closed-loop control laws.

Controllers are built from a *structure view* of the plant: the affine
controllers see only ``f``, ``G`` and ``Phi``, the manipulator controller sees
only the regressor ``Y``. Neither can reach ``theta_true``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import filters
from .core import ConfigurationError


class ControllerKind(str, enum.Enum):
    ACBF = "acbf"
    RACBF = "racbf"
    TRACBF = "tracbf"
    SLOTINE_LI_HOT = "slotine_li_hot"

    @property
    def is_affine(self):
        return self is not ControllerKind.SLOTINE_LI_HOT

    @property
    def uses_hot(self):
        return self in (ControllerKind.TRACBF, ControllerKind.SLOTINE_LI_HOT)


@dataclass(frozen=True)
class AffineStructure:
    f: Callable
    G: Callable
    Phi: Callable


@dataclass(frozen=True)
class ManipulatorStructure:
    n: int
    p: int
    Y: Callable


def affine_structure(plant):
    return AffineStructure(plant.f, plant.G, plant.Phi)


def manipulator_structure(plant):
    return ManipulatorStructure(plant.n, plant.p, plant.Y)


def sinusoid(amplitude, frequency, n=1):
    """Reference q_d(t) = amplitude * sin(frequency t) on every coordinate.

    Returns a function of t giving (q_d, q_d_dot, q_d_ddot).
    """
    ones = np.ones(n)

    def qd_fn(t):
        s, c = math.sin(frequency * t), math.cos(frequency * t)
        return (amplitude * s * ones,
                amplitude * frequency * c * ones,
                -amplitude * frequency ** 2 * s * ones)

    return qd_fn


def backstepping_nominal(x, theta_hat, x1d, x1d_dot, x1d_ddot, k1=2.0, k2=2.0):
    """Certainty-equivalence backstepping tracker for the double integrator."""
    e1 = x[0] - x1d
    v = x1d_dot - k1 * e1
    e2 = x[1] - v
    v_dot = x1d_ddot - k1 * (x[1] - x1d_dot)
    return -(theta_hat[0] * x[0] + theta_hat[1] * x[1]) + v_dot - e1 - k2 * e2


def build_constraint(kind, x, structure, bar, gains, theta_hat):
    f, G, Phi = structure.f(x), structure.G(x), structure.Phi(x)
    if kind is ControllerKind.ACBF:
        return filters.build_acbf_constraint(x, f, G, Phi, bar, theta_hat)
    if kind is ControllerKind.RACBF:
        return filters.build_racbf_constraint(x, f, G, Phi, bar, gains.alpha, gains.Gamma,
                                              gains.theta_tilde_bound, theta_hat)
    if kind is ControllerKind.TRACBF:
        return filters.build_tracbf_constraint(x, f, G, Phi, bar, gains.alpha, gains.Gamma,
                                               gains.beta, gains.theta_tilde_bound, theta_hat)
    raise ConfigurationError(f"{kind} is not a control-affine safety controller")


def affine_safety_controller(kind, x, est, structure, barrier, gains, nominal):
    """QP safety filter around a nominal input.

    Parameters
    ----------
    kind : ControllerKind
        One of ACBF, RACBF, TRACBF.
    x : ndarray
    est : EstimatorState
        Only ``est.theta_hat`` is used.
    structure : AffineStructure
    barrier : callable
        x -> BarrierEval.
    gains : GainSet
    nominal : ndarray
        Desired input from the nominal tracker.

    Returns
    -------
    u : ndarray
    constraint : HalfSpaceConstraint
    """
    bar = barrier(x)
    c = build_constraint(kind, x, structure, bar, gains, est.theta_hat)
    return filters.qp_filter(np.atleast_1d(nominal), c), c


class AffineSafetyController:
    """Backstepping nominal + single-row CBF-QP for a control-affine plant."""

    def __init__(self, kind, structure, barrier, gains, reference, k1=2.0, k2=2.0):
        kind = ControllerKind(kind)
        if not kind.is_affine:
            raise ConfigurationError("affine plants need an ACBF, RACBF or TRACBF controller")
        if kind is ControllerKind.TRACBF and gains.beta is None:
            raise ConfigurationError("TRACBF requires beta")
        self.kind = kind
        self.structure = structure
        self.barrier = barrier
        self.gains = gains
        self.reference = reference
        self.k1, self.k2 = k1, k2

    def nominal(self, t, x, theta_hat):
        x1d, x1d_dot, x1d_ddot = (float(v[0]) for v in self.reference(t))
        return np.array([backstepping_nominal(x, theta_hat, x1d, x1d_dot, x1d_ddot, self.k1, self.k2)])

    def __call__(self, t, x, theta_hat):
        """Return (u, constraint, barrier evaluation, psi)."""
        bar = self.barrier(x)
        G, Phi = self.structure.G(x), self.structure.Phi(x)
        c = build_constraint(self.kind, x, self.structure, bar, self.gains, theta_hat)
        u = filters.qp_filter(self.nominal(t, x, theta_hat), c)
        psi = np.atleast_1d(bar.grad @ G @ Phi)
        return u, c, bar, psi

    def tracking_error(self, t, x):
        return abs(x[0] - float(self.reference(t)[0][0]))


def desired_reference_rd(q, t, qd_fn, Lambda):
    """r_d = q_d_dot(t) - Lambda (q - q_d(t))."""
    qd, qd_dot, _ = qd_fn(t)
    return qd_dot - np.asarray(Lambda) @ (np.asarray(q, dtype=float) - qd)


def slotine_li_hot(q, qdot, t, est, W, s, K, beta):
    """u = -K s + W theta_hat - (2/beta) W W^T s."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    W = np.asarray(W)
    return -np.asarray(K) @ s + W @ est.theta_hat - (2.0 / beta) * (W @ (W.T @ s))


class SlotineLiController:
    """Slotine-Li tracking of a smoothly-filtered safe reference velocity.

    ``r(q, t)`` is the desired velocity ``r_d`` passed through the smooth safety
    filter; its rate along the flow is obtained by central differences.
    """

    def __init__(self, structure, barrier, gains, qd_fn, sigma=0.1, rate_delta=1e-5,
                 normalized=True):
        for name in ("beta", "K", "Lambda", "mu", "epsilon"):
            if getattr(gains, name) is None:
                raise ConfigurationError(f"manipulator controller requires gain {name}")
        self.structure = structure
        self.barrier = barrier
        self.gains = gains
        self.qd_fn = qd_fn
        self.sigma = sigma
        self.rate_delta = rate_delta
        self.normalized = normalized

    def reference_constraint(self, q):
        g = self.gains
        bar = self.barrier(q)
        return bar, filters.reference_velocity_constraint(bar, g.alpha, g.mu, g.epsilon,
                                                           g.Gamma, g.theta_tilde_bound)

    def reference(self, q, t):
        _, c = self.reference_constraint(q)
        rd = desired_reference_rd(q, t, self.qd_fn, self.gains.Lambda)
        return filters.smooth_filter(rd, c, self.sigma, self.normalized)

    def reference_rate(self, q, qdot, t):
        return filters.reference_velocity_rate(self.reference, q, qdot, t, self.rate_delta)

    def __call__(self, t, q, qdot, theta_hat):
        """Return (u, W, s, r, reference constraint, barrier evaluation)."""
        bar, c = self.reference_constraint(q)
        rd = desired_reference_rd(q, t, self.qd_fn, self.gains.Lambda)
        r = filters.smooth_filter(rd, c, self.sigma, self.normalized)
        rdot = self.reference_rate(q, qdot, t)
        W = self.structure.Y(q, qdot, r, rdot)
        s = qdot - r
        g = self.gains
        u = -g.K @ s + W @ theta_hat - (2.0 / g.beta) * (W @ (W.T @ s))
        return u, W, s, r, c, bar

    def tracking_error(self, t, q):
        return float(np.linalg.norm(q - self.qd_fn(t)[0]))
