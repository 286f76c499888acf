"""Benchmark plants: the uncertain double integrator and a two-link arm.

The true parameter vector lives on the plant object. Controllers and tuners
are handed plant *structure* (f, G, Phi or the regressor Y) and never read
``theta_true``; only the simulator and the certificate monitors do.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SingularInertiaError(RuntimeError):
    pass


@dataclass(frozen=True)
class AffinePlant:
    """x_dot = f(x) + G(x) (u + Phi(x) theta)."""

    n: int
    m: int
    p: int
    theta_true: np.ndarray
    name: str = "affine"

    def f(self, x):
        raise NotImplementedError

    def G(self, x):
        raise NotImplementedError

    def Phi(self, x):
        raise NotImplementedError

    def dynamics(self, x, u, theta=None):
        theta = self.theta_true if theta is None else theta
        return self.f(x) + self.G(x) @ (np.atleast_1d(u) + self.Phi(x) @ theta)


class DoubleIntegrator(AffinePlant):
    """x1_dot = x2, x2_dot = theta1 x1 + theta2 x2 + u."""

    def f(self, x):
        return np.array([x[1], 0.0])

    def G(self, x):
        return np.array([[0.0], [1.0]])

    def Phi(self, x):
        return np.array([[x[0], x[1]]])


def double_integrator(theta_true=(10.0, 10.0)):
    return DoubleIntegrator(n=2, m=1, p=2, theta_true=np.asarray(theta_true, dtype=float),
                            name="double_integrator")


@dataclass(frozen=True)
class ManipulatorPlant:
    """M(q) q_ddot + C(q, q_dot) q_dot + g(q) = u, linear in theta."""

    n: int
    p: int
    theta_true: np.ndarray
    M_upper: float
    name: str = "manipulator"

    def M(self, q, theta=None):
        raise NotImplementedError

    def C(self, q, qdot, theta=None):
        raise NotImplementedError

    def g(self, q, theta=None):
        return np.zeros(self.n)

    def M_dot(self, q, qdot, theta=None):
        raise NotImplementedError

    def Y(self, q, qdot, r, rdot):
        raise NotImplementedError


class TwoLinkArm(ManipulatorPlant):
    """Planar two-link arm with theta = (p1, p2, p3) and no gravity.

    M = [[p1 + 2 p3 c2, p2 + p3 c2], [p2 + p3 c2, p2]]
    C = [[-p3 s2 qd2, -p3 s2 (qd1 + qd2)], [p3 s2 qd1, 0]]
    """

    def _theta(self, theta):
        return self.theta_true if theta is None else theta

    def M(self, q, theta=None):
        p1, p2, p3 = self._theta(theta)
        c2 = np.cos(q[1])
        m12 = p2 + p3 * c2
        return np.array([[p1 + 2.0 * p3 * c2, m12], [m12, p2]])

    def C(self, q, qdot, theta=None):
        _, _, p3 = self._theta(theta)
        s2 = np.sin(q[1])
        return np.array([[-p3 * s2 * qdot[1], -p3 * s2 * (qdot[0] + qdot[1])],
                         [p3 * s2 * qdot[0], 0.0]])

    def M_dot(self, q, qdot, theta=None):
        _, _, p3 = self._theta(theta)
        k = -p3 * np.sin(q[1]) * qdot[1]
        return np.array([[2.0 * k, k], [k, 0.0]])

    def Y(self, q, qdot, r, rdot):
        """Regressor with Y theta = M rdot + C r + g."""
        c2, s2 = np.cos(q[1]), np.sin(q[1])
        return np.array([
            [rdot[0], rdot[1],
             2.0 * c2 * rdot[0] + c2 * rdot[1] - s2 * qdot[1] * r[0] - s2 * (qdot[0] + qdot[1]) * r[1]],
            [0.0, rdot[0] + rdot[1], c2 * rdot[0] + s2 * qdot[0] * r[0]],
        ])


def two_link(theta_true=(3.473, 0.196, 0.242), M_upper=5.0):
    return TwoLinkArm(n=2, p=3, theta_true=np.asarray(theta_true, dtype=float),
                      M_upper=M_upper, name="two_link")


def lip_regressor(plant, q, qdot, r, rdot):
    return plant.Y(np.asarray(q, float), np.asarray(qdot, float),
                   np.asarray(r, float), np.asarray(rdot, float))


def manipulator_accel(plant, q, qdot, u):
    """Forward dynamics with the true parameters, via an explicit 2x2 solve."""
    M = plant.M(q)
    rhs = np.asarray(u, dtype=float) - plant.C(q, qdot) @ qdot - plant.g(q)
    if M.shape == (2, 2):
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        if abs(det) < 1e-9:
            raise SingularInertiaError(f"inertia determinant {det:.3e} at q = {q}")
        return np.array([M[1, 1] * rhs[0] - M[0, 1] * rhs[1],
                         M[0, 0] * rhs[1] - M[1, 0] * rhs[0]]) / det
    if abs(np.linalg.det(M)) < 1e-9:
        raise SingularInertiaError(f"singular inertia at q = {q}")
    return np.linalg.solve(M, rhs)


def sliding_variable(q, qdot, r):
    """s = q_dot - r."""
    return np.asarray(qdot, dtype=float) - np.asarray(r, dtype=float)
