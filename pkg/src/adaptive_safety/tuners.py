"""Parameter-estimate dynamics: gradient law, high-order tuner, projection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError, as_vector


@dataclass(frozen=True)
class ProjectionBall:
    """Ball ``|nu - center| <= radius`` with a boundary layer of relative width
    ``boundary_layer`` (the projected estimate stays within radius*sqrt(1+eps))."""

    center: np.ndarray
    radius: float
    boundary_layer: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center, "center"))
        if not self.radius > 0:
            raise ConfigurationError("projection radius must be positive")
        if not self.boundary_layer > 0:
            raise ConfigurationError("projection boundary layer must be positive")

    @property
    def outer_radius(self):
        return self.radius * np.sqrt(1.0 + self.boundary_layer)


def regressor_gradient(bar, G, Phi):
    """psi(x) = (dh/dx G Phi)^T."""
    return np.atleast_1d(bar.grad @ G @ Phi)


def gradient_update(x, bar, G, Phi, Gamma):
    """First-order law nu_dot = -Gamma psi(x)."""
    return -np.asarray(Gamma) * regressor_gradient(bar, G, Phi)


def hot_update(est, psi, Gamma, beta):
    """High-order tuner rates.

    Returns
    -------
    nu_dot : ndarray
        ``-Gamma psi``
    theta_hat_dot : ndarray
        ``beta Gamma (nu - theta_hat)``
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    Gamma = np.asarray(Gamma, dtype=float)
    nu_dot = -Gamma * as_vector(psi, "psi")
    theta_hat_dot = beta * Gamma * (est.nu - est.theta_hat)
    return nu_dot, theta_hat_dot


def hot_update_robot(est, W, s, Gamma, beta):
    """Tuner driven by the sliding variable: psi = W^T s."""
    return hot_update(est, np.asarray(W).T @ as_vector(s, "s"), Gamma, beta)


def project_rate(nu, nu_dot, ball):
    """Smooth projection of an estimator rate onto a ball.

    With p(nu) = (|nu - c|^2 - r^2) / (eps r^2), the rate is left alone inside
    the ball or when it points inward; otherwise the outward component along
    grad p is scaled down by min(1, p), which removes it entirely on the outer
    boundary p = 1.
    """
    nu = as_vector(nu, "nu")
    nu_dot = as_vector(nu_dot, "nu_dot")
    d = nu - ball.center
    r2 = ball.radius ** 2
    p = (float(d @ d) - r2) / (ball.boundary_layer * r2)
    if p <= 0:
        return nu_dot
    grad_p = 2.0 * d / (ball.boundary_layer * r2)
    outward = float(grad_p @ nu_dot)
    if outward <= 0:
        return nu_dot
    return nu_dot - min(1.0, p) * outward / float(grad_p @ grad_p) * grad_p


class GradientTuner:
    """theta_hat_dot = -Gamma psi, optionally projected.

    The simulator carries (nu, theta_hat) for every tuner; here both follow the
    same rate, so they stay identical.
    """

    order = 1

    def __init__(self, Gamma, ball=None):
        self.Gamma = np.asarray(Gamma, dtype=float)
        self.ball = ball

    def rates(self, nu, theta_hat, psi):
        nu_dot = -self.Gamma * psi
        if self.ball is not None:
            nu_dot = project_rate(theta_hat, nu_dot, self.ball)
        return nu_dot, nu_dot


class HighOrderTuner:
    """nu_dot = -Gamma psi (optionally projected), theta_hat_dot = beta Gamma (nu - theta_hat)."""

    order = 2

    def __init__(self, Gamma, beta, ball=None):
        if not beta > 0:
            raise ConfigurationError("beta must be positive")
        self.Gamma = np.asarray(Gamma, dtype=float)
        self.beta = beta
        self.ball = ball

    def rates(self, nu, theta_hat, psi):
        nu_dot = -self.Gamma * psi
        if self.ball is not None:
            nu_dot = project_rate(nu, nu_dot, self.ball)
        return nu_dot, self.beta * self.Gamma * (nu - theta_hat)
