"""Small fixed-dimension value types shared by every module.

All vectors are 1-D float arrays. Dimensions are tiny (n, p <= 8), so the
types are plain frozen dataclasses and nothing here is optimized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

MAX_DIM = 8


class ConfigurationError(ValueError):
    """Invalid or inconsistent scenario / gain configuration."""


def as_vector(v, name="vector"):
    out = np.atleast_1d(np.asarray(v, dtype=float))
    if out.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {out.shape}")
    return out


def _check_dim(k, name):
    if k > MAX_DIM:
        raise ConfigurationError(f"{name} dimension {k} exceeds supported maximum {MAX_DIM}")


def weighted_quadratic(v, Gamma):
    """Return 0.5 * v^T Gamma^{-1} v for a diagonal gain.

    Parameters
    ----------
    v : array_like, shape (p,)
    Gamma : array_like, shape (p,)
        Diagonal entries of the adaptation gain, all positive.
    """
    v = as_vector(v, "v")
    Gamma = as_vector(Gamma, "Gamma")
    if v.shape != Gamma.shape:
        raise ValueError(f"dimension mismatch: v has {v.size} entries, Gamma has {Gamma.size}")
    if np.any(Gamma <= 0):
        raise ValueError("Gamma diagonal entries must be positive")
    return 0.5 * float(np.sum(v * v / Gamma))


def min_eigen_diag(Gamma):
    """Smallest eigenvalue of a diagonal matrix given by its diagonal."""
    return float(np.min(as_vector(Gamma, "Gamma")))


@dataclass(frozen=True)
class PlantState:
    x: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        x = as_vector(self.x, "x")
        _check_dim(x.size, "state")
        if not np.all(np.isfinite(x)):
            raise ValueError("plant state has non-finite entries")
        object.__setattr__(self, "x", x)


@dataclass(frozen=True)
class EstimatorState:
    """Intermediate estimate ``nu`` and the filtered estimate ``theta_hat``."""

    nu: np.ndarray
    theta_hat: np.ndarray

    def __post_init__(self):
        nu = as_vector(self.nu, "nu")
        th = as_vector(self.theta_hat, "theta_hat")
        if nu.shape != th.shape:
            raise ValueError("nu and theta_hat must have the same dimension")
        _check_dim(nu.size, "parameter")
        if not (np.all(np.isfinite(nu)) and np.all(np.isfinite(th))):
            raise ValueError("estimator state has non-finite entries")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "theta_hat", th)

    @property
    def p(self):
        return self.nu.size


@dataclass(frozen=True)
class AugmentedState:
    plant: PlantState
    est: EstimatorState


def _spd(A, name):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] != A.shape[1]:
        raise ConfigurationError(f"{name} must be square")
    if not np.allclose(A, A.T):
        raise ConfigurationError(f"{name} must be symmetric")
    if np.min(np.linalg.eigvalsh(A)) <= 0:
        raise ConfigurationError(f"{name} must be positive definite")
    return A


@dataclass(frozen=True)
class GainSet:
    """Adaptation, safety and tracking gains.

    ``Gamma`` is stored as its diagonal. ``K`` and ``Lambda`` are only used by
    the manipulator controller and may be left as ``None`` elsewhere.
    """

    Gamma: np.ndarray
    alpha: float
    theta_tilde_bound: float
    beta: Optional[float] = None
    K: Optional[np.ndarray] = None
    Lambda: Optional[np.ndarray] = None
    mu: Optional[float] = None
    epsilon: Optional[float] = None

    def __post_init__(self):
        Gamma = as_vector(self.Gamma, "Gamma")
        if np.any(Gamma <= 0):
            raise ConfigurationError("Gamma diagonal entries must be positive")
        _check_dim(Gamma.size, "parameter")
        object.__setattr__(self, "Gamma", Gamma)
        if self.alpha <= 0:
            raise ConfigurationError("alpha must be positive")
        if self.theta_tilde_bound < 0:
            raise ConfigurationError("theta_tilde_bound must be nonnegative")
        for name in ("beta", "mu", "epsilon"):
            val = getattr(self, name)
            if val is not None and val <= 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.K is not None:
            object.__setattr__(self, "K", _spd(self.K, "K"))
        if self.Lambda is not None:
            object.__setattr__(self, "Lambda", _spd(self.Lambda, "Lambda"))

    @property
    def gamma_min(self):
        return min_eigen_diag(self.Gamma)

    def worst_case_quadratic(self):
        """0.5 * |theta_tilde_bound|^2 / lambda_min(Gamma), the largest value of
        0.5 v^T Gamma^{-1} v over |v| <= theta_tilde_bound."""
        return 0.5 * self.theta_tilde_bound ** 2 / self.gamma_min


@dataclass
class TraceRecord:
    t: float
    x: np.ndarray
    u: np.ndarray
    nu: np.ndarray
    theta_hat: np.ndarray
    h: float
    constraint_margin: float
    h_a: Optional[float] = None
    V: Optional[float] = None
    B: Optional[float] = None
    s: Optional[np.ndarray] = field(default=None)
