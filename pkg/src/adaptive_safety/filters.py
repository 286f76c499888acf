"""Single-constraint safety filters and the constraint builders.

Every filter here solves (exactly or smoothly)

    min 0.5 |u - kd|^2   s.t.   a . u >= b

for one affine constraint, so no QP solver is involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_vector


class InfeasibleConstraintError(RuntimeError):
    """Raised for a constraint row with a = 0 and b > 0."""


@dataclass(frozen=True)
class HalfSpaceConstraint:
    """Admissible inputs satisfy ``a . u >= b``."""

    a: np.ndarray
    b: float

    def margin(self, u):
        return float(self.a @ as_vector(u)) - self.b


def qp_filter(kd, c):
    """Closed-form minimizer of 0.5|u - kd|^2 subject to a.u >= b.

    u = kd + max(0, b - a.kd) / (a.a) * a
    """
    kd = as_vector(kd, "kd")
    a = c.a
    aa = float(a @ a)
    if aa == 0.0:
        if c.b > 0:
            raise InfeasibleConstraintError(
                f"constraint row vanishes (a = 0) but requires b = {c.b:.6g} > 0")
        return kd.copy()
    viol = c.b - float(a @ kd)
    if viol <= 0:
        return kd.copy()
    return kd + (viol / aa) * a


def softplus(z):
    # log(1 + e^z) without overflow for large z
    return np.logaddexp(0.0, z)


def smooth_filter(kd, c, sigma, normalized=False):
    """Smooth variant of :func:`qp_filter`.

    The hinge ``max(0, b - a.kd)`` is replaced by ``sigma * softplus((b - a.kd)/sigma)``,
    which makes the output smooth in (kd, a, b) and leaves a strictly positive
    margin ``a.u - b = sigma * softplus((a.kd - b)/sigma)``.

    That form is singular as ``a -> 0``: the gain stays positive while the
    correction ``lam a / |a|^2`` grows like ``1/|a|``. With ``normalized=True``
    the softplus acts on the signed distance to the half-space instead,
    ``lam = sigma |a| softplus((b - a.kd) / (sigma |a|))``, so the correction
    vanishes smoothly when the row fades out with ``b < 0``. Both forms tend to
    :func:`qp_filter` as ``sigma -> 0``.

    When ``a = 0`` the correction direction is undefined; the constraint is then
    satisfied by ``kd`` itself if ``b <= 0`` and is infeasible otherwise.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    kd = as_vector(kd, "kd")
    a = c.a
    aa = float(a @ a)
    if aa == 0.0:
        if c.b > 0:
            raise InfeasibleConstraintError(
                f"constraint row vanishes (a = 0) but requires b = {c.b:.6g} > 0")
        return kd.copy()
    scale = sigma * np.sqrt(aa) if normalized else sigma
    lam = scale * float(softplus((c.b - float(a @ kd)) / scale))
    return kd + (lam / aa) * a


def barrier_rate_terms(bar, f, G, Phi, theta_hat):
    """Return (a, drift) with a = (dh/dx G)^T and drift = dh/dx (f + G Phi theta_hat),
    plus psi = (dh/dx G Phi)^T."""
    LgH = bar.grad @ G
    psi = LgH @ Phi
    drift = float(bar.grad @ f) + float(psi @ theta_hat)
    return np.atleast_1d(LgH), drift, np.atleast_1d(psi)


def build_acbf_constraint(x, f, G, Phi, bar, theta_hat):
    """Row for dh/dx (f + G(u + Phi theta_hat)) >= 0."""
    a, drift, _ = barrier_rate_terms(bar, f, G, Phi, theta_hat)
    return HalfSpaceConstraint(a, -drift)


def build_racbf_constraint(x, f, G, Phi, bar, alpha, Gamma, theta_tilde_bound, theta_hat):
    """Row for dh/dx (f + G(u + Phi theta_hat)) >= -alpha (h - w).

    ``w`` is the worst case of 0.5 v^T Gamma^{-1} v over |v| <= theta_tilde_bound,
    i.e. 0.5 * theta_tilde_bound^2 / min(Gamma).
    """
    a, drift, _ = barrier_rate_terms(bar, f, G, Phi, theta_hat)
    w = 0.5 * theta_tilde_bound ** 2 / float(np.min(Gamma))
    return HalfSpaceConstraint(a, -drift - alpha * (bar.value - w))


def build_tracbf_constraint(x, f, G, Phi, bar, alpha, Gamma, beta, theta_tilde_bound, theta_hat):
    """RaCBF row tightened by the tuner-lag margin (2/beta) |psi|^2."""
    a, drift, psi = barrier_rate_terms(bar, f, G, Phi, theta_hat)
    w = 0.5 * theta_tilde_bound ** 2 / float(np.min(Gamma))
    b = -drift - alpha * (bar.value - w) + (2.0 / beta) * float(psi @ psi)
    return HalfSpaceConstraint(a, b)


def reference_velocity_constraint(bar, alpha, mu, epsilon, Gamma, theta_tilde_bound):
    """Constraint on a reference velocity r:

        dh/dq r >= -alpha (h - w / mu) + |dh/dq|^2 / epsilon
    """
    w = 0.5 * theta_tilde_bound ** 2 / float(np.min(Gamma))
    g = bar.grad
    return HalfSpaceConstraint(g, -alpha * (bar.value - w / mu) + float(g @ g) / epsilon)


def safe_reference_velocity(q, t, bar, rd, alpha, mu, epsilon, Gamma, theta_tilde_bound, sigma,
                            normalized=True):
    """Smoothly filter the desired velocity ``rd`` into a safe reference velocity.

    The distance-normalized softplus is the default because dh/dq vanishes at
    the centre of a symmetric safe set (see :func:`smooth_filter`).
    """
    c = reference_velocity_constraint(bar, alpha, mu, epsilon, Gamma, theta_tilde_bound)
    return smooth_filter(rd, c, sigma, normalized=normalized)


def reference_velocity_rate(r_fn, q, qdot, t, delta=1e-5):
    """Time derivative of ``r(q(t), t)`` along the flow, by central differences.

    rdot = [r(q + delta qdot, t + delta) - r(q - delta qdot, t - delta)] / (2 delta)
    """
    q = as_vector(q, "q")
    qdot = as_vector(qdot, "qdot")
    rp = r_fn(q + delta * qdot, t + delta)
    rm = r_fn(q - delta * qdot, t - delta)
    return (rp - rm) / (2.0 * delta)
