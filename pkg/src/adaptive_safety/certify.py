"""Pre-run gain/start checks and along-trajectory certificate monitors.

The monitors read the true parameters from the plant on purpose: the
augmented barrier, the Lyapunov-like function and B all depend on them.
None of this feeds back into the controllers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import min_eigen_diag, weighted_quadratic


@dataclass(frozen=True)
class Check:
    """One inequality ``lhs >= rhs`` (or ``<=`` when ``sense == "<="``)."""

    name: str
    lhs: float
    rhs: float
    sense: str = ">="

    @property
    def satisfied(self):
        if self.sense == ">=":
            return bool(self.lhs >= self.rhs)
        return bool(self.lhs <= self.rhs)

    def line(self):
        status = "PASS" if self.satisfied else "FAIL"
        return f"{self.name}, {self.lhs:.10g}, {self.sense} {self.rhs:.10g}, {status}"


@dataclass
class ConditionReport:
    entries: list = field(default_factory=list)

    def add(self, name, lhs, rhs, sense=">="):
        self.entries.append(Check(name, float(lhs), float(rhs), sense))

    @property
    def passed(self):
        return all(e.satisfied for e in self.entries)

    @property
    def failed(self):
        return [e for e in self.entries if not e.satisfied]

    def __getitem__(self, name):
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def __contains__(self, name):
        return any(e.name == name for e in self.entries)

    def lines(self):
        return [e.line() for e in self.entries]

    def text(self):
        return "\n".join(self.lines()) + "\n"


MonitorReport = ConditionReport


# --------------------------------------------------------------------------
# certificate functions

def augmented_barrier(h, theta, nu, theta_hat, Gamma):
    """h - 0.5 (theta-nu)^T Gamma^-1 (theta-nu) - 0.5 (nu-theta_hat)^T Gamma^-1 (nu-theta_hat).

    With nu == theta_hat this is the single-estimate form h - 0.5 (theta-theta_hat)^T Gamma^-1 (.).
    """
    return h - weighted_quadratic(theta - nu, Gamma) - weighted_quadratic(nu - theta_hat, Gamma)


def lyapunov_like(M, s, theta, nu, theta_hat, Gamma):
    """V = 0.5 (s^T M s + (theta-nu)^T Gamma^-1 (theta-nu) + (nu-theta_hat)^T Gamma^-1 (nu-theta_hat))."""
    return (0.5 * float(s @ M @ s) + weighted_quadratic(theta - nu, Gamma)
            + weighted_quadratic(nu - theta_hat, Gamma))


def lyapunov_rate_bound(s, nu, theta_hat, K, beta):
    """-lambda_min(K) |s|^2 - (beta/2) |nu - theta_hat|^2."""
    nt = nu - theta_hat
    return -float(np.min(np.linalg.eigvalsh(K))) * float(s @ s) - 0.5 * beta * float(nt @ nt)


def lyapunov_rate_analytic(s, psi, nu, theta_hat, K, beta):
    """Closed-loop dV/dt for the tuner-compensated Slotine-Li law:

        -s^T K s - (2/beta)|W^T s|^2 - beta |nu~|^2 - 2 nu~^T W^T s,   psi = W^T s.
    """
    nt = nu - theta_hat
    return (-float(s @ K @ s) - (2.0 / beta) * float(psi @ psi)
            - beta * float(nt @ nt) - 2.0 * float(nt @ psi))


# --------------------------------------------------------------------------
# pre-run checks

def check_conditions(scenario):
    """Evaluate every applicable sufficient condition for a scenario.

    Accepts a ScenarioConfig or an assembled Scenario. Entry names:

    ``start_estimate``
        h(x0) >= |theta - theta_hat0|^2 / (2 lambda_min(Gamma)) (uses nu0 for tuners)
    ``start_bound``
        h(x0) >= |theta_tilde|^2 / (2 lambda_min(Gamma)) for the high-order tuner
    ``tuner_init``
        |nu0 - theta_hat0| <= 0 for the high-order tuner
    ``beta_gain``
        beta >= alpha / lambda_min(Gamma)
    ``tracking_gain``
        lambda_min(K) >= max(epsilon mu / 2, alpha M_upper)
    ``robot_start``
        h(q0) >= M_upper |s0|^2 / (2 mu) + |theta_tilde|^2 / (2 mu lambda_min(Gamma))
    """
    from .controllers import ControllerKind
    from .scenario import Scenario, build

    scn = scenario if isinstance(scenario, Scenario) else build(scenario)
    cfg = scn.config
    g = scn.gains
    lam_g = min_eigen_diag(g.Gamma)
    theta = scn.plant.theta_true
    nu0 = np.asarray(cfg.nu_init, dtype=float)
    th0 = np.asarray(cfg.theta_hat0, dtype=float)
    rep = ConditionReport()
    kind = cfg.controller

    if not scn.is_robot:
        x0 = np.asarray(cfg.x0, dtype=float)
        h0 = scn.barrier(x0).value
        est0 = nu0 if kind.uses_hot else th0
        rep.add("start_estimate", h0, float(np.sum((theta - est0) ** 2)) / (2.0 * lam_g))
        if kind is ControllerKind.TRACBF:
            rep.add("start_bound", h0, g.theta_tilde_bound ** 2 / (2.0 * lam_g))
            rep.add("tuner_init", float(np.linalg.norm(nu0 - th0)), 0.0, "<=")
            rep.add("beta_gain", g.beta, g.alpha / lam_g)
        return rep

    n = scn.plant.n
    q0, qdot0 = np.asarray(cfg.x0[:n], float), np.asarray(cfg.x0[n:], float)
    h0 = scn.barrier(q0).value
    s0 = qdot0 - scn.controller.reference(q0, 0.0)
    rep.add("tuner_init", float(np.linalg.norm(nu0 - th0)), 0.0, "<=")
    rep.add("beta_gain", g.beta, g.alpha / lam_g)
    lam_k = float(np.min(np.linalg.eigvalsh(g.K)))
    rep.add("tracking_gain", lam_k, max(g.epsilon * g.mu / 2.0, g.alpha * scn.plant.M_upper))
    rep.add("robot_start", h0,
            scn.plant.M_upper * float(s0 @ s0) / (2.0 * g.mu)
            + g.theta_tilde_bound ** 2 / (2.0 * g.mu * lam_g))
    return rep


# --------------------------------------------------------------------------
# along-trajectory monitors

def _steps(trace):
    return np.diff(trace.t)


def monitor_affine(trace, plant, gains, kind=None, tol=1e-6, tol_g=1e-5):
    """Invariance monitor for control-affine runs.

    Recomputes the augmented barrier from the logged (x, nu, theta_hat) and
    checks ``h_a >= -tol`` and the one-step bound
    ``h_a(t+dt) >= h_a(t) exp(-alpha dt) - tol_g`` (rate 0 for the aCBF,
    whose guarantee is h_a non-decreasing).
    """
    from .controllers import ControllerKind

    theta = plant.theta_true
    if kind is not None and not ControllerKind(kind).uses_hot:
        # single-estimate form
        h_a = np.array([h - weighted_quadratic(theta - th, gains.Gamma)
                        for h, th in zip(trace.h, trace.theta_hat)])
    else:
        h_a = np.array([augmented_barrier(h, theta, nu, th, gains.Gamma)
                        for h, nu, th in zip(trace.h, trace.nu, trace.theta_hat)])
    rate = 0.0 if kind is not None and ControllerKind(kind) is ControllerKind.ACBF else gains.alpha
    rep = ConditionReport()
    rep.add("h_a_nonnegative", np.min(h_a), -tol)
    rep.add("h_nonnegative", np.min(trace.h), -tol)
    if len(h_a) > 1:
        slack = h_a[1:] - h_a[:-1] * np.exp(-rate * _steps(trace))
        rep.add("h_a_gronwall", np.min(slack), -tol_g)
    rep.add("filter_margin", np.min(trace.constraint_margin), -1e-10)
    return rep


def monitor_robot(trace, plant, gains, tol=1e-6, tol_g=1e-5, tol_v=1e-4, decrease_tol=1e-3,
                  min_fraction=0.999, end_s=0.05, end_nu=0.05):
    """Certificate monitor for manipulator runs.

    Checks, in order: B >= -tol; V non-increasing between records up to
    ``tol_v * max(1, V)``; the central-difference decrease
    ``dV/dt <= -lambda_min(K)|s|^2 - (beta/2)|nu~|^2 + decrease_tol*max(1,V)`` at no
    less than ``min_fraction`` of interior points; the one-step exponential
    bound on B; and end-of-run thresholds on |s| and |nu - theta_hat|.
    """
    theta = plant.theta_true
    n = plant.n
    V = np.array([lyapunov_like(plant.M(x[:n]), s, theta, nu, th, gains.Gamma)
                  for x, s, nu, th in zip(trace.x, trace.s, trace.nu, trace.theta_hat)])
    B = trace.h - V / gains.mu
    rep = ConditionReport()
    rep.add("B_nonnegative", np.min(B), -tol)
    if len(V) > 1:
        rise = V[1:] - V[:-1] - tol_v * np.maximum(1.0, V[:-1])
        rep.add("V_nonincreasing", np.max(rise), 0.0, "<=")
        rep.add("B_gronwall", np.min(B[1:] - B[:-1] * np.exp(-gains.alpha * _steps(trace))), -tol_g)
    if len(V) > 2:
        frac = decrease_fraction(trace, V, gains, decrease_tol)
        rep.add("decrease_fraction", frac, min_fraction)
    rep.add("end_sliding_norm", float(np.linalg.norm(trace.s[-1])), end_s, "<=")
    rep.add("end_tuner_gap", float(np.linalg.norm(trace.nu[-1] - trace.theta_hat[-1])), end_nu, "<=")
    return rep


def central_difference(values, t):
    """Derivative at interior points (values[k+1] - values[k-1]) / (t[k+1] - t[k-1])."""
    return (values[2:] - values[:-2]) / (t[2:] - t[:-2])


def decrease_fraction(trace, V, gains, tol=1e-3):
    Vdot = central_difference(V, trace.t)
    bound = np.array([lyapunov_rate_bound(s, nu, th, gains.K, gains.beta)
                      for s, nu, th in zip(trace.s[1:-1], trace.nu[1:-1], trace.theta_hat[1:-1])])
    ok = Vdot <= bound + tol * np.maximum(1.0, V[1:-1])
    return float(np.mean(ok))


def effort_metrics(trace):
    """Input effort over the logged grid.

    Returns
    -------
    dict
        ``l2_effort`` (trapezoid integral of |u|^2), ``max_abs_u`` (largest |u|)
        and ``smoothness`` (sum of |delta u / delta t|^2 delta t).
    """
    t = trace.t
    u = np.atleast_2d(trace.u)
    sq = np.sum(u * u, axis=1)
    if len(t) < 2:
        return {"l2_effort": 0.0, "max_abs_u": float(np.sqrt(sq.max())) if len(sq) else 0.0,
                "smoothness": 0.0}
    dt = np.diff(t)
    l2 = float(np.sum(0.5 * (sq[1:] + sq[:-1]) * dt))
    du = np.diff(u, axis=0) / dt[:, None]
    smooth = float(np.sum(np.sum(du * du, axis=1) * dt))
    return {"l2_effort": l2, "max_abs_u": float(np.sqrt(sq.max())), "smoothness": smooth}
