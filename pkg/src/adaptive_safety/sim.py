"""Fixed-step integration of plant + estimator, with trace logging.

The closed-loop state is one flat vector ``z = (x, nu, theta_hat)`` where
``x = (q, q_dot)`` for the manipulator. The control input is recomputed at
every RK4 stage.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import certify
from .core import AugmentedState, EstimatorState, PlantState, TraceRecord
from .plants import manipulator_accel
from .scenario import Scenario, build

log = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e9


class SimulationError(RuntimeError):
    """A run stopped early; ``trace`` holds the records logged so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class DivergenceError(SimulationError):
    pass


# --------------------------------------------------------------------------
# right-hand sides

def affine_rhs(scn, t, z):
    """Return (z_dot, diagnostics) for a control-affine scenario."""
    x, nu, th = scn.split(z)
    u, c, bar, psi = scn.controller(t, x, th)
    x_dot = scn.plant.dynamics(x, u)
    nu_dot, th_dot = scn.tuner.rates(nu, th, psi)
    diag = (u, bar.value, c.margin(u), None, psi)
    return np.concatenate([x_dot, nu_dot, th_dot]), diag


def robot_rhs(scn, t, z):
    """Return (z_dot, diagnostics) for a manipulator scenario."""
    x, nu, th = scn.split(z)
    n = scn.plant.n
    q, qdot = x[:n], x[n:]
    u, W, s, r, c, bar = scn.controller(t, q, qdot, th)
    qddot = manipulator_accel(scn.plant, q, qdot, u)
    psi = W.T @ s
    nu_dot, th_dot = scn.tuner.rates(nu, th, psi)
    diag = (u, bar.value, c.margin(r), s, psi)
    return np.concatenate([qdot, qddot, nu_dot, th_dot]), diag


def _rhs_for(scn):
    return robot_rhs if scn.is_robot else affine_rhs


def rk4_step(rhs, t, z, dt, first=None):
    """One classical RK4 step; also returns the diagnostics of the first stage.

    ``first`` may carry a precomputed ``rhs(t, z)``.
    """
    k1, diag = rhs(t, z) if first is None else first
    k2, _ = rhs(t + 0.5 * dt, z + 0.5 * dt * k1)
    k3, _ = rhs(t + 0.5 * dt, z + 0.5 * dt * k2)
    k4, _ = rhs(t + dt, z + dt * k3)
    return z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), diag


def euler_step(rhs, t, z, dt):
    k1, diag = rhs(t, z)
    return z + dt * k1, diag


def refined_rk4_step(rhs, t, z, dt, tol, max_refine, first=None):
    """RK4 over ``[t, t + dt]`` with step-doubling refinement.

    One full step is compared with two half steps; when they disagree by more
    than ``tol * (1 + |z|_inf)`` each half is refined again, down to
    ``dt / 2**max_refine``. The two-half-step result is returned. This keeps the
    logged grid uniform while resolving stiff stretches of the closed loop.
    """
    first = rhs(t, z) if first is None else first
    diag = first[1]
    full, _ = rk4_step(rhs, t, z, dt, first)
    half, _ = rk4_step(rhs, t, z, 0.5 * dt, first)
    mid = t + 0.5 * dt
    end, _ = rk4_step(rhs, mid, half, 0.5 * dt)
    err = np.max(np.abs(end - full)) if np.all(np.isfinite(end)) else np.inf
    if err <= tol * (1.0 + np.max(np.abs(z))) or max_refine == 0:
        return end, diag
    half, _ = refined_rk4_step(rhs, t, z, 0.5 * dt, tol, max_refine - 1, first)
    _check_finite(half, mid)
    end, _ = refined_rk4_step(rhs, mid, half, 0.5 * dt, tol, max_refine - 1)
    return end, diag


_STEPPERS = {"rk4": rk4_step, "euler": euler_step}


def _stepper(sim):
    if sim.integrator == "rk4" and sim.step_tol > 0:
        return lambda rhs, t, z, dt: refined_rk4_step(rhs, t, z, dt, sim.step_tol, sim.max_refine)
    return _STEPPERS[sim.integrator]


def _pack(scn, z):
    x, nu, th = scn.split(z)
    return x.copy(), nu.copy(), th.copy()


def _step_augmented(scn, rhs, zs, t, dt):
    x = zs.plant.x
    z = np.concatenate([x, zs.est.nu, zs.est.theta_hat])
    z_new, _ = _stepper(scn.config.sim)(lambda tt, zz: rhs(scn, tt, zz), t, z, dt)
    _check_finite(z_new, t + dt)
    x_new, nu, th = _pack(scn, z_new)
    return AugmentedState(PlantState(x_new, t + dt), EstimatorState(nu, th))


def step_affine(z, scn, dt):
    """Advance a control-affine AugmentedState by one step of the scenario's integrator."""
    return _step_augmented(scn, affine_rhs, z, z.plant.t, dt)


def step_robot(z, scn, dt):
    """Advance a manipulator AugmentedState by one step of the scenario's integrator."""
    return _step_augmented(scn, robot_rhs, z, z.plant.t, dt)


def _check_finite(z, t):
    if not np.all(np.isfinite(z)) or np.max(np.abs(z)) > DIVERGENCE_LIMIT:
        raise DivergenceError(f"state diverged at t = {t:.6g}")


# --------------------------------------------------------------------------
# traces

@dataclass
class Trace:
    """Column-oriented run log. Row k is the state at ``t[k]`` and the input
    applied there."""

    robot: bool
    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    nu: np.ndarray
    theta_hat: np.ndarray
    h: np.ndarray
    constraint_margin: np.ndarray
    psi: np.ndarray
    s: Optional[np.ndarray] = None
    h_a: Optional[np.ndarray] = None
    V: Optional[np.ndarray] = None
    B: Optional[np.ndarray] = None
    tracking_error: Optional[np.ndarray] = None
    summary: dict = field(default_factory=dict)

    def __len__(self):
        return self.t.size

    def records(self):
        for k in range(len(self)):
            yield TraceRecord(
                t=float(self.t[k]), x=self.x[k], u=self.u[k], nu=self.nu[k],
                theta_hat=self.theta_hat[k], h=float(self.h[k]),
                constraint_margin=float(self.constraint_margin[k]),
                h_a=None if self.h_a is None else float(self.h_a[k]),
                V=None if self.V is None else float(self.V[k]),
                B=None if self.B is None else float(self.B[k]),
                s=None if self.s is None else self.s[k])

    def header(self):
        n = self.x.shape[1]
        if self.robot:
            half = n // 2
            cols = [f"q_{i + 1}" for i in range(half)] + [f"qd_{i + 1}" for i in range(half)]
        else:
            cols = [f"x_{i + 1}" for i in range(n)]
        cols += [f"u_{i + 1}" for i in range(self.u.shape[1])]
        cols += [f"nu_{i + 1}" for i in range(self.nu.shape[1])]
        cols += [f"theta_hat_{i + 1}" for i in range(self.theta_hat.shape[1])]
        cols.append("h")
        if self.robot:
            cols += ["V", "B"] + [f"s_{i + 1}" for i in range(self.s.shape[1])]
        else:
            cols.append("h_a")
        cols.append("constraint_margin")
        return ["t"] + cols

    def table(self):
        parts = [self.t[:, None], self.x, self.u, self.nu, self.theta_hat, self.h[:, None]]
        if self.robot:
            parts += [self.V[:, None], self.B[:, None], self.s]
        else:
            parts.append(self.h_a[:, None])
        parts.append(self.constraint_margin[:, None])
        return np.hstack(parts)

    def fingerprint(self):
        """Hash of every logged column, used to check that monitors are read-only."""
        import hashlib
        hsh = hashlib.sha256()
        for arr in (self.t, self.x, self.u, self.nu, self.theta_hat, self.h,
                    self.constraint_margin, self.h_a, self.V, self.B, self.s):
            if arr is not None:
                hsh.update(np.ascontiguousarray(arr).tobytes())
        return hsh.hexdigest()


def _assemble(scn, times, zs, diags, errs):
    cfg = scn.config
    zs = np.array(zs)
    nx = 2 * scn.plant.n if scn.is_robot else scn.plant.n
    p = scn.plant.p
    u = np.array([np.atleast_1d(d[0]) for d in diags])
    trace = Trace(
        robot=scn.is_robot,
        t=np.array(times),
        x=zs[:, :nx], nu=zs[:, nx:nx + p], theta_hat=zs[:, nx + p:],
        u=u,
        h=np.array([d[1] for d in diags]),
        constraint_margin=np.array([d[2] for d in diags]),
        psi=np.array([d[4] for d in diags]),
        tracking_error=np.array(errs),
    )
    theta = scn.plant.theta_true
    Gamma = scn.gains.Gamma
    if scn.is_robot:
        trace.s = np.array([d[3] for d in diags])
        n = scn.plant.n
        trace.V = np.array([certify.lyapunov_like(scn.plant.M(z[:n]), s, theta, nu, th, Gamma)
                            for z, s, nu, th in zip(zs, trace.s, trace.nu, trace.theta_hat)])
        trace.B = trace.h - trace.V / scn.gains.mu
    else:
        trace.h_a = np.array([certify.augmented_barrier(h, theta, nu, th, Gamma)
                              for h, nu, th in zip(trace.h, trace.nu, trace.theta_hat)])
    trace.summary = summarize(trace, cfg)
    return trace


def summarize(trace, cfg=None):
    out = {"n_records": len(trace)}
    if len(trace) == 0:
        return out
    out["min_h"] = float(np.min(trace.h))
    if trace.robot:
        out["min_B"] = float(np.min(trace.B))
        half = trace.x.shape[1] // 2
        out["max_abs_q"] = float(np.max(np.abs(trace.x[:, :half])))
    else:
        out["min_h_a"] = float(np.min(trace.h_a))
        out["max_abs_x1"] = float(np.max(np.abs(trace.x[:, 0])))
    out.update(certify.effort_metrics(trace))
    out["final_tracking_error"] = float(trace.tracking_error[-1])
    out["final_time"] = float(trace.t[-1])
    return out


def run(scenario):
    """Integrate a scenario over its horizon.

    Parameters
    ----------
    scenario : ScenarioConfig or Scenario

    Returns
    -------
    Trace
        With ``trace.summary`` filled in.

    Raises
    ------
    SimulationError
        On divergence, infeasible filter rows or singular inertia. The partial
        trace is attached as ``exc.trace``.
    """
    scn = scenario if isinstance(scenario, Scenario) else build(scenario)
    cfg = scn.config
    sim = cfg.sim
    rhs_fn = _rhs_for(scn)
    rhs = lambda t, z: rhs_fn(scn, t, z)
    step = _stepper(sim)
    dt = sim.dt
    n_steps = sim.n_steps
    n = scn.plant.n

    def err_at(t, z):
        x = scn.split(z)[0]
        return scn.controller.tracking_error(t, x[:n] if scn.is_robot else x)

    times, zs, diags, errs = [], [], [], []
    z = scn.z0.copy()
    try:
        for k in range(n_steps):
            t = k * dt
            z_new, diag = step(rhs, t, z, dt)
            if k % sim.log_stride == 0:
                times.append(t)
                zs.append(z.copy())
                diags.append(diag)
                errs.append(err_at(t, z))
            _check_finite(z_new, t + dt)
            z = z_new
        if n_steps % sim.log_stride == 0:
            t = n_steps * dt
            _, diag = rhs(t, z)
            times.append(t)
            zs.append(z.copy())
            diags.append(diag)
            errs.append(err_at(t, z))
    except Exception as exc:
        partial = _assemble(scn, times, zs, diags, errs) if times else None
        if isinstance(exc, SimulationError):
            exc.trace = partial
            raise
        raise SimulationError(f"{type(exc).__name__}: {exc}", partial) from exc
    return _assemble(scn, times, zs, diags, errs)
