import math

import numpy as np
import pytest

from adaptive_safety import build, load_scenario
from adaptive_safety.controllers import (ControllerKind, backstepping_nominal, build_constraint,
                                         desired_reference_rd, sinusoid, slotine_li_hot)
from adaptive_safety.core import ConfigurationError, EstimatorState
from adaptive_safety.certify import lyapunov_rate_analytic
from adaptive_safety.plants import manipulator_accel


def test_controller_kind_flags():
    assert ControllerKind("tracbf").uses_hot and ControllerKind("tracbf").is_affine
    assert not ControllerKind("racbf").uses_hot
    assert ControllerKind("slotine_li_hot").uses_hot
    assert not ControllerKind("slotine_li_hot").is_affine


def test_sinusoid_derivatives():
    fn = sinusoid(1.5, 2.0, 1)
    t, h = 0.37, 1e-5
    q, qd, qdd = fn(t)
    assert qd[0] == pytest.approx((fn(t + h)[0][0] - fn(t - h)[0][0]) / (2 * h), abs=1e-8)
    assert qdd[0] == pytest.approx((fn(t + h)[1][0] - fn(t - h)[1][0]) / (2 * h), abs=1e-8)


def test_backstepping_tracks_with_true_parameters():
    theta = np.array([10.0, 10.0])
    ref = sinusoid(1.5, 2.0, 1)
    x, dt = np.array([0.75, 0.0]), 1e-3

    def f(t, x):
        d = [float(v[0]) for v in ref(t)]
        u = backstepping_nominal(x, theta, *d)
        return np.array([x[1], u + theta @ x])

    t = 0.0
    for _ in range(8000):
        k1 = f(t, x)
        k2 = f(t + dt / 2, x + dt / 2 * k1)
        k3 = f(t + dt / 2, x + dt / 2 * k2)
        k4 = f(t + dt, x + dt * k3)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
    assert abs(x[0] - ref(t)[0][0]) < 1e-4


def test_affine_controller_respects_constraint(rng):
    scn = build(load_scenario("di_tracbf"))
    for _ in range(200):
        x = rng.uniform(-1, 1, 2)
        th = rng.uniform(-10, 10, 2)
        t = rng.uniform(0, 10)
        u, c, bar, psi = scn.controller(t, x, th)
        assert c.margin(u) >= -1e-9 * max(1.0, abs(c.b))
        kd = scn.controller.nominal(t, x, th)
        if c.margin(kd) >= 0:
            np.testing.assert_array_equal(u, kd)
        np.testing.assert_allclose(psi, bar.grad[1] * x)


def test_build_constraint_rejects_robot_kind():
    scn = build(load_scenario("di_tracbf"))
    with pytest.raises(ConfigurationError):
        build_constraint(ControllerKind.SLOTINE_LI_HOT, np.zeros(2), scn.controller.structure,
                         scn.barrier(np.zeros(2)), scn.gains, np.zeros(2))


def test_slotine_li_law():
    W = np.array([[1.0, 0.0, 2.0], [0.0, 1.0, -1.0]])
    s = np.array([0.1, -0.2])
    est = EstimatorState(np.zeros(3), np.array([1.0, 2.0, 3.0]))
    K = 50 * np.eye(2)
    u = slotine_li_hot(None, None, 0.0, est, W, s, K, 0.25)
    np.testing.assert_allclose(u, -K @ s + W @ est.theta_hat - 8.0 * W @ W.T @ s)


def test_reference_is_desired_velocity_when_far_from_limits():
    scn = build(load_scenario("two_link"))
    ctrl = scn.controller
    q, t = np.zeros(2), 0.0
    rd = desired_reference_rd(q, t, ctrl.qd_fn, scn.gains.Lambda)
    np.testing.assert_allclose(rd, [math.pi / 2, math.pi / 2])
    np.testing.assert_allclose(ctrl.reference(q, t), rd, atol=1e-12)
    # away from the limits the rate is the analytic rate of r_d
    q, qdot, t = np.array([0.1, -0.05]), np.array([0.3, 0.2]), 0.4
    qd, qd_dot, qd_ddot = ctrl.qd_fn(t)
    exact = qd_ddot - scn.gains.Lambda @ (qdot - qd_dot)
    np.testing.assert_allclose(ctrl.reference_rate(q, qdot, t), exact, atol=1e-8)


def test_reference_is_safe(rng):
    scn = build(load_scenario("two_link"))
    for _ in range(200):
        q = rng.uniform(-0.6, 0.6, 2)
        t = rng.uniform(0, 10)
        bar, c = scn.controller.reference_constraint(q)
        assert c.margin(scn.controller.reference(q, t)) >= 0


def test_lyapunov_rate_matches_closed_loop(rng):
    """Chain-rule dV/dt from the closed-loop right side against the analytic form."""
    scn = build(load_scenario("two_link"))
    arm, g = scn.plant, scn.gains
    theta = arm.theta_true
    for _ in range(50):
        q = rng.uniform(-0.4, 0.4, 2)
        qdot = rng.uniform(-1, 1, 2)
        nu, th = rng.uniform(-5, 5, 3), rng.uniform(-5, 5, 3)
        t = rng.uniform(0, 10)
        u, W, s, r, c, bar = scn.controller(t, q, qdot, th)
        rdot = scn.controller.reference_rate(q, qdot, t)
        qdd = manipulator_accel(arm, q, qdot, u)
        nu_dot, th_dot = scn.tuner.rates(nu, th, W.T @ s)
        Vdot = (s @ arm.M(q) @ (qdd - rdot) + 0.5 * s @ arm.M_dot(q, qdot) @ s
                - (theta - nu) @ (nu_dot / g.Gamma) + (nu - th) @ ((nu_dot - th_dot) / g.Gamma))
        expected = lyapunov_rate_analytic(s, W.T @ s, nu, th, g.K, g.beta)
        assert Vdot == pytest.approx(expected, abs=1e-6 * max(1.0, abs(expected)))
