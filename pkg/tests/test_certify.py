import math

import numpy as np
import pytest

from adaptive_safety import build, load_scenario
from adaptive_safety.certify import (Check, ConditionReport, augmented_barrier, central_difference,
                                     check_conditions, effort_metrics, decrease_fraction,
                                     lyapunov_rate_analytic, monitor_affine, monitor_robot)
from adaptive_safety.controllers import ControllerKind
from adaptive_safety.sim import Trace


def test_check_line_format():
    assert Check("beta_gain", 0.05, 0.01).line() == "beta_gain, 0.05, >= 0.01, PASS"
    assert not Check("x", 1.0, 0.0, "<=").satisfied
    rep = ConditionReport()
    rep.add("a", 1.0, 2.0)
    assert not rep.passed and rep.failed[0].name == "a" and "a" in rep
    with pytest.raises(KeyError):
        rep["b"]


def test_double_integrator_gate_arithmetic():
    rep = check_conditions(load_scenario("di_tracbf"))
    assert rep.passed
    assert rep["start_estimate"].lhs == pytest.approx(0.4373875, abs=1e-12)
    assert rep["start_estimate"].rhs == pytest.approx(0.4, abs=1e-12)
    assert rep["start_bound"].rhs == pytest.approx(14.14 ** 2 / 500, abs=1e-12)
    assert rep["beta_gain"].lhs == 0.05 and rep["beta_gain"].rhs == pytest.approx(0.01)
    low = check_conditions(load_scenario("di_tracbf").replace(Gamma=(200.0, 200.0)))
    assert not low["start_estimate"].satisfied
    assert low["start_estimate"].rhs == pytest.approx(0.5)


def test_gradient_law_gate_has_single_condition():
    rep = check_conditions(load_scenario("di_racbf"))
    assert [e.name for e in rep.entries] == ["start_estimate"]


def test_two_link_gate():
    rep = check_conditions(load_scenario("two_link"))
    assert rep["tracking_gain"].lhs == 50 and rep["tracking_gain"].rhs == 50
    assert rep["tracking_gain"].satisfied and rep["beta_gain"].satisfied
    # benchmark start q0 = q_dot0 = 0 sits off the sliding manifold
    assert not rep["robot_start"].satisfied
    matched = load_scenario("two_link").replace(x0=(0.0, 0.0, math.pi / 2, math.pi / 2))
    assert check_conditions(matched).passed


def test_augmented_barrier_single_estimate_form():
    th = np.array([1.0, 2.0])
    G = np.array([4.0, 4.0])
    assert augmented_barrier(1.0, np.zeros(2), th, th, G) == pytest.approx(1.0 - 5 / 8)


def _synthetic_trace(h, theta_hat, t=None):
    n = len(h)
    t = np.arange(n) * 1e-3 if t is None else t
    return Trace(robot=False, t=t, x=np.zeros((n, 2)), u=np.zeros((n, 1)),
                 nu=np.array(theta_hat), theta_hat=np.array(theta_hat), h=np.array(h),
                 constraint_margin=np.zeros(n), psi=np.zeros((n, 2)))


def test_monitor_flags_negative_augmented_barrier():
    scn = build(load_scenario("di_racbf"))
    good = _synthetic_trace([0.5, 0.5, 0.5], [[10.0, 10.0]] * 3)
    assert monitor_affine(good, scn.plant, scn.gains, ControllerKind.RACBF).passed
    bad = _synthetic_trace([0.5, 0.2, 0.1], [[0.0, 0.0]] * 3)
    rep = monitor_affine(bad, scn.plant, scn.gains, ControllerKind.RACBF)
    assert not rep["h_a_nonnegative"].satisfied
    assert not rep["h_a_gronwall"].satisfied


def test_acbf_monitor_uses_zero_decay_rate():
    scn = build(load_scenario("di_racbf"))
    # decays at rate 1 < alpha = 2.5 with theta_hat = theta, so h_a = h
    decay = [0.5 * math.exp(-1.0 * k * 1e-3) for k in range(3)]
    tr = _synthetic_trace(decay, [[10.0, 10.0]] * 3)
    assert monitor_affine(tr, scn.plant, scn.gains, ControllerKind.RACBF)["h_a_gronwall"].satisfied
    assert not monitor_affine(tr, scn.plant, scn.gains, ControllerKind.ACBF)["h_a_gronwall"].satisfied


def test_monitors_are_read_only(di_tracbf):
    scn, tr = di_tracbf
    before = tr.fingerprint()
    monitor_affine(tr, scn.plant, scn.gains, scn.config.controller)
    effort_metrics(tr)
    assert tr.fingerprint() == before


def test_effort_metrics_on_sine():
    t = np.linspace(0, 2 * math.pi, 20001)
    tr = _synthetic_trace(np.ones_like(t), np.zeros((t.size, 2)), t)
    tr.u = np.sin(t)[:, None]
    m = effort_metrics(tr)
    assert m["l2_effort"] == pytest.approx(math.pi, rel=1e-6)
    assert m["smoothness"] == pytest.approx(math.pi, rel=1e-4)
    assert m["max_abs_u"] == pytest.approx(1.0, abs=1e-6)


def test_central_difference():
    t = np.linspace(0, 1, 101)
    np.testing.assert_allclose(central_difference(t ** 2, t), 2 * t[1:-1], atol=1e-12)


def test_lyapunov_rate_analytic_is_nonpositive(rng):
    K = 50 * np.eye(2)
    for _ in range(200):
        s, psi, nu, th = rng.normal(size=2), rng.normal(size=3), rng.normal(size=3), rng.normal(size=3)
        # completing the square: -(2/b)|psi|^2 - b|nu~|^2 - 2 nu~.psi <= 0 for b = 0.25 ... any b > 0
        assert lyapunov_rate_analytic(s, psi, nu, th, K, 0.25) <= 1e-12


def test_matched_start_keeps_certificate(two_link_matched):
    scn, tr = two_link_matched
    rep = monitor_robot(tr, scn.plant, scn.gains)
    assert rep.passed, rep.text()
    assert tr.summary["min_B"] > 0


def test_robot_finite_difference_rate_agrees_with_analytic(two_link_matched):
    scn, tr = two_link_matched
    fd = central_difference(tr.V, tr.t)
    an = np.array([lyapunov_rate_analytic(s, p, n, th, scn.gains.K, scn.gains.beta)
                   for s, p, n, th in zip(tr.s, tr.psi, tr.nu, tr.theta_hat)])[1:-1]
    ok = np.abs(fd - an) <= 1e-3 * np.maximum(1.0, np.abs(an))
    # central differences over 2 ms cannot follow the reference-filter activation bursts
    assert ok.mean() >= 0.99
    assert decrease_fraction(tr, tr.V, scn.gains) >= 0.999
