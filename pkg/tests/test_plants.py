import math

import numpy as np
import pytest

from adaptive_safety.plants import (SingularInertiaError, double_integrator, lip_regressor,
                                    manipulator_accel, sliding_variable, two_link)


def test_double_integrator_dynamics():
    di = double_integrator()
    xdot = di.dynamics(np.array([0.5, -1.0]), np.array([2.0]))
    # x1_dot = x2, x2_dot = u + theta1 x1 + theta2 x2
    np.testing.assert_allclose(xdot, [-1.0, 2.0 + 5.0 - 10.0])
    xdot = di.dynamics(np.array([0.5, -1.0]), np.array([2.0]), theta=np.zeros(2))
    np.testing.assert_allclose(xdot, [-1.0, 2.0])


def test_lip_identity(rng):
    arm = two_link()
    worst = 0.0
    for _ in range(1000):
        q, qd, r, rd = (rng.uniform(-3, 3, 2) for _ in range(4))
        lhs = lip_regressor(arm, q, qd, r, rd) @ arm.theta_true
        rhs = arm.M(q) @ rd + arm.C(q, qd) @ r + arm.g(q)
        worst = max(worst, np.linalg.norm(lhs - rhs))
    assert worst <= 1e-10


def test_skew_symmetry(rng):
    arm = two_link()
    for _ in range(1000):
        q, qd, s = (rng.uniform(-3, 3, 2) for _ in range(3))
        assert abs(s @ (0.5 * arm.M_dot(q, qd) - arm.C(q, qd)) @ s) <= 1e-12


def test_inertia_bound_on_grid():
    arm = two_link()
    lmax = max(np.linalg.eigvalsh(arm.M(np.array([0.0, q2])))[-1]
               for q2 in np.linspace(-math.pi, math.pi, 721))
    assert lmax <= arm.M_upper
    assert lmax == pytest.approx(3.473 + 2 * 0.242 + 0.196 - 0.196 + 0.0, abs=0.2)


def test_mass_matrix_derivative(rng):
    arm = two_link()
    q, qd, h = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2), 1e-6
    fd = (arm.M(q + h * qd) - arm.M(q - h * qd)) / (2 * h)
    np.testing.assert_allclose(arm.M_dot(q, qd), fd, atol=1e-8)


def test_energy_conserved_without_input():
    arm = two_link()
    x = np.array([0.3, -0.5, 1.0, -0.7])
    energy = lambda x: 0.5 * x[2:] @ arm.M(x[:2]) @ x[2:]
    e0, dt = energy(x), 1e-3
    f = lambda x: np.concatenate([x[2:], manipulator_accel(arm, x[:2], x[2:], np.zeros(2))])
    for _ in range(2000):
        k1 = f(x)
        k2 = f(x + 0.5 * dt * k1)
        k3 = f(x + 0.5 * dt * k2)
        k4 = f(x + dt * k3)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    assert energy(x) == pytest.approx(e0, rel=1e-9)


def test_forward_dynamics_solves_manipulator_equation(rng):
    arm = two_link()
    q, qd, u = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2), rng.uniform(-5, 5, 2)
    qdd = manipulator_accel(arm, q, qd, u)
    np.testing.assert_allclose(arm.M(q) @ qdd + arm.C(q, qd) @ qd, u, atol=1e-12)


def test_singular_inertia_is_reported():
    arm = two_link(theta_true=(1.0, 1.0, 0.0))
    with pytest.raises(SingularInertiaError):
        manipulator_accel(arm, np.zeros(2), np.zeros(2), np.zeros(2))


def test_sliding_variable():
    np.testing.assert_array_equal(sliding_variable(np.zeros(2), [1.0, 2.0], [0.5, 0.5]), [0.5, 1.5])
