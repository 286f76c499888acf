import math

import numpy as np
import pytest

from adaptive_safety.barriers import (LinearClassK, classk_apply, double_integrator_barrier,
                                      logsumexp_box_barrier)
from adaptive_safety.core import ConfigurationError


def fd_grad(fun, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


def test_double_integrator_barrier_start_value():
    bar = double_integrator_barrier(np.array([0.75, 0.0]), 1.0, 50.0, 0.1)
    # (1 - 0.5625) - 0.075^2 / 50
    assert bar.value == pytest.approx(0.4373875, abs=1e-12)
    assert bar.grad[0] == pytest.approx(-1.5 - 2 * 0.1 * 0.075 / 50, abs=1e-12)
    assert bar.grad[1] == pytest.approx(-2 * 0.075 / 50, abs=1e-12)


def test_double_integrator_barrier_gradient(rng):
    fun = lambda x: double_integrator_barrier(x, 1.0, 50.0, 0.1).value
    for _ in range(200):
        x = rng.uniform(-2, 2, 2)
        g = double_integrator_barrier(x, 1.0, 50.0, 0.1).grad
        np.testing.assert_allclose(g, fd_grad(fun, x), atol=1e-7)


def test_logsumexp_barrier_origin():
    bar = logsumexp_box_barrier(np.zeros(2), math.pi / 6, 10.0)
    expected = (math.pi / 6) ** 2 - math.log(2.0) / 10.0
    assert bar.value == pytest.approx(expected, abs=1e-14)
    assert bar.value == pytest.approx(0.2048409598, abs=1e-9)
    np.testing.assert_array_equal(bar.grad, 0.0)


def test_logsumexp_barrier_is_below_min_margin(rng):
    qm = math.pi / 6
    for _ in range(200):
        q = rng.uniform(-1, 1, 2)
        h = logsumexp_box_barrier(q, qm, 10.0).value
        m = np.min(qm ** 2 - q ** 2)
        assert m - math.log(2) / 10 - 1e-12 <= h <= m + 1e-12


def test_logsumexp_barrier_gradient(rng):
    fun = lambda q: logsumexp_box_barrier(q, math.pi / 6, 10.0).value
    for _ in range(200):
        q = rng.uniform(-1, 1, 2)
        np.testing.assert_allclose(logsumexp_box_barrier(q, math.pi / 6, 10.0).grad,
                                   fd_grad(fun, q), atol=1e-7)


def test_logsumexp_barrier_no_overflow():
    bar = logsumexp_box_barrier(np.array([100.0, 0.0]), math.pi / 6, 10.0)
    assert np.isfinite(bar.value) and np.all(np.isfinite(bar.grad))
    assert bar.value == pytest.approx((math.pi / 6) ** 2 - 1e4, rel=1e-12)


def test_barrier_parameter_checks():
    with pytest.raises(ConfigurationError):
        double_integrator_barrier(np.zeros(2), 1.0, 0.0, 0.1)
    with pytest.raises(ConfigurationError):
        logsumexp_box_barrier(np.zeros(2), math.pi / 6, 0.0)


def test_linear_class_k():
    k = LinearClassK(2.5)
    assert k(2.0) == 5.0
    assert classk_apply(k, -1.0) == -2.5
