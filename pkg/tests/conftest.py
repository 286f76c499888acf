import math

import numpy as np
import pytest

from adaptive_safety import build, load_scenario, run


@pytest.fixture(scope="session")
def di_tracbf():
    scn = build(load_scenario("di_tracbf"))
    return scn, run(scn)


@pytest.fixture(scope="session")
def di_racbf():
    scn = build(load_scenario("di_racbf"))
    return scn, run(scn)


@pytest.fixture(scope="session")
def two_link():
    scn = build(load_scenario("two_link"))
    return scn, run(scn)


@pytest.fixture(scope="session")
def two_link_matched():
    # start on the sliding manifold: q_dot0 = r(0, 0) = (pi/2, pi/2)
    cfg = load_scenario("two_link").replace(x0=(0.0, 0.0, math.pi / 2, math.pi / 2))
    scn = build(cfg)
    return scn, run(scn)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def endpoint(trace):
    return np.concatenate([trace.x[-1], trace.nu[-1], trace.theta_hat[-1]])


# acceptance lines, printed after the run
ACCEPTANCE = {}


def record(number, title, passed, detail):
    line = f"criterion {number:2d} ({title}): {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
