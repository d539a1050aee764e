import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from peakon_lab.dynamics import PeakonState, integrate
from peakon_lab.greens import CHKernel
from peakon_lab.weakform import (
    QuadSpec,
    SupportNotCovered,
    TestFunction,
    default_battery,
    poly_bump,
    refinement_order,
    residual,
    residual_battery,
)

K = CHKernel(1.0)


@pytest.fixture(scope="module")
def single():
    return integrate(K, PeakonState(0.0, [0.0], [2.0]), 3.0)


@pytest.fixture(scope="module")
def two():
    return integrate(K, PeakonState(0.0, [-5.0, 0.0], [0.75, 0.25]), 3.0)


@pytest.mark.parametrize("kind", ["poly", "smooth"])
def test_bump_derivatives_finite_difference(kind):
    phi = TestFunction(1.0, 0.5, 0.8, 1.3, kind=kind)
    t, x, h = 1.2, 0.9, 1e-5
    fd_t = (phi.phi(t + h, x) - phi.phi(t - h, x)) / (2 * h)
    fd_x = (phi.phi(t, x + h) - phi.phi(t, x - h)) / (2 * h)
    fd_txx = (phi.phi_t(t, x + h) - 2 * phi.phi_t(t, x) + phi.phi_t(t, x - h)) / h**2
    fd_xxx = (phi.phi_x(t, x + h) - 2 * phi.phi_x(t, x) + phi.phi_x(t, x - h)) / h**2
    assert phi.phi_t(t, x) == pytest.approx(fd_t, rel=1e-6)
    assert phi.phi_x(t, x) == pytest.approx(fd_x, rel=1e-6)
    assert phi.phi_txx(t, x) == pytest.approx(fd_txx, rel=1e-4)
    assert phi.phi_xxx(t, x) == pytest.approx(fd_xxx, rel=1e-4)


def test_poly_bump_support():
    assert poly_bump(1.0) == 0.0 and poly_bump(-1.5, 2) == 0.0 and poly_bump(0.0) == 1.0


def test_single_peakon_residual_small(single):
    for phi in default_battery(single, 5, seed=0):
        assert abs(residual(K, single, single.initial.measure, phi)) <= 1e-6


def test_residual_with_initial_line(single):
    phi = TestFunction(0.5, 0.3, 1.0, 2.0)
    assert phi.t_support[0] == 0.0
    assert abs(residual(K, single, single.initial.measure, phi)) <= 1e-6


def test_wrong_initial_data_is_detected(single):
    phi = TestFunction(0.5, 0.3, 1.0, 2.0)
    wrong = single.initial.measure * 1.1
    assert abs(residual(K, single, wrong, phi)) > 1e-3


def test_refinement_order(single):
    phi = TestFunction(1.5, 1.8, 1.2, 2.0)
    order, r0, r1 = refinement_order(K, single, single.initial.measure, phi)
    assert r1 < r0
    assert order >= 3.5


def test_coarser_time_sampling_is_worse(single):
    phi = TestFunction(1.5, 1.8, 1.2, 2.0)
    m0 = single.initial.measure
    rs = [abs(residual(K, single, m0, phi, QuadSpec(n, n))) for n in (1, 2, 4)]
    assert rs[0] > rs[1] > rs[2]


def test_two_peakon_residual(two):
    for phi in default_battery(two, 5, seed=1):
        assert abs(residual(K, two, two.initial.measure, phi)) <= 1e-5


@given(st.floats(-3, 3).filter(lambda c: abs(c) > 1e-3))
def test_residual_linear_in_phi(c):
    traj = integrate(K, PeakonState(0.0, [-2.0, 0.0], [0.6, 0.4]), 2.0)
    phi = TestFunction(0.8, -0.5, 0.6, 1.5)
    q = QuadSpec(2, 2)
    m0 = traj.initial.measure
    assert residual(K, traj, m0, phi.scaled(c), q) == pytest.approx(c * residual(K, traj, m0, phi, q),
                                                                     rel=1e-12, abs=1e-15)


def test_support_outside_trajectory(single):
    with pytest.raises(SupportNotCovered):
        residual(K, single, single.initial.measure, TestFunction(2.8, 0.0, 0.5, 1.0))


def test_battery_errors(single):
    with pytest.raises(ValueError):
        residual_battery(K, single, single.initial.measure, [])
    rep = residual_battery(K, single, single.initial.measure, default_battery(single, 3))
    assert rep.metadata["max_abs_residual"] <= 1e-6
    with pytest.raises(ValueError):
        TestFunction(0, 0, -1, 1)
