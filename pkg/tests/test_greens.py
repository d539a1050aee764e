import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from peakon_lab.greens import CHKernel, constants, convolve, eval_G, eval_Gp, eval_Gp_side, weighted_holder_L
from peakon_lab.measures import DiscreteMeasure

alphas = st.floats(0.2, 5.0)


def test_frozen_values():
    # e^{-2} / 1 and -e^{-1} / 2, computed by hand
    assert eval_G(CHKernel(0.5), 1.0) == pytest.approx(0.1353352832366127, abs=1e-15)
    assert eval_Gp(CHKernel(1.0), 1.0) == pytest.approx(-0.18393972058572117, abs=1e-15)
    assert eval_G(CHKernel(1.0), 0.0) == 0.5


def test_alpha_must_be_positive():
    for a in (0.0, -1.0, float("nan")):
        with pytest.raises(ValueError):
            CHKernel(a)


def test_derivative_at_zero_is_left_limit():
    k = CHKernel(2.0)
    assert eval_Gp(k, 0.0) == pytest.approx(1 / (2 * 4.0))
    assert eval_Gp_side(k, 0.0, -1) == pytest.approx(1 / 8.0)
    assert eval_Gp_side(k, 0.0, +1) == pytest.approx(-1 / 8.0)


@given(alphas, st.floats(-20, 20))
def test_G_even_Gp_odd(a, x):
    k = CHKernel(a)
    assert eval_G(k, x) == pytest.approx(eval_G(k, -x), rel=1e-14)
    if x != 0:
        assert eval_Gp(k, x) == pytest.approx(-eval_Gp(k, -x), rel=1e-14)


@given(alphas, st.floats(0.01, 10.0))
def test_Gp_matches_finite_difference(a, x):
    k = CHKernel(a)
    for s in (x, -x):
        h = 1e-6 * a
        fd = (eval_G(k, s + h) - eval_G(k, s - h)) / (2 * h)
        assert eval_Gp(k, s) == pytest.approx(fd, rel=1e-6, abs=1e-10)


@pytest.mark.parametrize("a", [0.3, 1.0, 2.5])
def test_kernel_integrates_to_one(a):
    k = CHKernel(a)
    val = quad(lambda x: eval_G(k, x), -np.inf, 0)[0] + quad(lambda x: eval_G(k, x), 0, np.inf)[0]
    assert val == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("a", [0.5, 1.0, 3.0])
def test_constants_against_quadrature(a):
    k = CHKernel(a)
    c = constants(k)
    xs = np.linspace(-1, 1, 20001) * 60 * a
    assert c.sup_G == pytest.approx(np.abs(eval_G(k, xs)).max())
    assert c.sup_Gp == pytest.approx(np.abs(eval_Gp(k, xs)).max(), rel=1e-3)
    l1 = 2 * quad(lambda x: eval_G(k, x), 0, np.inf)[0]
    assert c.l1_G == pytest.approx(l1, rel=1e-10)
    l1p = 2 * quad(lambda x: abs(eval_Gp(k, x)), 0, np.inf)[0]
    assert c.l1_Gp == pytest.approx(l1p, rel=1e-10)
    # variation of G: up to the peak and down again
    assert c.var_G == pytest.approx(2 * eval_G(k, 0.0))
    # G' jumps by 1/a^2 at the origin, plus two monotone tails of height 1/(2a^2)
    assert c.var_Gp == pytest.approx(2 / a**2)
    assert c.bv_G == pytest.approx(c.l1_G + c.var_G)
    assert c.bv_Gp == pytest.approx(c.l1_Gp + c.var_Gp)


def test_unit_alpha_constants():
    c = constants(CHKernel(1.0))
    assert (c.sup_G, c.sup_Gp, c.bv_G, c.bv_Gp) == (0.5, 0.5, 2.0, 3.0)
    assert c.lipschitz_in_time == 1.0
    assert math.sqrt(2 * weighted_holder_L(CHKernel(1.0))) == pytest.approx(4.0)


def test_helmholtz_weak_identity():
    # int G (phi - a^2 phi'') = phi(0) for a smooth compactly supported phi
    a = 0.7
    k = CHKernel(a)

    def phi(x):
        return math.exp(-((x - 0.3) ** 2))

    def phi2(x):
        return (4 * (x - 0.3) ** 2 - 2) * phi(x)

    integrand = lambda x: eval_G(k, x) * (phi(x) - a * a * phi2(x))  # noqa: E731
    val = quad(integrand, -40, 0, epsabs=1e-13)[0] + quad(integrand, 0, 40, epsabs=1e-13)[0]
    assert val == pytest.approx(phi(0.0), abs=1e-10)


def test_convolve_single_atom_is_kernel():
    k = CHKernel(1.0)
    mu = DiscreteMeasure.dirac(0.0, 1.0)
    xs = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(convolve(k, mu, xs), 0.5 * np.exp(-np.abs(xs)), rtol=1e-15)
    assert isinstance(convolve(k, mu, 0.5), float)
