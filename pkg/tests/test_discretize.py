import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import norm

from peakon_lab.analysis import default_f_battery, initial_weak_star_probe
from peakon_lab.discretize import (
    InitialMeasure,
    cosine_bump,
    gaussian,
    quantize,
    reconstruct_u0,
    uniform,
)
from peakon_lab.greens import CHKernel
from peakon_lab.measures import DiscreteMeasure


def test_uniform_two_particles():
    s = quantize(uniform(0.0, 1.0), 2)
    np.testing.assert_allclose(s.x, [0.25, 0.75], atol=1e-12)
    np.testing.assert_array_equal(s.p, [0.5, 0.5])


def test_gaussian_quantiles_against_scipy():
    s = quantize(gaussian(0.0, 1.0), 16)
    q = (np.arange(16) + 0.5) / 16
    # truncation at 8 sigma changes the CDF by ~1e-15
    np.testing.assert_allclose(s.x, norm.ppf(q), atol=1e-10)


def test_equal_spacing_rule():
    s = quantize(uniform(0.0, 1.0), 4, rule="equal-spacing")
    np.testing.assert_allclose(s.x, [0.125, 0.375, 0.625, 0.875])
    np.testing.assert_allclose(s.p, 0.25, atol=1e-14)


@given(st.integers(1, 200), st.sampled_from(["equal-mass", "equal-spacing"]),
       st.sampled_from(["uniform", "gaussian", "cosine"]))
def test_unit_mass_positive_ordered(N, rule, kind):
    m0 = {"uniform": uniform(-1, 2), "gaussian": gaussian(0.5, 2.0), "cosine": cosine_bump(0, 1)}[kind]
    s = quantize(m0, N, rule)
    assert math.fsum(s.p.tolist()) == 1.0
    assert np.all(s.p > 0)
    assert np.all(np.diff(s.x) > 0)


def test_atomic_paths():
    mu = DiscreteMeasure.from_atoms([0.0, 1.0, 3.0], [1.0, 1.0, 2.0])
    m0 = InitialMeasure.atomic(mu)
    s = quantize(m0, 3)
    np.testing.assert_allclose(s.p, [0.25, 0.25, 0.5])
    s2 = quantize(m0, 2)
    np.testing.assert_allclose(s2.x, [0.5, 3.0])
    np.testing.assert_allclose(s2.p, [0.5, 0.5])


def test_bad_inputs():
    with pytest.raises(ValueError):
        quantize(uniform(), 0)
    with pytest.raises(ValueError):
        quantize(uniform(), 4, rule="random")
    with pytest.raises(ValueError):
        InitialMeasure.density(lambda x: -1.0, 0, 1)
    with pytest.raises(ValueError):
        InitialMeasure.density(lambda x: 1.0, 1, 0)


def test_initial_pairings_converge():
    battery = default_f_battery()
    Ns = [8, 16, 32, 64, 128]
    rep = initial_weak_star_probe(gaussian(), Ns, battery)
    for i in range(len(battery)):
        errs = [v for _, n, v in rep.series if n.startswith(f"pairing_error[f{i}]")]
        assert errs[-1] < 0.05 * errs[0] + 1e-14


def test_reconstruct_u0_bounded():
    k = CHKernel(1.0)
    fs = reconstruct_u0(k, quantize(gaussian(), 32))
    assert min(fs.bound_margins()) >= 0
    assert fs.u.size == 1001
