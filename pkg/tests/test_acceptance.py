"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

The lines are also gathered into the terminal summary (see conftest.py), so
they show up under plain ``pytest`` without ``-s``.
"""
import math
import time

import numpy as np
import pytest

from peakon_lab.analysis import (
    bl_cauchy_probe,
    h1_norm_sq,
    h1_norm_sq_quadrature,
    holder_probe,
    l1loc_convergence_probe,
    run_ensemble,
    time_lipschitz_probe,
)
from peakon_lab.discretize import gaussian
from peakon_lab.dynamics import (
    PeakonState,
    check_bounds,
    hamiltonian,
    integrate,
    invariants,
    rhs_fast,
    rhs_reference,
)
from peakon_lab.greens import CHKernel
from peakon_lab.measures import DiscreteMeasure, bl_distance, bl_distance_oracle, young_inequality_check
from peakon_lab.weakform import TestFunction, default_battery, refinement_order, residual_battery

K = CHKernel(1.0)
RESULTS = []


def report(num, title, ok, detail, elapsed, budget):
    within = elapsed <= budget
    line = (f"criterion {num:>2} {'PASS' if ok and within else 'FAIL'}  {title}: {detail}  "
            f"[{elapsed:.2f}s / {budget:g}s]")
    RESULTS.append(line)
    print(line)
    assert ok, line
    assert within, line


def two_peakon():
    return PeakonState(0.0, [-5.0, 0.0], [0.75, 0.25])


def ten_peakon():
    rng = np.random.default_rng(10)
    x = np.sort(rng.uniform(-10, 10, 10))
    p = rng.uniform(0.2, 1.0, 10)
    return PeakonState(0.0, x, p / p.sum())


@pytest.fixture(scope="module")
def conservation_runs():
    return {name: integrate(K, s, 10.0, rtol=1e-10, atol=1e-10)
            for name, s in (("two", two_peakon()), ("ten", ten_peakon()))}


@pytest.fixture(scope="module")
def pair_run():
    return integrate(K, two_peakon(), 20.0)


def test_criterion_01_single_peakon_exact():
    t0 = time.perf_counter()
    c = 1.0
    traj = integrate(K, PeakonState(0.0, [0.0], [2 * K.alpha * c]), 1.0, rtol=1e-10, atol=1e-10)
    x_err = abs(traj.final.x[0] - c * 1.0)
    p_err = float(np.abs(traj.p[:, 0] - 2.0).max())
    ok = x_err <= 1e-10 and p_err <= 1e-12
    report(1, "single peakon", ok, f"|x(1)-1|={x_err:.2e}, max|p-2|={p_err:.2e}",
           time.perf_counter() - t0, 1)


def test_criterion_02_conservation(conservation_runs):
    t0 = time.perf_counter()
    worst = {"P": 0.0, "H": 0.0, "H2": 0.0, "H3": 0.0}
    for traj in conservation_runs.values():
        ref = invariants(K, traj.initial)
        for s in traj.states():
            inv = invariants(K, s)
            worst["P"] = max(worst["P"], abs(inv.P - ref.P) / ref.P)
            worst["H"] = max(worst["H"], abs(inv.H - ref.H) / ref.H)
            worst["H2"] = max(worst["H2"], abs(inv.H2 - ref.H2) / ref.H2)
            worst["H3"] = max(worst["H3"], abs(inv.Hn[2] - ref.Hn[2]) / ref.Hn[2])
    ok = worst["P"] <= 1e-12 and max(worst["H"], worst["H2"], worst["H3"]) <= 1e-7
    detail = ", ".join(f"{k} drift {v:.2e}" for k, v in worst.items())
    report(2, "conservation", ok, detail, time.perf_counter() - t0, 10)


def test_criterion_03_ordering_and_bounds(conservation_runs):
    t0 = time.perf_counter()
    min_gap, min_slack = math.inf, math.inf
    for traj in conservation_runs.values():
        for s in traj.states():
            min_gap = min(min_gap, float(np.diff(s.x).min()))
            min_slack = min(min_slack, check_bounds(traj.initial, s, K).min_slack)
    ok = min_gap > 0 and min_slack >= -1e-9
    report(3, "no collision + a priori bounds", ok, f"min gap {min_gap:.3e}, min slack {min_slack:.2e}",
           time.perf_counter() - t0, 10)


def test_criterion_04_bl_metric():
    t0 = time.perf_counter()
    analytic = max(abs(bl_distance(DiscreteMeasure.dirac(0.0), DiscreteMeasure.dirac(t))[0] - 2 * t / (2 + t))
                   for t in (0.1, 1.0, 5.0))
    rng = np.random.default_rng(4)

    def rand_measure():
        k = int(rng.integers(1, 7))
        return DiscreteMeasure.from_atoms(rng.uniform(-5, 5, k), rng.uniform(0.05, 1.0, k))

    step = 1e-3
    worst_gap, oracle_above = 0.0, 0.0
    axioms = True
    for _ in range(100):
        a, b, c = rand_measure(), rand_measure(), rand_measure()
        d = bl_distance(a, b)[0]
        o = bl_distance_oracle(a, b, grid_step=step)
        worst_gap = max(worst_gap, abs(d - o))
        oracle_above = max(oracle_above, o - d)
        axioms &= d >= 0 and abs(d - bl_distance(b, a)[0]) <= 1e-10 and bl_distance(a, a)[0] == 0.0
        axioms &= d <= bl_distance(a, c)[0] + bl_distance(c, b)[0] + 1e-10
    ok = analytic <= 1e-9 and worst_gap <= 2 * step and axioms
    report(4, "BL metric", ok, f"analytic err {analytic:.1e}, max |LP-oracle| {worst_gap:.1e}, "
                               f"axioms {'hold' if axioms else 'VIOLATED'}", time.perf_counter() - t0, 30)


def test_criterion_05_time_lipschitz(pair_run):
    t0 = time.perf_counter()
    rep = time_lipschitz_probe(pair_run, K, n_pairs=100, seed=0)
    ratio = rep.metadata["max_ratio"]
    report(5, "time-Lipschitz", ratio <= 1.0 + 1e-6, f"max d/|s-t| = {ratio:.6f} (bound 1)",
           time.perf_counter() - t0, 30)


def test_criterion_06_holder(pair_run):
    t0 = time.perf_counter()
    rep = holder_probe(pair_run, K, n_pairs=50, seed=1)
    m = rep.min_margin("holder_half")
    report(6, "Holder-1/2", m >= -1e-6, f"min margin {m:.3e}", time.perf_counter() - t0, 30)


def test_criterion_07_young():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = {0: math.inf, 1: math.inf}
    for _ in range(100):
        k = int(rng.integers(1, 7))
        mu = DiscreteMeasure.from_atoms(rng.uniform(-5, 5, k), rng.normal(0, 1, k))
        for order in (0, 1):
            lhs, rhs = young_inequality_check(K, order, mu)
            worst[order] = min(worst[order], rhs - lhs)
    ok = min(worst.values()) >= -1e-6
    report(7, "Young inequality", ok, f"min margin k=0 {worst[0]:.3e}, k=1 {worst[1]:.3e}",
           time.perf_counter() - t0, 60)


def test_criterion_08_fast_summation():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    states = []
    for n in (2, 10, 100, 1000):
        x = np.sort(rng.uniform(-50, 50, n))
        states.append(PeakonState(0.0, x, rng.uniform(0.01, 1.0, n)))
    for n in (10, 100, 1000):
        half = n // 2
        x = np.concatenate([np.sort(rng.uniform(-1e4, -1e4 + 2, half)),
                            np.sort(rng.uniform(1e4, 1e4 + 2, n - half))])
        states.append(PeakonState(0.0, x, rng.uniform(0.01, 1.0, n)))
    worst = 0.0
    for s in states:
        for u, v in zip(rhs_fast(K, s), rhs_reference(K, s)):
            worst = max(worst, float(np.abs(u - v).max()))
    report(8, "fast summation", worst <= 1e-12, f"max abs diff {worst:.2e} over {len(states)} states",
           time.perf_counter() - t0, 10)


def test_criterion_09_weak_form():
    t0 = time.perf_counter()
    single = integrate(K, PeakonState(0.0, [0.0], [2.0]), 2.0)
    battery = default_battery(single, 5, seed=0) + [TestFunction(0.5, 0.3, 1.0, 2.0)]
    r_single = residual_battery(K, single, single.initial.measure, battery).metadata["max_abs_residual"]
    order, _, _ = refinement_order(K, single, single.initial.measure, TestFunction(1.0, 1.3, 0.8, 2.0))
    two = integrate(K, two_peakon(), 2.0)
    pbat = default_battery(two, 5, seed=1) + [TestFunction(0.5, -4.0, 1.0, 2.5)]
    r_two = residual_battery(K, two, two.initial.measure, pbat).metadata["max_abs_residual"]
    ok = r_single <= 1e-6 and order >= 3.5 and r_two <= 1e-5
    report(9, "weak-form residual", ok,
           f"single {r_single:.2e}, order {order:.2f}, two-peakon {r_two:.2e}", time.perf_counter() - t0, 60)


def test_criterion_10_convergence():
    t0 = time.perf_counter()
    Ns = [8, 16, 32, 64, 128]  # consecutive pairs are (N, 2N) for N = 8..64
    ens = run_ensemble(K, gaussian(), Ns, 2.0)
    bl = bl_cauchy_probe(ens, [0.0, 1.0])
    l0 = l1loc_convergence_probe(K, None, Ns, 5.0, 2.0, 0, ensemble=ens)
    l1 = l1loc_convergence_probe(K, None, Ns, 5.0, 2.0, 1, ensemble=ens)
    flags = [bl.metadata["monotone@t=0"], bl.metadata["monotone@t=1"], l0.metadata["monotone"],
             l1.metadata["monotone"]]
    series = {
        "BL t=0": [v for t, n, v in bl.series if t == 0.0],
        "BL t=1": [v for t, n, v in bl.series if t == 1.0],
        "L1 u": [v for _, _, v in l0.series],
        "L1 u_x": [v for _, _, v in l1.series],
    }
    detail = "; ".join(f"{k} " + ",".join(f"{v:.3g}" for v in vs) for k, vs in series.items())
    report(10, "convergence", all(flags), detail, time.perf_counter() - t0, 120)


def test_criterion_11_h1_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 30))
        x = np.sort(rng.uniform(-10, 10, n))
        if np.any(np.diff(x) <= 0):
            continue
        s = PeakonState(0.0, x, rng.uniform(0.01, 2.0, n))
        two_h = 2 * hamiltonian(K, s)
        # closed-form bilinear form and direct quadrature of u^2 + a^2 u_x^2
        for h in (h1_norm_sq(K, s), h1_norm_sq_quadrature(K, s.measure)):
            worst = max(worst, abs(h - two_h) / two_h)
    report(11, "h1 = 2H", worst <= 1e-12, f"max rel diff {worst:.2e}", time.perf_counter() - t0, 1)
