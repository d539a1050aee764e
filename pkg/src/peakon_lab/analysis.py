"""Regularity and convergence diagnostics for particle solutions.

Each probe checks an analytic inequality and records its margin
(bound minus measured value).  A negative margin beyond tolerance is a bug,
never a finding.  The limiting solution is not computable, so convergence in
N is measured as a Cauchy property between successive ensembles.

Norms on u use the alpha-weighted inner product int(f g + alpha^2 f' g'), for
which ||G * mu||^2 = sum_ij w_i w_j G(x_i - x_j) holds exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .discretize import InitialMeasure, quantize
from .dynamics import PeakonState, Trajectory, hamiltonian, integrate
from .fields import FieldSample, sample_field  # noqa: F401  (re-exported)
from .greens import CHKernel, constants, convolve, weighted_holder_L
from .measures import DiscreteMeasure, bl_distance, pair


@dataclass
class DiagnosticReport:
    series: list = field(default_factory=list)  # (t, name, value)
    margins: list = field(default_factory=list)  # (inequality id, margin)
    metadata: dict = field(default_factory=dict)

    def add(self, t, name: str, value: float):
        self.series.append((float(t), name, float(value)))

    def margin(self, ineq: str, value: float):
        self.margins.append((ineq, float(value)))

    def min_margin(self, ineq: str | None = None) -> float:
        vals = [m for i, m in self.margins if ineq is None or i == ineq]
        return min(vals) if vals else math.inf

    def violations(self, tol: float = 1e-6) -> list:
        return [(i, m) for i, m in self.margins if m < -tol]

    def passed(self, tol: float = 1e-6) -> bool:
        return not self.violations(tol)

    def values(self, name: str) -> list[float]:
        return [v for _, n, v in self.series if n == name]

    def to_dict(self) -> dict:
        return {
            "series": [list(s) for s in self.series],
            "margins": [list(m) for m in self.margins],
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "name", "value"])
        for t, name, v in self.series:
            w.writerow([f"{t:.17g}", name, f"{v:.17g}"])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# norms


def _gram(kernel: CHKernel, x: np.ndarray) -> np.ndarray:
    return np.exp(-np.abs(x[:, None] - x[None, :]) / kernel.alpha) / (2 * kernel.alpha)


def h1_norm_sq(kernel: CHKernel, state) -> float:
    """||u||_alpha^2 for u = G * m; equals twice the Hamiltonian."""
    mu = state.measure if isinstance(state, PeakonState) else state
    if len(mu) == 0:
        return 0.0
    return float(mu.weights @ _gram(kernel, mu.positions) @ mu.weights)


def h1_distance(kernel: CHKernel, m1: DiscreteMeasure, m2: DiscreteMeasure) -> float:
    """||G * m1 - G * m2||_alpha by the bilinear form over the union support."""
    return math.sqrt(max(h1_norm_sq(kernel, m1 - m2), 0.0))


def h1_norm_sq_quadrature(kernel: CHKernel, mu: DiscreteMeasure, pad: float = 40.0, order: int = 8,
                          panel: float = 0.25) -> float:
    """Same quantity by Gauss-Legendre quadrature of u^2 + alpha^2 u_x^2 (kink-split)."""
    if len(mu) == 0:
        return 0.0
    a = kernel.alpha
    lo, hi = mu.positions[0] - pad * a, mu.positions[-1] + pad * a
    base = np.linspace(lo, hi, int(math.ceil((hi - lo) / (panel * a))) + 1)
    edges = np.union1d(base, mu.positions)
    xi, wi = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)[:, None]
    xs = (edges[:-1, None] + half * (xi + 1)).ravel()
    ws = (half * wi).ravel()
    u = convolve(kernel, mu, xs, 0)
    ux = convolve(kernel, mu, xs, 1)
    return math.fsum((ws * (u * u + a * a * ux * ux)).tolist())


# ---------------------------------------------------------------------------
# pair sampling


def sample_pairs(t0: float, t1: float, n_pairs: int, seed: int = 0, lattice: int = 6):
    """Lattice pairs plus uniform random pairs (s < t) within [t0, t1]."""
    rng = np.random.default_rng(seed)
    grid = np.linspace(t0, t1, lattice)
    pairs = [(grid[i], grid[j]) for i in range(lattice) for j in range(i + 1, lattice)]
    pairs = pairs[:n_pairs]
    while len(pairs) < n_pairs:
        s, t = sorted(rng.uniform(t0, t1, 2))
        if t > s:
            pairs.append((s, t))
    return pairs


def time_lipschitz_probe(trajectory: Trajectory, kernel: CHKernel, n_pairs: int = 100,
                         seed: int = 0, tol: float = 1e-6) -> DiagnosticReport:
    """Check d(m(s), m(t)) <= (||G||_inf + ||G'||_inf) P^2 |s - t|.

    P is the (conserved) total momentum; at unit mass this is the uniform
    Lipschitz constant of particle solutions.
    """
    P = trajectory.initial.momentum
    bound = constants(kernel).lipschitz_in_time * P * P
    report = DiagnosticReport(metadata={"probe": "time-lipschitz", "bound": bound, "mass": P})
    worst = 0.0
    for s, t in sample_pairs(trajectory.t0, trajectory.t1, n_pairs, seed):
        d = bl_distance(trajectory.at(s).measure, trajectory.at(t).measure)[0]
        ratio = d / (t - s)
        worst = max(worst, ratio)
        report.add(t - s, "bl_ratio", ratio)
        report.margin("time_lipschitz", bound - ratio)
    report.metadata["max_ratio"] = worst
    report.metadata["passed"] = report.passed(tol)
    return report


def holder_probe(trajectory: Trajectory, kernel: CHKernel, n_pairs: int = 50,
                 seed: int = 1, tol: float = 1e-6) -> DiagnosticReport:
    """Check ||u(s) - u(t)||_alpha <= sqrt(2 L P d(m(s), m(t))).

    L is the Holder constant of the weighted norm (the unweighted one at
    alpha = 1, where sqrt(2L) = 4); P is the total momentum.
    """
    P = trajectory.initial.momentum
    L = weighted_holder_L(kernel)
    report = DiagnosticReport(metadata={"probe": "holder-1/2", "L": L, "mass": P})
    for s, t in sample_pairs(trajectory.t0, trajectory.t1, n_pairs, seed):
        ms, mt = trajectory.at(s).measure, trajectory.at(t).measure
        d = bl_distance(ms, mt)[0]
        lhs = h1_distance(kernel, ms, mt)
        rhs = math.sqrt(2 * L * P * d)
        report.add(t - s, "h1_difference", lhs)
        report.add(t - s, "holder_bound", rhs)
        report.margin("holder_half", rhs - lhs)
    report.metadata["passed"] = report.passed(tol)
    return report


# ---------------------------------------------------------------------------
# convergence in N


def run_ensemble(kernel: CHKernel, m0: InitialMeasure, N_list, T: float, rule: str = "equal-mass",
                 rtol: float = 1e-10, atol: float = 1e-10) -> dict[int, Trajectory]:
    N_list = list(N_list)
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be strictly increasing")
    return {
        N: integrate(kernel, quantize(m0, N, rule), T, rtol=rtol, atol=atol) for N in N_list
    }


def _is_decreasing(vals) -> bool:
    return all(b < a for a, b in zip(vals, vals[1:]))


def bl_cauchy_probe(ensemble: dict[int, Trajectory], times) -> DiagnosticReport:
    """d(m^(N)(t), m^(N')(t)) for consecutive N < N' in the ensemble."""
    Ns = sorted(ensemble)
    report = DiagnosticReport(metadata={"probe": "bl-cauchy", "N": Ns, "times": list(times)})
    for t in times:
        vals = []
        for a, b in zip(Ns, Ns[1:]):
            d = bl_distance(ensemble[a].at(t).measure, ensemble[b].at(t).measure)[0]
            vals.append(d)
            report.add(t, f"bl[{a},{b}]", d)
        report.metadata[f"monotone@t={t:g}"] = _is_decreasing(vals)
        for v0, v1 in zip(vals, vals[1:]):
            report.margin("bl_cauchy_decrease", v0 - v1)
    return report


def _space_time_l1(kernel, ta: Trajectory, tb: Trajectory, R: float, tmax: float, order: int,
                   t_panels: int, x_panel: float, gl: int) -> float:
    xi, wi = np.polynomial.legendre.leggauss(gl)
    t_edges = np.linspace(0.0, tmax, t_panels + 1)
    total = []
    for a, b in zip(t_edges[:-1], t_edges[1:]):
        for s, w in zip(a + 0.5 * (b - a) * (xi + 1), 0.5 * (b - a) * wi):
            ma, mb = ta.at(s).measure, tb.at(s).measure
            base = np.linspace(-R, R, int(math.ceil(2 * R / x_panel)) + 1)
            kinks = np.concatenate([ma.positions, mb.positions])
            edges = np.union1d(base, kinks[(kinks > -R) & (kinks < R)])
            half = 0.5 * np.diff(edges)[:, None]
            xs = (edges[:-1, None] + half * (xi + 1)).ravel()
            ws = (half * wi).ravel()
            diff = convolve(kernel, ma, xs, order) - convolve(kernel, mb, xs, order)
            total.append(w * math.fsum((ws * np.abs(diff)).tolist()))
    return math.fsum(total)


def l1loc_convergence_probe(kernel: CHKernel, m0, N_list, R: float, T: float, order: int = 0,
                            ensemble: dict[int, Trajectory] | None = None, t_panels: int = 8,
                            x_panel: float = 0.05, gl: int = 4) -> DiagnosticReport:
    """L1 norm of d^k/dx^k (u^(N) - u^(N')) over [0, min(R, T)] x [-R, R]."""
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    if not (R > 0 and T > 0):
        raise ValueError("R and T must be positive")
    tmax = min(R, T)
    if ensemble is None:
        ensemble = run_ensemble(kernel, m0, N_list, tmax)
    Ns = list(N_list)
    report = DiagnosticReport(
        metadata={"probe": f"l1loc-order{order}", "N": Ns, "R": R, "T": tmax,
                  "note": "Cauchy differences between successive N; the limit is not computed"}
    )
    k = constants(kernel)
    cap = 2 * R * tmax * 2 * k.sup[order]
    vals = []
    for a, b in zip(Ns, Ns[1:]):
        v = _space_time_l1(kernel, ensemble[a], ensemble[b], R, tmax, order, t_panels, x_panel, gl)
        vals.append(v)
        report.add(tmax, f"l1[{a},{b}]", v)
        report.margin("l1loc_pointwise_cap", cap - v)
    for v0, v1 in zip(vals, vals[1:]):
        report.margin("l1loc_decrease", v0 - v1)
    report.metadata["monotone"] = _is_decreasing(vals)
    return report


def default_f_battery(center: float = 0.0, scale: float = 1.0) -> list:
    """Ten C_0 test functions: Gaussian bumps and bump-modulated trig functions."""
    def gauss(c, w):
        return lambda x: np.exp(-0.5 * ((np.asarray(x) - c) / w) ** 2)

    def modulated(c, w, k, phase):
        return lambda x: np.exp(-0.5 * ((np.asarray(x) - c) / w) ** 2) * np.cos(
            k * (np.asarray(x) - c) + phase)

    c, s = center, scale
    return [
        gauss(c, s), gauss(c - s, 0.5 * s), gauss(c + s, 0.5 * s), gauss(c, 2 * s),
        gauss(c + 0.3 * s, 0.8 * s),
        modulated(c, 1.5 * s, 2.0 / s, 0.3), modulated(c, 2 * s, 0.5 / s, 0.0),
        modulated(c + 0.5 * s, 2 * s, 1.0 / s, 0.0), modulated(c, 3 * s, 1.0 / (3 * s), 0.0),
        lambda x: 1.0 / (1.0 + ((np.asarray(x) - c) / s) ** 2),
    ]


def weak_star_probe(measures_by_N: dict[int, DiscreteMeasure], f_battery,
                    t: float = 0.0) -> DiagnosticReport:
    """|m^(N)(f) - m^(N')(f)| for consecutive N, per test function."""
    Ns = sorted(measures_by_N)
    report = DiagnosticReport(metadata={"probe": "weak-star", "N": Ns, "t": t})
    monotone = []
    for i, f in enumerate(f_battery):
        vals = []
        for a, b in zip(Ns, Ns[1:]):
            v = abs(pair(measures_by_N[a], f) - pair(measures_by_N[b], f))
            vals.append(v)
            report.add(t, f"pairing_diff[f{i}][{a},{b}]", v)
        for N in Ns:
            mu = measures_by_N[N]
            sup_f = float(np.max(np.abs(f(mu.positions))))
            report.margin("pairing_bounded", sup_f * np.abs(mu.weights).sum() - abs(pair(mu, f)))
        monotone.append(_is_decreasing(vals))
    report.metadata["monotone"] = monotone
    return report


def initial_weak_star_probe(m0: InitialMeasure, N_list, f_battery,
                            rule: str = "equal-mass") -> DiagnosticReport:
    """|m^(N)(0)(f) - m0(f)| per test function, m0(f) by adaptive quadrature."""
    Ns = list(N_list)
    report = DiagnosticReport(metadata={"probe": "initial-weak-star", "N": Ns, "rule": rule})
    measures = {N: quantize(m0, N, rule).measure for N in Ns}
    monotone = []
    for i, f in enumerate(f_battery):
        exact = m0.integrate(f)
        errs = [abs(pair(measures[N], f) - exact) for N in Ns]
        for N, e in zip(Ns, errs):
            report.add(0.0, f"pairing_error[f{i}][{N}]", e)
        monotone.append(_is_decreasing(errs))
    report.metadata["monotone"] = monotone
    return report


def energy_identity_gap(kernel: CHKernel, state: PeakonState) -> float:
    """Relative gap between ||u||_alpha^2 and 2H (zero up to roundoff)."""
    h = h1_norm_sq(kernel, state)
    return abs(h - 2 * hamiltonian(kernel, state)) / max(abs(h), 1e-300)
