"""Weak-form residual of the CH equation for particle solutions.

For a test function phi the residual is

    sum_i p_i(0) phi(0, x_i(0))
  + int int (phi_t - a^2 phi_txx) u
  + int int (3/2 phi_x - 1/2 a^2 phi_xxx) u^2
  + int int 1/2 a^2 phi_x u_x^2

over t >= 0.  A weak solution makes it vanish, so for peakon trajectories the
computed value is quadrature plus dense-output error only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .dynamics import Trajectory
from .greens import CHKernel, convolve
from .measures import DiscreteMeasure


class SupportNotCovered(ValueError):
    pass


def _bump_polys(kmax: int = 3) -> list[Polynomial]:
    # psi(s) = exp(1 - 1/(1 - s^2));  psi^(k) = psi * P_k(s) / q^(2k),  q = 1 - s^2
    s = Polynomial([0.0, 1.0])
    q = 1 - s**2
    polys = [Polynomial([1.0])]
    for k in range(kmax):
        P = polys[-1]
        polys.append(P.deriv() * q**2 + 4 * k * s * q * P - 2 * s * P)
    return polys


_POLYS = _bump_polys(3)


_POLY_BUMP = [(1 - Polynomial([0.0, 1.0]) ** 2) ** 4]
for _k in range(3):
    _POLY_BUMP.append(_POLY_BUMP[-1].deriv())


def poly_bump(s, k: int = 0):
    """k-th derivative of (1 - s^2)^4 on [-1, 1] (zero outside); C^3 overall."""
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) < 1.0, _POLY_BUMP[k](s), 0.0)


def bump(s, k: int = 0):
    """k-th derivative of the unit-height C-infinity bump supported on [-1, 1]."""
    s = np.asarray(s, dtype=float)
    q = 1.0 - s * s
    inside = q > 1e-3  # exp(-1000) underflows anyway
    qs = np.where(inside, q, 1.0)
    val = np.exp(1.0 - 1.0 / qs) * _POLYS[k](s) / qs ** (2 * k)
    return np.where(inside, val, 0.0)


_smooth = bump


@dataclass(frozen=True)
class TestFunction:
    """phi(t, x) = amp * b((t - t0)/st) * b((x - x0)/sx), derivatives in closed form.

    ``kind="poly"`` uses b(s) = (1 - s^2)^4, which is C^3 (all the weak form
    needs) and polynomial on its support, so Gauss-Legendre panels aligned
    with the support integrate it almost exactly.  ``kind="smooth"`` uses the
    C-infinity bump exp(1 - 1/(1 - s^2)).

    If t0 - st < 0 the support reaches the initial line and the m0 term of
    the residual is active.
    """

    __test__ = False  # not a pytest class

    t0: float
    x0: float
    st: float
    sx: float
    amp: float = 1.0
    kind: str = "poly"

    def __post_init__(self):
        if not (self.st > 0 and self.sx > 0):
            raise ValueError("test-function scales must be positive")
        if self.kind not in ("poly", "smooth"):
            raise ValueError(f"kind must be 'poly' or 'smooth', got {self.kind!r}")

    def scaled(self, c: float) -> "TestFunction":
        return TestFunction(self.t0, self.x0, self.st, self.sx, self.amp * c, self.kind)

    @property
    def t_support(self) -> tuple[float, float]:
        return (max(0.0, self.t0 - self.st), self.t0 + self.st)

    @property
    def x_support(self) -> tuple[float, float]:
        return (self.x0 - self.sx, self.x0 + self.sx)

    def _parts(self, t, x, kt, kx):
        bump = poly_bump if self.kind == "poly" else _smooth
        a = bump((np.asarray(t) - self.t0) / self.st, kt) / self.st**kt
        b = bump((np.asarray(x) - self.x0) / self.sx, kx) / self.sx**kx
        return self.amp * a * b

    def phi(self, t, x):
        return self._parts(t, x, 0, 0)

    def phi_t(self, t, x):
        return self._parts(t, x, 1, 0)

    def phi_x(self, t, x):
        return self._parts(t, x, 0, 1)

    def phi_txx(self, t, x):
        return self._parts(t, x, 1, 2)

    def phi_xxx(self, t, x):
        return self._parts(t, x, 0, 3)


@dataclass(frozen=True)
class QuadSpec:
    """Gauss-Legendre tensor rule: ``t_panels`` equal panels in t and
    ``x_panels`` equal panels in x, the latter further split at particles."""

    t_panels: int = 16
    x_panels: int = 16
    order: int = 5

    def refined(self, factor: int = 2) -> "QuadSpec":
        return QuadSpec(self.t_panels * factor, self.x_panels * factor, self.order)


def _gl_nodes(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    xi, wi = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return (a + half * (xi + 1)).ravel(), (half * wi).ravel()


def residual(
    kernel: CHKernel,
    trajectory: Trajectory,
    m0: DiscreteMeasure,
    phi: TestFunction,
    quad: QuadSpec = QuadSpec(),
) -> float:
    t_lo, t_hi = phi.t_support
    if t_lo < trajectory.t0 - 1e-12 or t_hi > trajectory.t1 + 1e-12:
        raise SupportNotCovered(
            f"test function needs t in [{t_lo}, {t_hi}], trajectory covers "
            f"[{trajectory.t0}, {trajectory.t1}]"
        )
    if phi.t0 - phi.st < 0 and trajectory.t0 > 0:
        raise SupportNotCovered("test function touches t=0 but trajectory starts later")

    a2 = kernel.alpha**2
    terms = []
    if phi.t0 - phi.st < 0:
        terms.append(math.fsum((m0.weights * phi.phi(0.0, m0.positions)).tolist()))

    x_lo, x_hi = phi.x_support
    base = np.linspace(x_lo, x_hi, quad.x_panels + 1)
    t_nodes, t_w = _gl_nodes(np.linspace(t_lo, t_hi, quad.t_panels + 1), quad.order)
    for t, wt in zip(t_nodes, t_w):
        state = trajectory.at(float(t))
        kinks = state.x[(state.x > x_lo) & (state.x < x_hi)]
        edges = np.union1d(base, kinks)
        xs, wx = _gl_nodes(edges, quad.order)
        mu = state.measure
        u = convolve(kernel, mu, xs, 0)
        ux = convolve(kernel, mu, xs, 1)
        integrand = (
            (phi.phi_t(t, xs) - a2 * phi.phi_txx(t, xs)) * u
            + (1.5 * phi.phi_x(t, xs) - 0.5 * a2 * phi.phi_xxx(t, xs)) * u * u
            + 0.5 * a2 * phi.phi_x(t, xs) * ux * ux
        )
        terms.append(wt * math.fsum((wx * integrand).tolist()))
    return math.fsum(terms)


def residual_battery(kernel, trajectory, m0, battery, quad: QuadSpec = QuadSpec()):
    from .analysis import DiagnosticReport

    battery = list(battery)
    if not battery:
        raise ValueError("residual battery is empty")
    report = DiagnosticReport(metadata={"probe": "weak-form residual", "quad": vars(quad)})
    vals = []
    for i, phi in enumerate(battery):
        r = residual(kernel, trajectory, m0, phi, quad)
        vals.append(abs(r))
        report.add(phi.t0, f"residual[{i}]", r)
    report.metadata["max_abs_residual"] = max(vals)
    return report


def default_battery(trajectory: Trajectory, count: int = 5, seed: int = 0) -> list[TestFunction]:
    """Bumps centred on particle paths, strictly inside t > 0."""
    rng = np.random.default_rng(seed)
    T0, T1 = trajectory.t0, trajectory.t1
    a = trajectory.kernel.alpha
    span = T1 - T0
    out = []
    for _ in range(count):
        st = span * rng.uniform(0.15, 0.3)
        t0 = rng.uniform(T0 + st + 1e-3 * span, T1 - st - 1e-3 * span)
        s = trajectory.at(t0)
        x0 = float(s.x[rng.integers(s.n)]) + rng.uniform(-0.5, 0.5) * a
        out.append(TestFunction(t0, x0, st, rng.uniform(1.0, 2.5) * a))
    return out


def refinement_order(kernel, trajectory, m0, phi: TestFunction, coarse: QuadSpec = QuadSpec(2, 2),
                     factor: int = 2) -> tuple[float, float, float]:
    """Observed order log(r_coarse / r_fine) / log(factor) of the residual under refinement.

    Returns (order, r_coarse, r_fine).  Pick ``coarse`` well above the roundoff
    floor, otherwise the ratio measures noise.
    """
    r0 = abs(residual(kernel, trajectory, m0, phi, coarse))
    r1 = abs(residual(kernel, trajectory, m0, phi, coarse.refined(factor)))
    return math.log(r0 / max(r1, 1e-300)) / math.log(factor), r0, r1
