"""Turn a positive initial measure m0 into unit-mass N-particle initial data."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .dynamics import PeakonState
from .fields import FieldSample, sample_field
from .greens import CHKernel
from .measures import DiscreteMeasure

RULES = ("equal-mass", "equal-spacing")


class DegenerateSupport(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class InitialMeasure:
    """Either a nonnegative density on [lo, hi] or an atomic measure, unit mass.

    Construct through ``density``, ``atomic`` or one of the built-ins.
    """

    density_fn: Callable[[float], float] | None = None
    lo: float = 0.0
    hi: float = 0.0
    atoms: DiscreteMeasure | None = None
    raw_mass: float = 1.0
    name: str = "custom"

    @classmethod
    def density(cls, g, lo: float, hi: float, name: str = "custom") -> "InitialMeasure":
        if not hi > lo:
            raise ValueError("density support needs hi > lo")
        probe = np.array([g(x) for x in np.linspace(lo, hi, 257)])
        if np.any(probe < 0):
            raise ValueError("density must be nonnegative")
        mass, _ = quad(g, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)
        if not mass > 0:
            raise ValueError("density has zero mass")
        return cls(density_fn=g, lo=float(lo), hi=float(hi), raw_mass=mass, name=name)

    @classmethod
    def atomic(cls, mu: DiscreteMeasure, name: str = "atomic") -> "InitialMeasure":
        if len(mu) == 0 or np.any(mu.weights <= 0):
            raise ValueError("atomic initial measure needs positive weights")
        mass = mu.mass
        return cls(atoms=DiscreteMeasure(mu.positions, mu.weights / mass), raw_mass=mass, name=name)

    @property
    def is_atomic(self) -> bool:
        return self.atoms is not None

    def pdf(self, x: float) -> float:
        return self.density_fn(x) / self.raw_mass

    def integrate(self, f, lo=None, hi=None) -> float:
        """m0(f) for the normalised measure (adaptive quadrature or atomic sum)."""
        if self.is_atomic:
            return math.fsum((self.atoms.weights * f(self.atoms.positions)).tolist())
        lo = self.lo if lo is None else lo
        hi = self.hi if hi is None else hi
        val, _ = quad(lambda x: f(x) * self.pdf(x), lo, hi, epsabs=1e-13, epsrel=1e-12, limit=400)
        return val

    def cdf_inverse(self, qs, nodes: int = 64) -> np.ndarray:
        """Quantiles by root bracketing on the quadrature-accumulated CDF."""
        edges = np.linspace(self.lo, self.hi, nodes + 1)
        cells = [
            quad(self.pdf, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
            for a, b in zip(edges[:-1], edges[1:])
        ]
        cum = np.concatenate([[0.0], np.cumsum(cells)])
        cum /= cum[-1]
        out = []
        for q in np.asarray(qs, dtype=float):
            k = int(np.clip(np.searchsorted(cum, q, side="right") - 1, 0, nodes - 1))
            a = edges[k]

            def resid(x, k=k, a=a, q=q):
                return cum[k] + quad(self.pdf, a, x, epsabs=1e-15, epsrel=1e-13)[0] - q

            lo_v, hi_v = resid(edges[k]), resid(edges[k + 1])
            if lo_v >= 0:
                out.append(edges[k])
            elif hi_v <= 0:
                out.append(edges[k + 1])
            else:
                out.append(brentq(resid, edges[k], edges[k + 1], xtol=1e-12, rtol=1e-15))
        return np.array(out)


def uniform(a: float = 0.0, b: float = 1.0) -> InitialMeasure:
    return InitialMeasure.density(lambda x: 1.0, a, b, name="uniform")


def gaussian(mean: float = 0.0, sigma: float = 1.0, width: float = 8.0) -> InitialMeasure:
    """Gaussian truncated to mean +- width*sigma."""
    return InitialMeasure.density(
        lambda x: math.exp(-0.5 * ((x - mean) / sigma) ** 2),
        mean - width * sigma,
        mean + width * sigma,
        name="gaussian",
    )


def cosine_bump(center: float = 0.0, half_width: float = 1.0) -> InitialMeasure:
    return InitialMeasure.density(
        lambda x: 0.5 * (1.0 + math.cos(math.pi * (x - center) / half_width)),
        center - half_width,
        center + half_width,
        name="cosine-bump",
    )


BUILTIN_DENSITIES = {"uniform": uniform, "gaussian": gaussian, "cosine-bump": cosine_bump}


def _unit_mass(w: np.ndarray) -> np.ndarray:
    w = w / math.fsum(w.tolist())
    w[-1] = 1.0 - math.fsum(w[:-1].tolist())
    return w


def _cluster(mu: DiscreteMeasure, N: int) -> DiscreteMeasure:
    # heuristic: repeatedly merge the closest adjacent pair into its centroid
    x = mu.positions.tolist()
    w = mu.weights.tolist()
    while len(x) > N:
        gaps = np.diff(x)
        i = int(np.argmin(gaps))
        m = w[i] + w[i + 1]
        x[i : i + 2] = [(w[i] * x[i] + w[i + 1] * x[i + 1]) / m]
        w[i : i + 2] = [m]
    return DiscreteMeasure(np.array(x), np.array(w))


def quantize(m0: InitialMeasure, N: int, rule: str = "equal-mass") -> PeakonState:
    """N-particle initial data whose measure tends weak-* to m0 as N grows."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}; expected one of {RULES}")
    if m0.is_atomic:
        mu = m0.atoms if len(m0.atoms) <= N else _cluster(m0.atoms, N)
        return PeakonState(0.0, mu.positions, mu.weights)

    if rule == "equal-mass":
        x = m0.cdf_inverse((np.arange(N) + 0.5) / N)
        p = np.full(N, 1.0 / N)
    else:
        edges = np.linspace(m0.lo, m0.hi, N + 1)
        masses = np.array(
            [
                quad(m0.pdf, a, b, epsabs=1e-15, epsrel=1e-13)[0]
                for a, b in zip(edges[:-1], edges[1:])
            ]
        )
        keep = masses > 0
        x = 0.5 * (edges[:-1] + edges[1:])[keep]
        p = masses[keep]
    if np.any(np.diff(x) <= 0):
        raise DegenerateSupport(f"fewer than {N} distinct quantiles in {m0.name} density")
    return PeakonState(0.0, x, _unit_mass(p))


def reconstruct_u0(
    kernel: CHKernel, particles: PeakonState, x_min: float | None = None,
    x_max: float | None = None, n: int = 1001,
) -> FieldSample:
    """Sample u(0) = G * m(0) on a uniform grid (default: support +- 10 alpha)."""
    pad = 10 * kernel.alpha
    lo = particles.x[0] - pad if x_min is None else x_min
    hi = particles.x[-1] + pad if x_max is None else x_max
    return sample_field(kernel, particles.measure, lo, hi, n)
