"""Discrete signed measures on the line and the norms/metrics used on them.

The bounded-Lipschitz (Dudley) norm is

    ||mu||_BL = sup { mu(f) : f in C_0, ||f||_inf + Lip(f) <= 1 }.

On a finite support x_1 < ... < x_M it is an LP in (f_1..f_M, beta):
|f_i| <= beta and |f_{i+1} - f_i| <= (1 - beta)(x_{i+1} - x_i), 0 <= beta <= 1.
Adjacent constraints suffice in one dimension, and any feasible point extends
to a member of the ball by linear interpolation plus tails falling to zero at
slope (1 - beta).  When the optimum sits at beta = 1 the supremum is only
approached (wide tents), so the LP value is the supremum, not a maximum.
"""
from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import simplex
from .greens import CHKernel, constants, convolve

DEFAULT_ATOM_CAP = 4096
SNAP_GAP = 1e-13


class AtomCapExceeded(ValueError):
    pass


class MassMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite weighted sum of Dirac masses with strictly increasing positions.

    Use ``DiscreteMeasure.from_atoms`` to build one from unsorted data;
    duplicate positions are merged and exactly-zero weights dropped.
    """

    positions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float).reshape(-1)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if pos.shape != w.shape:
            raise ValueError("positions and weights must have the same length")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(w))):
            raise ValueError("positions and weights must be finite")
        if np.any(np.diff(pos) <= 0):
            raise ValueError("positions must be strictly increasing; use from_atoms")
        pos.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_atoms(cls, positions, weights) -> "DiscreteMeasure":
        pos = np.asarray(positions, dtype=float).reshape(-1)
        w = np.asarray(weights, dtype=float).reshape(-1)
        if pos.shape != w.shape:
            raise ValueError("positions and weights must have the same length")
        if pos.size == 0:
            return cls.zero()
        order = np.argsort(pos, kind="stable")
        pos, w = pos[order], w[order]
        uniq, start = np.unique(pos, return_index=True)
        merged = np.add.reduceat(w, start)
        keep = merged != 0.0
        return cls(uniq[keep], merged[keep])

    @classmethod
    def zero(cls) -> "DiscreteMeasure":
        return cls(np.zeros(0), np.zeros(0))

    @classmethod
    def dirac(cls, x: float, weight: float = 1.0) -> "DiscreteMeasure":
        return cls.from_atoms([x], [weight])

    def __len__(self):
        return self.positions.size

    def __iter__(self):
        return iter(zip(self.positions.tolist(), self.weights.tolist()))

    def __add__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        return DiscreteMeasure.from_atoms(
            np.concatenate([self.positions, other.positions]),
            np.concatenate([self.weights, other.weights]),
        )

    def __neg__(self):
        return DiscreteMeasure(self.positions, -self.weights)

    def __sub__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        return self + (-other)

    def __mul__(self, c: float) -> "DiscreteMeasure":
        if c == 0:
            return DiscreteMeasure.zero()
        return DiscreteMeasure(self.positions, c * self.weights)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return np.array_equal(self.positions, other.positions) and np.array_equal(
            self.weights, other.weights
        )

    def __repr__(self):
        atoms = ", ".join(f"{w:g}@{x:g}" for x, w in self)
        return f"DiscreteMeasure([{atoms}])"

    @property
    def mass(self) -> float:
        return math.fsum(self.weights.tolist())

    def to_json(self) -> str:
        return json.dumps([[x, w] for x, w in self])

    @classmethod
    def from_json(cls, text: str) -> "DiscreteMeasure":
        data = json.loads(text)
        if not isinstance(data, list) or any(
            not isinstance(a, list) or len(a) != 2 for a in data
        ):
            raise ValueError("expected a JSON array of [position, weight] pairs")
        if not data:
            return cls.zero()
        arr = np.asarray(data, dtype=float)
        return cls.from_atoms(arr[:, 0], arr[:, 1])


def tv_norm(mu: DiscreteMeasure) -> float:
    return math.fsum(np.abs(mu.weights).tolist())


def pair(mu: DiscreteMeasure, f) -> float:
    """mu(f) = sum_i w_i f(x_i).  ``f`` must accept an array of positions."""
    if len(mu) == 0:
        return 0.0
    vals = np.asarray(f(mu.positions), dtype=float)
    return math.fsum((mu.weights * vals).tolist())


@dataclass(frozen=True)
class BLWitness:
    beta: float
    positions: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def check(self, tol: float = 1e-12) -> bool:
        if np.any(np.abs(self.values) > self.beta + tol):
            return False
        gaps = np.diff(self.positions)
        jumps = np.abs(np.diff(self.values))
        return bool(np.all(jumps <= (1.0 - self.beta) * gaps + tol))


def _bl_lp(pos: np.ndarray, c: np.ndarray):
    """Solve the (f, beta) LP for signed weights ``c`` on sorted ``pos``.

    f is shifted to g = f + beta >= 0 so every variable is nonnegative and
    the origin is feasible: g_i <= 2 beta, +-(g_{i+1} - g_i) + gap_i beta <= gap_i,
    beta <= 1.

    Gaps below ``SNAP_GAP`` relative to the coordinate scale are set to zero,
    which pins f to one value across them.  Such gaps make the basis
    numerically singular, and pinning keeps the witness feasible for the true
    positions while lowering the value by at most sum|c| * gap.
    """
    M = pos.size
    gaps = np.diff(pos)
    gaps = np.where(gaps < SNAP_GAP * max(1.0, float(np.abs(pos).max())), 0.0, gaps)
    nvar = M + 1
    nrow = M + 2 * (M - 1) + 1
    A = np.zeros((nrow, nvar))
    b = np.zeros(nrow)
    idx = np.arange(M)
    A[idx, idx] = 1.0
    A[idx, M] = -2.0
    r = M
    for i, gap in enumerate(gaps):
        A[r, i + 1], A[r, i], A[r, M] = 1.0, -1.0, gap
        A[r + 1, i], A[r + 1, i + 1], A[r + 1, M] = 1.0, -1.0, gap
        b[r] = b[r + 1] = gap
        r += 2
    A[r, M] = 1.0
    b[r] = 1.0
    obj = np.concatenate([c, [-c.sum()]])
    res = simplex.maximize(obj, A, b)
    beta = float(res.x[M])
    f = res.x[:M] - beta
    # the objective row accumulates roundoff; recompute from the primal point
    value = math.fsum((c * f).tolist())
    return value, beta, f


def bl_norm(mu: DiscreteMeasure, cap: int = DEFAULT_ATOM_CAP) -> tuple[float, BLWitness]:
    if len(mu) > cap:
        raise AtomCapExceeded(
            f"{len(mu)} atoms exceeds the exact-LP cap of {cap}; subsample or raise the cap"
        )
    if len(mu) == 0:
        return 0.0, BLWitness(0.0, np.zeros(0), np.zeros(0))
    value, beta, f = _bl_lp(mu.positions, mu.weights)
    return max(value, 0.0), BLWitness(beta, mu.positions.copy(), f)


def bl_distance(
    mu: DiscreteMeasure, nu: DiscreteMeasure, cap: int = DEFAULT_ATOM_CAP
) -> tuple[float, BLWitness]:
    """Exact d(mu, nu) = ||mu - nu||_BL and an optimal test function."""
    total = len(mu) + len(nu)
    if total > cap:
        raise AtomCapExceeded(
            f"{total} combined atoms exceeds the exact-LP cap of {cap}; "
            "subsample or raise the cap"
        )
    return bl_norm(mu - nu, cap=cap)


# ---------------------------------------------------------------------------
# brute-force oracle: scan beta, solve each fixed-beta chain problem exactly


def _interp(x, xs, ys):
    # xs increasing; linear extrapolation is never needed by callers
    if x <= xs[0]:
        return ys[0]
    if x >= xs[-1]:
        return ys[-1]
    k = bisect.bisect_right(xs, x) - 1
    x0, x1 = xs[k], xs[k + 1]
    return ys[k] + (ys[k + 1] - ys[k]) * (x - x0) / (x1 - x0)


def _window_max(xs, ys, r, lo, hi):
    """x -> max{ V(y) : |y - x| <= r } for concave piecewise-linear V, on [lo, hi].

    Plain lists: the breakpoint counts are tiny and numpy call overhead dominates.
    """
    top = max(ys)
    thresh = top - 1e-15 * max(1.0, abs(top))
    on_top = [k for k, v in enumerate(ys) if v >= thresh]
    k1, k2 = on_top[0], on_top[-1]
    nx = [v - r for v in xs[: k1 + 1]] + [v + r for v in xs[k2:]]
    ny = ys[: k1 + 1] + ys[k2:]
    out_x, out_y = [lo], [_interp(lo, nx, ny)]
    for x, y in zip(nx, ny):
        if lo < x < hi and x > out_x[-1]:
            out_x.append(x)
            out_y.append(y)
    if hi > out_x[-1]:
        out_x.append(hi)
        out_y.append(_interp(hi, nx, ny))
    return out_x, out_y


def _argmax(xs, ys):
    return xs[max(range(len(ys)), key=ys.__getitem__)]


def chain_max(c: np.ndarray, gaps: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    """max sum c_i f_i  s.t. |f_i| <= beta, |f_{i+1} - f_i| <= (1 - beta) gap_i.

    Forward pass propagates the concave value function of the prefix problem,
    backward pass recovers a feasible maximiser.  Returns the objective at
    that maximiser, so the result never exceeds the true optimum.
    """
    c = np.asarray(c, dtype=float)
    M = c.size
    if beta <= 0.0:
        return 0.0, np.zeros(M)
    cl = c.tolist()
    radii = [(1.0 - beta) * g for g in np.asarray(gaps, dtype=float).tolist()]
    xs = [-beta, beta]
    ys = [cl[0] * v for v in xs]
    stages = [(xs, ys)]
    for i in range(1, M):
        xs, ys = _window_max(xs, ys, radii[i - 1], -beta, beta)
        ys = [y + cl[i] * x for x, y in zip(xs, ys)]
        stages.append((xs, ys))
    f = np.empty(M)
    f[-1] = _argmax(*stages[-1])
    for i in range(M - 2, -1, -1):
        lo = max(f[i + 1] - radii[i], -beta)
        hi = min(f[i + 1] + radii[i], beta)
        f[i] = min(max(_argmax(*stages[i]), lo), hi)
    return math.fsum((c * f).tolist()), f


def bl_distance_oracle(
    mu: DiscreteMeasure, nu: DiscreteMeasure, grid_step: float = 1e-3, refine: bool = True
) -> float:
    """Lower bound on d(mu, nu) from a beta grid scan (+ golden refinement).

    The fixed-beta value is concave in beta, so golden-section search on the
    bracket around the best grid point converges to the true supremum.
    """
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    diff = mu - nu
    if len(diff) == 0:
        return 0.0
    c, gaps = diff.weights, np.diff(diff.positions)

    def value(beta):
        return chain_max(c, gaps, beta)[0]

    n = int(math.ceil(1.0 / grid_step))
    betas = np.minimum(np.arange(n + 1) * grid_step, 1.0)
    vals = np.array([value(b) for b in betas])
    k = int(np.argmax(vals))
    best = float(vals[k])
    if refine:
        a, b = betas[max(k - 1, 0)], betas[min(k + 1, n)]
        g = (math.sqrt(5.0) - 1.0) / 2.0
        x1, x2 = b - g * (b - a), a + g * (b - a)
        v1, v2 = value(x1), value(x2)
        for _ in range(80):
            if v1 < v2:
                a, x1, v1 = x1, x2, v2
                x2 = a + g * (b - a)
                v2 = value(x2)
            else:
                b, x2, v2 = x2, x1, v1
                x1 = b - g * (b - a)
                v1 = value(x1)
            best = max(best, v1, v2)
            if b - a < 1e-13:
                break
    return max(best, 0.0)


def w1_distance(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """1-Wasserstein distance, int |F_mu - F_nu| dx, for equal-mass measures."""
    m1, m2 = mu.mass, nu.mass
    if abs(m1 - m2) > 1e-12 or m1 <= 0 or m2 <= 0:
        raise MassMismatch(f"W1 needs equal positive masses, got {m1!r} and {m2!r}")
    diff = mu - nu
    if len(diff) < 2:
        return 0.0
    cdf = np.cumsum(diff.weights)[:-1]
    return math.fsum((np.abs(cdf) * np.diff(diff.positions)).tolist())


# ---------------------------------------------------------------------------
# Young-type inequality ||G^(k) * mu||_1 <= ||G^(k)||_BV ||mu||_BL


def _simpson(f, a: float, b: float, h: float) -> float:
    n = max(2, 2 * int(math.ceil((b - a) / (2 * h))))
    x = np.linspace(a, b, n + 1)
    y = f(x)
    hh = (b - a) / n
    return hh / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def conv_l1_norm(
    kernel: CHKernel, mu: DiscreteMeasure, order: int, h: float | None = None, tail: float = 40.0
) -> float:
    """int |(G^(order) * mu)(x)| dx by composite Simpson.

    Panels break at the atoms (kinks/jumps of the integrand) and at the single
    possible sign change inside each panel, so |.| is smooth on every panel.
    """
    if len(mu) == 0:
        return 0.0
    a = kernel.alpha
    h = 0.02 * a if h is None else h
    pos = mu.positions
    edges = np.concatenate([[pos[0] - tail * a], pos, [pos[-1] + tail * a]])
    total = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        # one-sided evaluation keeps the panel's own limit at atoms on its ends
        def g(x, lo=lo, hi=hi):
            x = np.asarray(x, dtype=float)
            left = convolve(kernel, mu, x, order, side=+1)
            right = convolve(kernel, mu, x, order, side=-1)
            return np.where(x == lo, left, right) if order == 1 else left

        breaks = [lo, hi]
        glo, ghi = float(g(lo)), float(g(hi))
        if glo * ghi < 0:
            breaks = [lo, brentq(lambda x: float(g(x)), lo, hi, xtol=1e-15, rtol=1e-15), hi]
        for p, q in zip(breaks[:-1], breaks[1:]):
            total.append(abs(_simpson(g, p, q, h)))
    return math.fsum(total)


def young_inequality_check(
    kernel: CHKernel, order: int, mu: DiscreteMeasure, h: float | None = None
) -> tuple[float, float]:
    """Return (||G^(order) * mu||_1, ||G^(order)||_BV * ||mu||_BL)."""
    lhs = conv_l1_norm(kernel, mu, order, h=h)
    rhs = constants(kernel).bv[order] * bl_norm(mu)[0]
    return lhs, rhs
