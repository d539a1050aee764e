"""N-peakon system: right-hand side, integrators, invariants and a priori bounds.

Positions x_j and momenta p_j evolve by

    x_j' = (1/2a) sum_i p_i exp(-|x_j - x_i|/a)
    p_j' = (1/2a^2) p_j sum_{i != j} p_i sgn(x_j - x_i) exp(-|x_j - x_i|/a)

with sgn(0) = 0.  This is Hamiltonian with H = (1/2) sum_ij p_i p_j G(x_i - x_j).
For positive momenta the ordering x_1 < ... < x_N persists for all time.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .greens import CHKernel
from .measures import DiscreteMeasure


class InvalidState(ValueError):
    pass


class StepRejected(RuntimeError):
    pass


class InvariantBreach(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class PeakonState:
    t: float
    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        p = np.array(self.p, dtype=float).reshape(-1)
        if x.shape != p.shape:
            raise InvalidState("x and p must have the same length")
        x.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def momentum(self) -> float:
        return math.fsum(self.p.tolist())

    @property
    def measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.x, self.p)

    def is_valid(self, min_gap: float = 0.0) -> bool:
        return bool(
            np.all(np.isfinite(self.x))
            and np.all(np.isfinite(self.p))
            and np.all(np.diff(self.x) > min_gap)
            and np.all(self.p > 0)
        )

    def validate(self) -> "PeakonState":
        if not np.all(np.diff(self.x) > 0):
            raise InvalidState("positions must be strictly increasing")
        if not np.all(self.p > 0):
            raise InvalidState("momenta must be strictly positive")
        return self

    def to_dict(self) -> dict:
        return {"t": self.t, "x": self.x.tolist(), "p": self.p.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PeakonState":
        d = json.loads(text)
        return cls(d["t"], d["x"], d["p"])


def _check(state: PeakonState):
    if not state.is_valid():
        raise InvalidState(
            "state must have strictly increasing positions and positive momenta"
        )


def rhs_reference(kernel: CHKernel, state: PeakonState) -> tuple[np.ndarray, np.ndarray]:
    """Direct O(N^2) double loop, kept deliberately naive as the trusted oracle."""
    _check(state)
    a = kernel.alpha
    x, p = state.x.tolist(), state.p.tolist()
    n = len(x)
    dx = [0.0] * n
    dp = [0.0] * n
    for j in range(n):
        sx = 0.0
        sp = 0.0
        for i in range(n):
            d = x[j] - x[i]
            e = math.exp(-abs(d) / a)
            sx += p[i] * e
            if i != j:
                sgn = (d > 0) - (d < 0)
                sp += p[i] * sgn * e
        dx[j] = sx / (2 * a)
        dp[j] = p[j] * sp / (2 * a * a)
    return np.array(dx), np.array(dp)


def rhs_fast(kernel: CHKernel, state: PeakonState) -> tuple[np.ndarray, np.ndarray]:
    """O(N) evaluation by forward/backward scans over the sorted particles.

    left[j]  = sum_{i<j} p_i exp(-(x_j - x_i)/a)
    right[j] = sum_{i>j} p_i exp(-(x_i - x_j)/a)
    Each scan renormalises to the current particle, so every stored factor is
    exp(-gap/a) in [0, 1] and nothing can overflow.
    """
    _check(state)
    return _rhs_fast_arrays(kernel.alpha, state.x, state.p)


def _rhs_fast_arrays(a: float, x: np.ndarray, p: np.ndarray):
    n = x.size
    decay = np.exp(-np.diff(x) / a).tolist()
    pl = p.tolist()
    left = [0.0] * n
    right = [0.0] * n
    acc = 0.0
    for j in range(1, n):
        acc = (acc + pl[j - 1]) * decay[j - 1]
        left[j] = acc
    acc = 0.0
    for j in range(n - 2, -1, -1):
        acc = (acc + pl[j + 1]) * decay[j]
        right[j] = acc
    left = np.array(left)
    right = np.array(right)
    dx = (p + left + right) / (2 * a)
    dp = p * (left - right) / (2 * a * a)
    return dx, dp


# ---------------------------------------------------------------------------
# integration

_DP_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_DP_E = _DP_B - np.array(
    [5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)

SCHEMES = ("rk4", "rk45")
MAX_HALVINGS = 40
MIN_GAP_FACTOR = 1e-13


def _f(kernel, y, n):
    dx, dp = _rhs_fast_arrays(kernel.alpha, y[:n], y[n:])
    return np.concatenate([dx, dp])


def _y_ok(y, n, min_gap):
    x, p = y[:n], y[n:]
    return bool(np.all(np.isfinite(y)) and np.all(np.diff(x) > min_gap) and np.all(p > 0))


def _rk4(kernel, y, h, n, k1=None):
    k1 = _f(kernel, y, n) if k1 is None else k1
    k2 = _f(kernel, y + 0.5 * h * k1, n)
    k3 = _f(kernel, y + 0.5 * h * k2, n)
    k4 = _f(kernel, y + h * k3, n)
    return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _dp45(kernel, y, h, n, k1):
    ks = [k1]
    for s in range(1, 7):
        ys = y + h * sum(a * k for a, k in zip(_DP_A[s], ks) if a != 0)
        ks.append(_f(kernel, ys, n))
    y_new = y + h * sum(b * k for b, k in zip(_DP_B, ks) if b != 0)
    err = h * sum(e * k for e, k in zip(_DP_E, ks) if e != 0)
    # FSAL: the seventh stage is f(y_new)
    return y_new, err, ks[6]


def _err_norm(err, y, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_h(kernel, y, f0, n, rtol, atol, span):
    scale = atol + rtol * np.abs(y)
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y + h0 * f0
    f1 = _f(kernel, y1, n)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


@dataclass
class Trajectory:
    """Accepted integrator nodes with derivatives, for cubic Hermite dense output."""

    kernel: CHKernel
    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    dx: np.ndarray
    dp: np.ndarray
    scheme: str = "rk45"
    stats: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t1(self) -> float:
        return float(self.t[-1])

    def state(self, k: int) -> PeakonState:
        return PeakonState(self.t[k], self.x[k], self.p[k])

    @property
    def initial(self) -> PeakonState:
        return self.state(0)

    @property
    def final(self) -> PeakonState:
        return self.state(-1)

    def __len__(self):
        return self.t.size

    def states(self):
        for k in range(len(self)):
            yield self.state(k)

    def at(self, t: float) -> PeakonState:
        """State at time t by cubic Hermite interpolation between nodes."""
        if t < self.t[0] - 1e-12 or t > self.t[-1] + 1e-12:
            raise ValueError(f"t={t} outside trajectory span [{self.t0}, {self.t1}]")
        k = int(np.searchsorted(self.t, t, side="right")) - 1
        k = min(max(k, 0), len(self) - 2) if len(self) > 1 else 0
        if len(self) == 1 or t == self.t[k]:
            return PeakonState(t, self.x[k], self.p[k])
        h = self.t[k + 1] - self.t[k]
        s = (t - self.t[k]) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)

        def herm(v, dv):
            return h00 * v[k] + h10 * h * dv[k] + h01 * v[k + 1] + h11 * h * dv[k + 1]

        return PeakonState(t, herm(self.x, self.dx), herm(self.p, self.dp))

    def sample(self, times) -> list[PeakonState]:
        return [self.at(float(t)) for t in times]


def step(
    kernel: CHKernel,
    state: PeakonState,
    dt: float,
    scheme: str = "rk45",
    rtol: float = 1e-10,
    atol: float = 1e-10,
) -> PeakonState:
    """Advance ``state`` by exactly ``dt``.

    ``rk4`` takes one classical step; ``rk45`` takes as many adaptive
    Dormand-Prince substeps as the tolerances require.
    """
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    _check(state)
    if dt == 0:
        return state
    if scheme == "rk4":
        n = state.n
        y = np.concatenate([state.x, state.p])
        y_new = _rk4(kernel, y, dt, n)
        new = PeakonState(state.t + dt, y_new[:n], y_new[n:])
        if not new.is_valid():
            raise InvariantBreach(
                f"ordering or positivity lost after RK4 step dt={dt}; reduce dt"
            )
        return new
    if scheme == "rk45":
        return integrate(kernel, state, dt, scheme="rk45", rtol=rtol, atol=atol).final
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def integrate(
    kernel: CHKernel,
    state: PeakonState,
    T: float,
    scheme: str = "rk45",
    rtol: float = 1e-10,
    atol: float = 1e-10,
    dt: float | None = None,
    max_steps: int = 10_000_000,
) -> Trajectory:
    """Integrate from ``state.t`` over a span of length ``T``.

    Returns every accepted node.  ``dt`` is the fixed step for ``rk4`` (the
    last step is shortened to land on the end time) and the initial step
    guess for ``rk45``.
    """
    _check(state)
    if T < 0:
        raise ValueError("T must be nonnegative")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    n = state.n
    min_gap = MIN_GAP_FACTOR * kernel.alpha
    t = state.t
    t_end = state.t + T
    y = np.concatenate([state.x, state.p])
    f = _f(kernel, y, n)
    ts, ys, fs = [t], [y], [f]
    rejected = 0

    if scheme == "rk4":
        if dt is None or dt <= 0:
            raise ValueError("rk4 needs a positive fixed dt")
        nsteps = max(1, int(math.ceil(T / dt - 1e-9))) if T > 0 else 0
        for k in range(nsteps):
            t_next = t_end if k == nsteps - 1 else state.t + (k + 1) * dt
            h = t_next - t
            y = _rk4(kernel, y, h, n, k1=f)
            if not _y_ok(y, n, min_gap):
                raise InvariantBreach(
                    f"ordering or positivity lost at t={t_next}; reduce dt (={dt})"
                )
            t = t_next
            f = _f(kernel, y, n)
            ts.append(t)
            ys.append(y)
            fs.append(f)
    else:
        span = t_end - t
        h = dt if dt else (_initial_h(kernel, y, f, n, rtol, atol, span) if span > 0 else 0.0)
        halvings = 0
        while t < t_end and len(ts) <= max_steps:
            h = min(h, t_end - t)
            y_new, err, f_new = _dp45(kernel, y, h, n, f)
            if not _y_ok(y_new, n, min_gap):
                halvings += 1
                rejected += 1
                if halvings > MAX_HALVINGS:
                    raise StepRejected(
                        f"near-collision guard tripped {MAX_HALVINGS} times at t={t}"
                    )
                h *= 0.5
                continue
            en = _err_norm(err, y, y_new, rtol, atol)
            if en <= 1.0:
                halvings = 0
                # land exactly on t_end to avoid a residual sliver step
                t = t_end if t_end - (t + h) <= 1e-14 * max(1.0, abs(t_end)) else t + h
                y, f = y_new, f_new
                ts.append(t)
                ys.append(y)
                fs.append(f)
                fac = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
                h *= fac
            else:
                rejected += 1
                h *= max(0.2, 0.9 * en ** -0.2)
                if h < 1e-14 * max(1.0, abs(t)):
                    raise StepRejected(f"step size underflow at t={t}")
        if t < t_end:
            raise StepRejected(f"exceeded max_steps={max_steps} before t={t_end}")

    Y = np.array(ys)
    F = np.array(fs)
    return Trajectory(
        kernel=kernel,
        t=np.array(ts),
        x=Y[:, :n],
        p=Y[:, n:],
        dx=F[:, :n],
        dp=F[:, n:],
        scheme=scheme,
        stats={"accepted": len(ts) - 1, "rejected": rejected},
    )


# ---------------------------------------------------------------------------
# invariants and bounds


@dataclass(frozen=True)
class InvariantSet:
    H: float
    P: float
    Hn: tuple[float, ...]

    @property
    def H1(self) -> float:
        return self.Hn[0]

    @property
    def H2(self) -> float:
        return self.Hn[1]


def lax_matrix(kernel: CHKernel, state: PeakonState) -> np.ndarray:
    a = kernel.alpha
    d = np.abs(state.x[:, None] - state.x[None, :])
    return np.exp(-d / (2 * a)) / (2 * a) * state.p[None, :]


def hamiltonian(kernel: CHKernel, state: PeakonState) -> float:
    a = kernel.alpha
    d = np.abs(state.x[:, None] - state.x[None, :])
    K = np.exp(-d / a) / (2 * a)
    return 0.5 * float(state.p @ K @ state.p)


def invariants(kernel: CHKernel, state: PeakonState, n_max: int = 3) -> InvariantSet:
    """H, P and the Lax traces H_n = Tr(L^n) for n = 1..max(n_max, 2)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    L = lax_matrix(kernel, state)
    Lk = L
    traces = [float(np.trace(L))]
    for _ in range(max(n_max, 2) - 1):
        Lk = Lk @ L
        traces.append(float(np.trace(Lk)))
    return InvariantSet(H=hamiltonian(kernel, state), P=state.momentum, Hn=tuple(traces))


@dataclass(frozen=True)
class BoundReport:
    """Per-particle slack of the four a priori bounds (>= 0 means satisfied)."""

    position_lower: np.ndarray
    position_upper: np.ndarray
    momentum_lower: np.ndarray
    momentum_upper: np.ndarray

    def as_dict(self) -> dict[str, float]:
        return {
            "position_lower": float(self.position_lower.min()),
            "position_upper": float(self.position_upper.min()),
            "momentum_lower": float(self.momentum_lower.min()),
            "momentum_upper": float(self.momentum_upper.min()),
        }

    @property
    def min_slack(self) -> float:
        return min(self.as_dict().values())

    def ok(self, tol: float = 1e-9) -> bool:
        return self.min_slack >= -tol


def check_bounds(initial: PeakonState, current: PeakonState, kernel: CHKernel) -> BoundReport:
    """x0 <= x(t) <= H1 t + x0  and  p0 exp(-H1 t/a) <= p(t) <= p0 exp(H1 t/a)."""
    if initial.n != current.n:
        raise ValueError("initial and current states have different particle counts")
    t = current.t - initial.t
    if t < 0:
        raise ValueError("current state precedes the initial state")
    a = kernel.alpha
    H1 = initial.momentum / (2 * a)
    grow = math.exp(H1 * t / a)
    return BoundReport(
        position_lower=current.x - initial.x,
        position_upper=H1 * t + initial.x - current.x,
        momentum_lower=current.p - initial.p / grow,
        momentum_upper=initial.p * grow - current.p,
    )
