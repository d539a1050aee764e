"""Small dense primal simplex for  max c.x  s.t.  A x <= b, x >= 0, b >= 0.

Only the origin-feasible case is supported (no phase one), which is all the
bounded-Lipschitz LP needs.  Pivoting follows Bland's rule: the entering
column is the lowest-index improving one and ratio-test ties go to the
lowest basic variable index, so the method cannot cycle.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg


class LPError(RuntimeError):
    pass


class Unbounded(LPError):
    pass


@dataclass
class LPResult:
    x: np.ndarray
    objective: float
    pivots: int
    basis: np.ndarray | None = None


def maximize(c, A, b, tol: float = 1e-12, max_pivots: int | None = None) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError("shape mismatch between c, A and b")
    if np.any(b < 0):
        raise LPError("right-hand side must be nonnegative (origin must be feasible)")

    # tableau rows: [A | I | b]; last row holds reduced costs -c (so we stop
    # when no entry of the objective row is negative)
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -c
    basis = np.arange(n, n + m)

    if max_pivots is None:
        max_pivots = 50 * (n + m) + 1000
    pivots = 0
    while True:
        obj = T[m, :-1]
        improving = np.flatnonzero(obj < -tol)
        if improving.size == 0:
            break
        j = improving[0]
        col = T[:m, j]
        pos = col > tol
        if not pos.any():
            raise Unbounded(f"objective unbounded along column {j}")
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / col[pos]
        rmin = ratios.min()
        ties = np.flatnonzero(ratios <= rmin + tol * max(1.0, abs(rmin)))
        i = ties[np.argmin(basis[ties])]

        T[i] /= T[i, j]
        f = T[:, j].copy()
        f[i] = 0.0
        T -= np.outer(f, T[i])
        basis[i] = j
        pivots += 1
        if pivots > max_pivots:
            raise LPError(f"simplex exceeded {max_pivots} pivots")

    xb, extra = _polish(A, b, c, basis, T[:m, -1], tol, max_pivots - pivots)
    x = np.zeros(n + m)
    x[basis] = xb
    return LPResult(x=x[:n], objective=float(c @ x[:n]), pivots=pivots + extra, basis=basis.copy())


def _exact_residual(B, b, x) -> np.ndarray:
    """b - B x with every product and sum done in exact rationals, then rounded."""
    r = np.empty(b.size)
    xf = [Fraction(v) for v in x.tolist()]
    for i in range(b.size):
        nz = np.flatnonzero(B[i])
        acc = Fraction(b[i]) - sum((Fraction(B[i, j]) * xf[j] for j in nz.tolist()), Fraction(0))
        r[i] = float(acc)
    return r


def _refined_solve(lu, M, rhs, trans: int = 0, sweeps: int = 4):
    """Solve M z = rhs (or M^T z = rhs) with exact-residual iterative refinement."""
    Mt = M.T if trans else M
    z = scipy.linalg.lu_solve(lu, rhs, trans=trans, check_finite=False)
    if not np.all(np.isfinite(z)):
        return None
    for _ in range(sweeps):
        r = _exact_residual(Mt, rhs, z)
        if not np.any(r):
            break
        z = z + scipy.linalg.lu_solve(lu, r, trans=trans, check_finite=False)
    scale = max(1.0, np.abs(rhs).max(), (np.abs(Mt) @ np.abs(z)).max())
    if np.abs(Mt @ z - rhs).max() > 1e-9 * scale:
        return None
    return z


def _column_products(Afull, y) -> np.ndarray:
    """y.a_j for every column, accumulated in exact rationals."""
    yf = [Fraction(v) for v in y.tolist()]
    out = np.empty(Afull.shape[1])
    for j in range(Afull.shape[1]):
        nz = np.flatnonzero(Afull[:, j]).tolist()
        out[j] = float(sum((Fraction(Afull[i, j]) * yf[i] for i in nz), Fraction(0)))
    return out


def _polish(A, b, c, basis, fallback, tol, max_iter):
    """Refactor the final basis from the original data and finish with exact-ish pivots.

    The tableau accumulates roundoff with every pivot, badly so after a pivot
    on a tiny coefficient, and can stop at a basis that is slightly primal
    infeasible or not quite dual feasible.  Here the basic solution, the
    duals and the reduced costs are recomputed from A, b and c with refined
    solves.  Dual simplex steps repair negative basic values and primal steps
    repair positive reduced costs (both with Bland-style lowest-index ties)
    until the basis is certified optimal.  Falls back to the last good values
    if a basis matrix is numerically singular.  Updates ``basis`` in place.
    """
    m, n = A.shape
    Afull = np.hstack([A, np.eye(m)])
    cfull = np.concatenate([c, np.zeros(m)])
    dtol = tol * max(1.0, np.abs(c).max())
    ftol = tol * max(1.0, np.abs(b).max())
    steps, prev, undo = 0, fallback, None
    while True:
        B = Afull[:, basis]
        try:
            lu = scipy.linalg.lu_factor(B, check_finite=False)
            xb = _refined_solve(lu, B, b)
            y = _refined_solve(lu, B, cfull[basis], trans=1)
        except (ValueError, np.linalg.LinAlgError):
            xb = y = None
        if xb is None or y is None:
            if undo is not None:
                basis[undo[0]] = undo[1]
            return np.maximum(prev, 0.0), steps
        prev = xb
        if steps >= max_iter:
            return np.maximum(xb, 0.0), steps
        d = cfull - _column_products(Afull, y)
        d[basis] = 0.0
        # y is only known to working precision, so y.a_j carries that much noise
        noise = dtol + 16 * np.finfo(float).eps * (np.abs(Afull).T @ np.abs(y))
        infeasible = np.flatnonzero(xb < -ftol)
        if infeasible.size:
            # dual step: the lowest-index negative basic variable leaves
            i = infeasible[np.argmin(basis[infeasible])]
            e = np.zeros(m)
            e[i] = 1.0
            z = _refined_solve(lu, B, e, trans=1)
            if z is None:
                return np.maximum(xb, 0.0), steps
            row = _column_products(Afull, z)
            row[basis] = 0.0
            cand = np.flatnonzero(row < -(tol + 16 * np.finfo(float).eps * (np.abs(Afull).T @ np.abs(z))))
            if cand.size == 0:
                raise LPError("polish found the LP infeasible")
            # tiny positive reduced costs are roundoff; treat them as zero
            ratios = np.minimum(d[cand], 0.0) / row[cand]
            rmin = ratios.min()
            j = cand[np.flatnonzero(ratios <= rmin + tol * max(1.0, abs(rmin)))[0]]
        else:
            improving = np.flatnonzero(d > noise)
            if improving.size == 0:
                return np.maximum(xb, 0.0), steps
            j = improving[0]
            col = _refined_solve(lu, B, Afull[:, j])
            if col is None:
                return np.maximum(xb, 0.0), steps
            pos = col > tol
            if not pos.any():
                raise Unbounded(f"objective unbounded along column {j}")
            ratios = np.full(m, np.inf)
            ratios[pos] = np.maximum(xb[pos], 0.0) / col[pos]
            rmin = ratios.min()
            ties = np.flatnonzero(ratios <= rmin + tol * max(1.0, abs(rmin)))
            i = ties[np.argmin(basis[ties])]
        undo = (i, basis[i])
        basis[i] = j
        steps += 1
