"""Camassa-Holm Green's function G(x) = exp(-|x|/alpha) / (2 alpha).

G inverts the modified Helmholtz operator (1 - alpha^2 d^2/dx^2).  Its
derivative is a BV function with a single jump at the origin; we use the
left-continuous representative there, so ``eval_Gp(k, 0) == 1/(2 alpha^2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KernelConstants:
    sup_G: float
    sup_Gp: float
    var_G: float
    var_Gp: float
    l1_G: float
    l1_Gp: float
    bv_G: float
    bv_Gp: float
    holder_L: float

    @property
    def sup(self) -> tuple[float, float]:
        return (self.sup_G, self.sup_Gp)

    @property
    def var(self) -> tuple[float, float]:
        return (self.var_G, self.var_Gp)

    @property
    def bv(self) -> tuple[float, float]:
        return (self.bv_G, self.bv_Gp)

    @property
    def lipschitz_in_time(self) -> float:
        """Uniform d-Lipschitz constant of a unit-mass particle solution."""
        return self.sup_G + self.sup_Gp


@dataclass(frozen=True)
class CHKernel:
    alpha: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha!r}")

    def G(self, x):
        return eval_G(self, x)

    def Gp(self, x):
        return eval_Gp(self, x)

    def derivative(self, order: int):
        """Return G^(order) as a vectorised callable (order 0 or 1)."""
        if order == 0:
            return self.G
        if order == 1:
            return self.Gp
        raise ValueError(f"only orders 0 and 1 exist for the CH kernel, got {order}")

    @property
    def constants(self) -> KernelConstants:
        return constants(self)


def eval_G(kernel: CHKernel, x):
    a = kernel.alpha
    return np.exp(-np.abs(x) / a) / (2.0 * a)


def eval_Gp(kernel: CHKernel, x):
    a = kernel.alpha
    x = np.asarray(x, dtype=float)
    # sgn with sgn(0) = -1 picks the left limit G'(0-) = +1/(2 a^2)
    s = np.where(x > 0, 1.0, -1.0)
    out = -s * np.exp(-np.abs(x) / a) / (2.0 * a * a)
    return out if out.ndim else float(out)


def eval_Gp_side(kernel: CHKernel, x, side: int):
    """G' with an explicit one-sided value at the origin.

    ``side=-1`` gives G'(0-), ``side=+1`` gives G'(0+).  Away from zero
    this equals ``eval_Gp``.
    """
    a = kernel.alpha
    x = np.asarray(x, dtype=float)
    s = np.where(x > 0, 1.0, np.where(x < 0, -1.0, float(side)))
    return -s * np.exp(-np.abs(x) / a) / (2.0 * a * a)


def constants(kernel: CHKernel) -> KernelConstants:
    a = kernel.alpha
    sup_G = 1.0 / (2 * a)
    sup_Gp = 1.0 / (2 * a * a)
    # G rises to 1/(2a) and falls back: var = 2 * 1/(2a).
    var_G = 1.0 / a
    # G' rises to 1/(2a^2), jumps by 1/a^2, returns to 0.
    var_Gp = 2.0 / (a * a)
    l1_G = 1.0
    l1_Gp = 1.0 / a
    bv_G = l1_G + var_G
    bv_Gp = l1_Gp + var_Gp
    return KernelConstants(
        sup_G=sup_G,
        sup_Gp=sup_Gp,
        var_G=var_G,
        var_Gp=var_Gp,
        l1_G=l1_G,
        l1_Gp=l1_Gp,
        bv_G=bv_G,
        bv_Gp=bv_Gp,
        holder_L=var_G * bv_G + var_Gp * bv_Gp,
    )


def weighted_holder_L(kernel: CHKernel) -> float:
    """Holder constant for the alpha-weighted norm int(f^2 + alpha^2 f'^2).

    Equal to ``constants(kernel).holder_L`` when alpha == 1.
    """
    c = constants(kernel)
    return c.var_G * c.bv_G + kernel.alpha**2 * c.var_Gp * c.bv_Gp


def convolve(kernel: CHKernel, mu, x, order: int = 0, side: int | None = None):
    """Evaluate (G^(order) * mu)(x) = sum_i w_i G^(order)(x - x_i).

    ``mu`` is anything with ``positions`` and ``weights`` arrays.  ``x`` may
    be a scalar or an array.  For ``order=1`` and ``side`` given, atoms
    sitting exactly at ``x`` contribute their one-sided limit.
    """
    pos = np.asarray(mu.positions, dtype=float)
    w = np.asarray(mu.weights, dtype=float)
    xa = np.asarray(x, dtype=float)
    d = xa[..., None] - pos
    if order == 0:
        vals = eval_G(kernel, d)
    elif order == 1:
        vals = eval_Gp(kernel, d) if side is None else eval_Gp_side(kernel, d, side)
    else:
        raise ValueError(f"order must be 0 or 1, got {order}")
    out = vals @ w if pos.size else np.zeros(xa.shape)
    return float(out) if np.ndim(out) == 0 else out
