"""Grid samples of u = G * m and its a.e. derivative."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .greens import CHKernel, constants, convolve


@dataclass(frozen=True, eq=False)
class FieldSample:
    x_min: float
    x_max: float
    step: float
    u: np.ndarray
    ux: np.ndarray
    alpha: float
    mass: float

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.u.size)

    def bound_margins(self) -> tuple[float, float]:
        """Slack of |u| <= mass/(2a) and |u_x| <= mass/(2a^2) (>= 0 when satisfied)."""
        k = constants(CHKernel(self.alpha))
        return (
            float(k.sup_G * self.mass - np.abs(self.u).max()),
            float(k.sup_Gp * self.mass - np.abs(self.ux).max()),
        )


def sample_field(kernel: CHKernel, mu, x_min: float, x_max: float, n: int = 1001) -> FieldSample:
    if n < 2 or not x_max > x_min:
        raise ValueError("need n >= 2 and x_max > x_min")
    grid = np.linspace(x_min, x_max, n)
    return FieldSample(
        x_min=float(x_min),
        x_max=float(x_max),
        step=float(grid[1] - grid[0]),
        u=np.asarray(convolve(kernel, mu, grid, 0)),
        ux=np.asarray(convolve(kernel, mu, grid, 1)),
        alpha=kernel.alpha,
        mass=float(np.abs(mu.weights).sum()),
    )
