"""Grid-sampled paths shared by the limit simulators and the excursion code."""

import enum
from dataclasses import dataclass

import numpy as np

GRID_RTOL = 1e-12


class PathKind(enum.Enum):
    BROWNIAN_PARABOLIC = "BrownianParabolic"
    POWER_LAW_LEVY = "PowerLawLevy"
    RESCALED_WALK = "RescaledWalk"
    REFLECTED = "Reflected"


@dataclass(frozen=True, eq=False)
class LimitPath:
    """Values of a path on the uniform grid ``grid[i] = i * dt``."""

    grid: np.ndarray
    values: np.ndarray
    kind: PathKind
    dt: float

    def __post_init__(self):
        if self.grid.shape != self.values.shape:
            raise ValueError("grid and values must have the same shape")
        if len(self.grid) and self.values[0] != 0:
            raise ValueError("paths start at 0")
        if len(self.grid) > 1:
            expected = np.arange(len(self.grid)) * self.dt
            if np.max(np.abs(self.grid - expected)) > GRID_RTOL * max(expected[-1], 1.0):
                raise ValueError("grid is not uniform")

    @property
    def horizon(self):
        return float(self.grid[-1]) if len(self.grid) else 0.0

    @classmethod
    def from_values(cls, values, dt, kind):
        values = np.asarray(values, dtype=float)
        return cls(grid=np.arange(len(values)) * dt, values=values, kind=kind, dt=float(dt))

    def at(self, t):
        """Value at the grid point nearest to ``t``."""
        return self.values[int(round(t / self.dt))]
