"""Vortex configurations: positions with degrees in {-1, +1}."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fields import Grid


@dataclass(frozen=True)
class VortexConfiguration:
    """N vortex positions a_k with degrees d_k in {-1, +1} at a time.

    rho(grid) is the separation scale: the minimum over half pairwise
    distances and over distances to the domain boundary.
    """

    positions: np.ndarray  # (N, 2)
    degrees: np.ndarray    # (N,)
    time: float = 0.0

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if p.size == 0:
            p = p.reshape(0, 2)
        d = np.asarray(self.degrees, dtype=int).ravel()
        if p.shape != (d.size, 2):
            raise ConfigError(
                f"initial.positions shape {p.shape} does not match {d.size} degrees"
            )
        if d.size and not np.all(np.isin(d, (-1, 1))):
            raise ConfigError(f"initial.degrees must be +-1, got {d.tolist()}")
        if not np.all(np.isfinite(p)):
            raise ConfigError("initial.positions must be finite")
        for k in range(len(d)):
            for l in range(k + 1, len(d)):
                if np.allclose(p[k], p[l]):
                    raise ConfigError(f"initial.positions {k} and {l} coincide")
        p.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "positions", p)
        object.__setattr__(self, "degrees", d)

    def __len__(self) -> int:
        return self.degrees.size

    def rho(self, grid: Grid) -> float:
        if len(self) == 0:
            return float("inf")
        r = float(np.min(grid.boundary_distance(self.positions)))
        for k in range(len(self)):
            for l in range(k + 1, len(self)):
                r = min(r, 0.5 * float(np.linalg.norm(self.positions[k] - self.positions[l])))
        return r

    def min_pair_distance(self) -> float:
        if len(self) < 2:
            return float("inf")
        best = float("inf")
        for k in range(len(self)):
            for l in range(k + 1, len(self)):
                best = min(best, float(np.linalg.norm(self.positions[k] - self.positions[l])))
        return best

    def total_degree(self) -> int:
        return int(np.sum(self.degrees))

    def displaced(self, k: int, delta) -> "VortexConfiguration":
        p = np.array(self.positions)
        p[k] = p[k] + np.asarray(delta, dtype=float)
        return VortexConfiguration(p, self.degrees, self.time)


def empty_configuration(time: float = 0.0) -> VortexConfiguration:
    return VortexConfiguration(np.zeros((0, 2)), np.zeros(0, dtype=int), time)
