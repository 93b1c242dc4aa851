"""Uniform rectangular grid and the immutable field types living on it.

The domain is an axis-aligned rectangle sampled on n1 x n2 nodes with equal
spacing h on both axes.  Arrays are indexed values[i, j] with axis 0 along
x1 and axis 1 along x2.  Scalar/vector/tensor fields are either node-centered
(shape n1 x n2 + component axes) or cell-centered (n1-1 x n2-1 + components);
cell-centered values sit at the plaquette midpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

MIN_NODES = 16

NODE = "node"
CELL = "cell"


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular node grid.

    origin: lower-left corner (x1, x2); extent: side lengths (L1, L2);
    n1, n2: node counts per axis.  Spacing h = L/(n-1) must agree on both
    axes to 1e-12 relative.
    """

    origin: tuple[float, float]
    extent: tuple[float, float]
    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < MIN_NODES or self.n2 < MIN_NODES:
            raise ConfigError(f"grid.n1/n2 must be >= {MIN_NODES}, got {self.n1}x{self.n2}")
        if self.extent[0] <= 0 or self.extent[1] <= 0:
            raise ConfigError("grid.extent must be positive")
        h1 = self.extent[0] / (self.n1 - 1)
        h2 = self.extent[1] / (self.n2 - 1)
        if abs(h1 - h2) > 1e-12 * max(h1, h2):
            raise ConfigError(
                f"grid spacing must be equal on both axes (h1={h1!r}, h2={h2!r})"
            )

    @property
    def h(self) -> float:
        return self.extent[0] / (self.n1 - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n1, self.n2)

    def x1(self) -> np.ndarray:
        return self.origin[0] + self.h * np.arange(self.n1)

    def x2(self) -> np.ndarray:
        return self.origin[1] + self.h * np.arange(self.n2)

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid (X1, X2) of node coordinates, 'ij' indexing."""
        return np.meshgrid(self.x1(), self.x2(), indexing="ij")

    def cell_x1(self) -> np.ndarray:
        return self.origin[0] + self.h * (np.arange(self.n1 - 1) + 0.5)

    def cell_x2(self) -> np.ndarray:
        return self.origin[1] + self.h * (np.arange(self.n2 - 1) + 0.5)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.cell_x1(), self.cell_x2(), indexing="ij")

    def coords(self, centering: str = NODE) -> tuple[np.ndarray, np.ndarray]:
        return self.nodes() if centering == NODE else self.cell_centers()

    def quad_weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights (include the h^2 factor)."""
        w1 = np.ones(self.n1)
        w1[[0, -1]] = 0.5
        w2 = np.ones(self.n2)
        w2[[0, -1]] = 0.5
        return np.outer(w1, w2) * self.h**2

    def interior_mask(self, collar: int = 1) -> np.ndarray:
        """True on nodes at least `collar` layers away from the boundary."""
        m = np.zeros(self.shape, dtype=bool)
        m[collar:-collar or None, collar:-collar or None] = True
        return m

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        """Distance from points (..., 2) to the rectangle boundary."""
        p = np.asarray(points, dtype=float)
        d1 = np.minimum(p[..., 0] - self.origin[0], self.origin[0] + self.extent[0] - p[..., 0])
        d2 = np.minimum(p[..., 1] - self.origin[1], self.origin[1] + self.extent[1] - p[..., 1])
        return np.minimum(d1, d2)

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self.boundary_distance(points) > 0

    def boundary_ring(self) -> tuple[np.ndarray, np.ndarray]:
        """Index arrays (ii, jj) of boundary nodes ordered counterclockwise.

        Starts at the origin corner; each corner appears once; the ring is
        closed implicitly (last node is adjacent to the first).
        """
        n1, n2 = self.n1, self.n2
        ii = np.concatenate([
            np.arange(n1),                      # bottom, left -> right
            np.full(n2 - 2, n1 - 1),            # right, up
            np.arange(n1 - 1, -1, -1),          # top, right -> left
            np.zeros(n2 - 2, dtype=int),        # left, down
        ])
        jj = np.concatenate([
            np.zeros(n1, dtype=int),
            np.arange(1, n2 - 1),
            np.full(n1, n2 - 1),
            np.arange(n2 - 2, 0, -1),
        ])
        return ii, jj


@dataclass(frozen=True)
class EpsilonScaling:
    """Core size eps with the induced factors k_eps = 1/log(1/eps) and
    lambda_eps = lambda0 * k_eps."""

    eps: float
    lambda0: float

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0):
            raise ConfigError(f"pde.eps must lie in (0, 1), got {self.eps}")
        if self.lambda0 <= 0.0:
            raise ConfigError(f"pde.lambda0 must be positive, got {self.lambda0}")

    @property
    def k_eps(self) -> float:
        return 1.0 / math.log(1.0 / self.eps)

    @property
    def lambda_eps(self) -> float:
        return self.lambda0 * self.k_eps

    @property
    def log_inv_eps(self) -> float:
        return math.log(1.0 / self.eps)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _check_shape(grid: Grid, values: np.ndarray, centering: str, comps: tuple[int, ...]):
    if centering == NODE:
        want = (grid.n1, grid.n2) + comps
    elif centering == CELL:
        want = (grid.n1 - 1, grid.n2 - 1) + comps
    else:
        raise ConfigError(f"unknown centering {centering!r}")
    if values.shape != want:
        raise ConfigError(f"field shape {values.shape} does not match {want}")
    if not np.all(np.isfinite(values)):
        raise ConfigError("field contains non-finite entries")


@dataclass(frozen=True)
class ComplexField:
    """Complex scalar field on grid nodes at a given time."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        _check_shape(self.grid, v, NODE, ())
        object.__setattr__(self, "values", _freeze(v))

    def with_values(self, values: np.ndarray, time: float | None = None) -> "ComplexField":
        return ComplexField(self.grid, values, self.time if time is None else time)


@dataclass(frozen=True)
class ScalarField:
    grid: Grid
    values: np.ndarray
    centering: str = NODE

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        _check_shape(self.grid, v, self.centering, ())
        object.__setattr__(self, "values", _freeze(v))


@dataclass(frozen=True)
class VectorField:
    """Real 2-vector per point; component axis last (shape ... x 2)."""

    grid: Grid
    values: np.ndarray
    centering: str = NODE

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        _check_shape(self.grid, v, self.centering, (2,))
        object.__setattr__(self, "values", _freeze(v))


@dataclass(frozen=True)
class TensorField:
    """Real 2x2 matrix per point (shape ... x 2 x 2)."""

    grid: Grid
    values: np.ndarray
    centering: str = NODE

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        _check_shape(self.grid, v, self.centering, (2, 2))
        object.__setattr__(self, "values", _freeze(v))


def rot90(v: np.ndarray) -> np.ndarray:
    """Multiplication by i on 2-vectors: (v1, v2) -> (-v2, v1).

    Acts on the last axis; works for vector fields and single points.
    """
    out = np.empty_like(np.asarray(v, dtype=float))
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out
