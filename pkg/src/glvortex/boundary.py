"""Boundary conditions and boundary-ring utilities.

Dirichlet data g is stored on the counterclockwise boundary ring (the node
order of Grid.boundary_ring); it must be unimodular with an integer total
winding.  Helpers convert ring data to per-edge arrays and compute the
tangential current g x d_tau g one edge at a time, so corners carry one
value per adjacent edge as required by the per-axis ghost reflection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .fields import Grid

DIRICHLET = "dirichlet"
NEUMANN = "neumann"


def ring_length(grid: Grid) -> int:
    return 2 * (grid.n1 - 1) + 2 * (grid.n2 - 1)


def ring_to_edges(grid: Grid, ring: np.ndarray):
    """Split ring data into (bottom, right, top, left) edge arrays.

    Each edge array includes both of its corners and is stored in ascending
    node-index order (bottom/top by i, right/left by j).
    """
    n1, n2 = grid.n1, grid.n2
    bottom = ring[0:n1]
    right = np.concatenate([ring[n1 - 1:n1], ring[n1:n1 + n2 - 2], ring[n1 + n2 - 2:n1 + n2 - 1]])
    top_ccw = ring[n1 + n2 - 2:2 * n1 + n2 - 2]      # i descending
    top = top_ccw[::-1]
    left_ccw = ring[2 * n1 + n2 - 2:]                # j descending, j = n2-2 .. 1
    corner_top_left = ring[2 * n1 + n2 - 3:2 * n1 + n2 - 2]
    left = np.concatenate([ring[0:1], left_ccw[::-1], corner_top_left])
    return bottom, right, top, left


def scatter_ring(grid: Grid, ring: np.ndarray, fill=0.0) -> np.ndarray:
    """Full-grid array with the ring values on the boundary nodes."""
    out = np.full(grid.shape, fill, dtype=ring.dtype)
    ii, jj = grid.boundary_ring()
    out[ii, jj] = ring
    return out


def _edge_derivative(vals: np.ndarray, h: float) -> np.ndarray:
    """Second-order derivative along one edge (central inside, one-sided ends)."""
    return np.gradient(vals, h, edge_order=2)


@dataclass(frozen=True)
class BoundaryCondition:
    """Dirichlet (pinned unimodular trace g) or zero-Neumann condition."""

    kind: str
    g: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in (DIRICHLET, NEUMANN):
            raise ConfigError(f"bc.kind must be '{DIRICHLET}' or '{NEUMANN}', got {self.kind!r}")
        if self.kind == DIRICHLET:
            if self.g is None:
                raise ConfigError("bc.g is required for Dirichlet runs")
            g = np.asarray(self.g, dtype=np.complex128)
            if np.max(np.abs(np.abs(g) - 1.0)) > 1e-9:
                raise ConfigError("bc.g must take values on the unit circle (|g| = 1)")
            g.setflags(write=False)
            object.__setattr__(self, "g", g)
        elif self.g is not None:
            raise ConfigError("bc.g must be absent for Neumann runs")

    def check_ring(self, grid: Grid):
        if self.kind == DIRICHLET and self.g.shape != (ring_length(grid),):
            raise ConfigError(
                f"bc.g has {self.g.shape[0]} samples, expected {ring_length(grid)}"
            )

    def winding(self) -> int:
        """Total phase winding of g along the closed ring (must be integer)."""
        if self.kind != DIRICHLET:
            return 0
        ph = np.angle(self.g)
        d = np.diff(np.concatenate([ph, ph[:1]]))
        d = (d + np.pi) % (2.0 * np.pi) - np.pi
        w = float(np.sum(d) / (2.0 * np.pi))
        if abs(w - round(w)) > 1e-6:
            raise ConfigError(f"bc.g winding {w} is not an integer")
        return int(round(w))

    def g_full(self, grid: Grid) -> np.ndarray:
        """g scattered to a full grid array (interior entries are 1)."""
        self.check_ring(grid)
        return scatter_ring(grid, self.g, fill=1.0 + 0.0j)

    def tangential_current_edges(self, grid: Grid):
        """(q_bottom, q_right, q_top, q_left): j(g) . tau_ccw per edge.

        tau_ccw is +e1 (bottom), +e2 (right), -e1 (top), -e2 (left); the
        arrays are in ascending index order, so top/left flip sign.
        """
        self.check_ring(grid)
        h = grid.h
        bottom, right, top, left = ring_to_edges(grid, self.g)

        def jt(g_edge, sign):
            dg = _edge_derivative(g_edge, h)
            return sign * (np.conj(g_edge) * dg).imag

        return jt(bottom, +1.0), jt(right, +1.0), jt(top, -1.0), jt(left, -1.0)


def outward_normal_log_gradient_edges(grid: Grid, point) -> tuple:
    """d/d_nu log|x - a| on each edge: (bottom, right, top, left) arrays."""
    a1, a2 = float(point[0]), float(point[1])
    x1 = grid.x1()
    x2 = grid.x2()
    y_bot, y_top = grid.origin[1], grid.origin[1] + grid.extent[1]
    x_left, x_right = grid.origin[0], grid.origin[0] + grid.extent[0]

    def comp(px, py, nu1, nu2):
        rx = px - a1
        ry = py - a2
        r2 = rx * rx + ry * ry
        return (nu1 * rx + nu2 * ry) / r2

    bottom = comp(x1, y_bot, 0.0, -1.0)
    top = comp(x1, y_top, 0.0, 1.0)
    left = comp(x_left, x2, -1.0, 0.0)
    right = comp(x_right, x2, 1.0, 0.0)
    return bottom, right, top, left
