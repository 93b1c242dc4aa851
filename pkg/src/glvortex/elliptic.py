"""Fast Helmholtz/Poisson solves on the rectangle via sine/cosine transforms.

The 5-point Laplacian with zero-Dirichlet interior is diagonalized by the
type-I DST on the (n-2) x (n-2) interior nodes; the mirrored-ghost Neumann
Laplacian (boundary stencil (2 u_1 - 2 u_0)/h^2) is diagonalized by the
type-I DCT on the full node grid.  Both are exact inverses of the discrete
operators, not approximations.  Complex right-hand sides are transformed
directly (the transforms act on real and imaginary parts by linearity).
"""

from __future__ import annotations

import numpy as np
import scipy.fft as sfft

from .errors import SolverFailure
from .fields import Grid

Array = np.ndarray


def _dst_eigenvalues(m: int, h: float) -> Array:
    """Eigenvalues of the 1D [1,-2,1]/h^2 stencil for DST-I modes on m
    interior nodes (mode p has eigenvector sin(p pi k/(m+1)))."""
    p = np.arange(1, m + 1)
    return (2.0 * np.cos(np.pi * p / (m + 1)) - 2.0) / h**2


def _dct_eigenvalues(n: int, h: float) -> Array:
    """Eigenvalues of the mirrored-ghost 1D stencil for DCT-I modes on n
    nodes (mode p has eigenvector cos(p pi k/(n-1)))."""
    p = np.arange(n)
    return (2.0 * np.cos(np.pi * p / (n - 1)) - 2.0) / h**2


def solve_dirichlet_helmholtz(grid: Grid, rhs: Array, c, boundary: Array | None = None) -> Array:
    """Solve (I - c Lap) u = rhs with u = boundary on the edge nodes.

    rhs is a full-grid array (boundary entries ignored); boundary is a
    full-grid array whose edge ring supplies the Dirichlet values (None for
    zero).  c may be complex.  Returns the full-grid solution.
    """
    h = grid.h
    r = np.array(rhs[1:-1, 1:-1], dtype=np.complex128 if np.iscomplexobj(rhs) or np.iscomplexobj(boundary) else float)
    if boundary is not None:
        s = c / h**2
        r[0, :] += s * boundary[0, 1:-1]
        r[-1, :] += s * boundary[-1, 1:-1]
        r[:, 0] += s * boundary[1:-1, 0]
        r[:, -1] += s * boundary[1:-1, -1]
    lam = _dst_eigenvalues(grid.n1 - 2, h)[:, None] + _dst_eigenvalues(grid.n2 - 2, h)[None, :]
    rh = sfft.dstn(r, type=1) / (1.0 - c * lam)
    u_int = sfft.idstn(rh, type=1)
    u = np.zeros(grid.shape, dtype=u_int.dtype)
    u[1:-1, 1:-1] = u_int
    if boundary is not None:
        u[0, :] = boundary[0, :]
        u[-1, :] = boundary[-1, :]
        u[:, 0] = boundary[:, 0]
        u[:, -1] = boundary[:, -1]
    if not np.all(np.isfinite(u)):
        raise SolverFailure("Dirichlet Helmholtz solve produced non-finite values")
    return u


def solve_dirichlet_poisson(grid: Grid, rhs: Array, boundary: Array | None = None) -> Array:
    """Solve Lap u = rhs with u = boundary on the edge nodes."""
    h = grid.h
    r = np.array(rhs[1:-1, 1:-1], dtype=float)
    if boundary is not None:
        s = 1.0 / h**2
        r[0, :] -= s * boundary[0, 1:-1]
        r[-1, :] -= s * boundary[-1, 1:-1]
        r[:, 0] -= s * boundary[1:-1, 0]
        r[:, -1] -= s * boundary[1:-1, -1]
    lam = _dst_eigenvalues(grid.n1 - 2, h)[:, None] + _dst_eigenvalues(grid.n2 - 2, h)[None, :]
    rh = sfft.dstn(r, type=1)
    rh /= lam
    u = np.zeros(grid.shape)
    u[1:-1, 1:-1] = sfft.idstn(rh, type=1)
    if boundary is not None:
        u[0, :] = boundary[0, :]
        u[-1, :] = boundary[-1, :]
        u[:, 0] = boundary[:, 0]
        u[:, -1] = boundary[:, -1]
    if not np.all(np.isfinite(u)):
        raise SolverFailure("Dirichlet Poisson solve produced non-finite values")
    return u


def solve_neumann_helmholtz(grid: Grid, rhs: Array, c) -> Array:
    """Solve (I - c Lap_N) u = rhs with the mirrored-ghost Neumann Laplacian."""
    h = grid.h
    lam = _dct_eigenvalues(grid.n1, h)[:, None] + _dct_eigenvalues(grid.n2, h)[None, :]
    rh = sfft.dctn(rhs, type=1) / (1.0 - c * lam)
    u = sfft.idctn(rh, type=1)
    if not np.all(np.isfinite(u)):
        raise SolverFailure("Neumann Helmholtz solve produced non-finite values")
    return u


def solve_neumann_poisson(grid: Grid, rhs: Array, flux=None) -> tuple[Array, float]:
    """Solve Lap u = rhs with prescribed outward normal derivative.

    flux is a tuple (q_left, q_right, q_bottom, q_top) of edge arrays of
    lengths (n2, n2, n1, n1), each the outward normal derivative along that
    edge including the corner nodes (corners carry one value per adjacent
    edge, matching the per-axis ghost reflection).  None means zero flux.
    The singular constant mode is projected out; the returned defect is the
    weighted mean of the removed component (the discrete compatibility
    residual).  The solution is normalized to zero trapezoidal mean.
    """
    h = grid.h
    r = np.array(rhs, dtype=float)
    if flux is not None:
        # true Lap = mirror Lap + 2 q / h at a boundary node with outward
        # flux q, so the data moves to the right-hand side with a minus.
        q_left, q_right, q_bottom, q_top = flux
        r[0, :] -= 2.0 * np.asarray(q_left) / h
        r[-1, :] -= 2.0 * np.asarray(q_right) / h
        r[:, 0] -= 2.0 * np.asarray(q_bottom) / h
        r[:, -1] -= 2.0 * np.asarray(q_top) / h
    lam = _dct_eigenvalues(grid.n1, h)[:, None] + _dct_eigenvalues(grid.n2, h)[None, :]
    rh = sfft.dctn(r, type=1)
    area = 4.0 * (grid.n1 - 1) * (grid.n2 - 1)
    defect = float(rh[0, 0]) / area  # weighted mean of the incompatible part
    rh[0, 0] = 0.0
    lam[0, 0] = 1.0
    rh /= lam
    u = sfft.idctn(rh, type=1)
    if not np.all(np.isfinite(u)):
        raise SolverFailure("Neumann Poisson solve produced non-finite values")
    w = grid.quad_weights()
    u -= np.sum(u * w) / np.sum(w)
    return u, defect


def apply_interior_helmholtz(grid: Grid, u: Array, c) -> Array:
    """(I - c Lap) u on interior nodes, using u's own boundary entries."""
    h = grid.h
    lap = (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4.0 * u[1:-1, 1:-1]) / h**2
    return u[1:-1, 1:-1] - c * lap


def apply_neumann_laplacian(grid: Grid, u: Array) -> Array:
    """Mirrored-ghost 5-point Laplacian on the full node grid."""
    h = grid.h
    n1, n2 = grid.shape
    up = np.empty((n1 + 2, n2 + 2), dtype=u.dtype)
    up[1:-1, 1:-1] = u
    up[0, 1:-1] = u[1, :]
    up[-1, 1:-1] = u[-2, :]
    up[1:-1, 0] = u[:, 1]
    up[1:-1, -1] = u[:, -2]
    up[0, 0] = up[0, 2]
    up[0, -1] = up[0, -3]
    up[-1, 0] = up[-1, 2]
    up[-1, -1] = up[-1, -3]
    return (up[2:, 1:-1] + up[:-2, 1:-1] + up[1:-1, 2:] + up[1:-1, :-2] - 4.0 * u) / h**2
