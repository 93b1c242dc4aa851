"""Discrete differential quantities of a complex field on a uniform grid.

Conventions (complex u identified with the real 2-vector (Re u, Im u)):
    (u, v)  = Re(conj(u) v)         real scalar product
    iu      = rotation by pi/2
    u x v   = (iu, v) = Im(conj(u) v)

Derivatives are central differences in the interior and one-sided
second-order at the boundary (numpy.gradient, edge_order=2), so every
node-centered quantity is O(h^2) for smooth fields.  The Jacobian is the
exception: it is defined as half the plaquette circulation of the current
divided by the cell area, which makes the total vorticity an exact boundary
quantity (sum_cells J h^2 == 1/2 * boundary circulation of j, to round-off).
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .fields import CELL, NODE, ComplexField, EpsilonScaling, Grid, ScalarField, TensorField, VectorField

Array = np.ndarray


# ---------------------------------------------------------------------------
# array-level helpers (hot paths use these directly)
# ---------------------------------------------------------------------------

def d1(a: Array, h: float) -> Array:
    return np.gradient(a, h, axis=0, edge_order=2)


def d2(a: Array, h: float) -> Array:
    return np.gradient(a, h, axis=1, edge_order=2)


def cross(u: Array, v: Array) -> Array:
    """u x v = Im(conj(u) v) for complex arrays."""
    return (np.conj(u) * v).imag


def inner(u: Array, v: Array) -> Array:
    """(u, v) = Re(conj(u) v) for complex arrays."""
    return (np.conj(u) * v).real


def current_values(u: Array, h: float) -> tuple[Array, Array]:
    return cross(u, d1(u, h)), cross(u, d2(u, h))


def energy_density_values(u: Array, h: float, eps: float) -> Array:
    gx, gy = d1(u, h), d2(u, h)
    grad_sq = (gx * np.conj(gx)).real + (gy * np.conj(gy)).real
    pot = (1.0 - (u * np.conj(u)).real) ** 2 / (4.0 * eps**2)
    return 0.5 * grad_sq + pot


def trapz2(values: Array, grid: Grid) -> float:
    return float(np.sum(values * grid.quad_weights()))


def cell_circulation(v1: Array, v2: Array, h: float) -> Array:
    """Trapezoidal circulation of a node vector field around each plaquette.

    Counterclockwise: bottom and top edges use v1, left and right use v2.
    Interior edges cancel when summing over cells, so the cell sum equals
    the circulation along the outer boundary exactly.
    """
    bottom = 0.5 * h * (v1[:-1, :-1] + v1[1:, :-1])
    top = 0.5 * h * (v1[:-1, 1:] + v1[1:, 1:])
    left = 0.5 * h * (v2[0:-1, :-1] + v2[:-1, 1:])
    right = 0.5 * h * (v2[1:, :-1] + v2[1:, 1:])
    return bottom + right - top - left


def _require_finite(u: ComplexField):
    if not np.all(np.isfinite(u.values)):
        raise ConfigError("field contains non-finite entries")


# ---------------------------------------------------------------------------
# spec operations
# ---------------------------------------------------------------------------

def current(u: ComplexField) -> VectorField:
    """Current j(u) = (u x d1 u, u x d2 u), node-centered."""
    _require_finite(u)
    j1, j2 = current_values(u.values, u.grid.h)
    return VectorField(u.grid, np.stack([j1, j2], axis=-1))


def jacobian(u: ComplexField) -> ScalarField:
    """Jacobian J(u) = 1/2 curl j(u), cell-centered.

    Defined as half the plaquette circulation of the discrete current over
    the cell area; discretely exact: sum over cells of J h^2 equals half the
    boundary circulation of j.
    """
    _require_finite(u)
    h = u.grid.h
    j1, j2 = current_values(u.values, h)
    return ScalarField(u.grid, cell_circulation(j1, j2, h) / (2.0 * h * h), centering=CELL)


def jacobian_pointwise(u: ComplexField) -> ScalarField:
    """Pointwise det(grad u) = d1 u x d2 u on nodes.

    Companion to `jacobian`; satisfies the convective identity
    ((G.grad) iu, grad u) = iG * J(u) to round-off with the same stencils.
    """
    _require_finite(u)
    h = u.grid.h
    return ScalarField(u.grid, cross(d1(u.values, h), d2(u.values, h)))


def jacobian_velocity(u: ComplexField, u_t: ComplexField) -> VectorField:
    """Velocity of the Jacobian, V = d_t u x grad u, node-centered.

    This is the dt^dx part of half the exterior derivative of the space-time
    current, normalized so that d_t J(u) = curl V(u) holds; the stepper
    supplies u_t as a backward difference, giving a residual O(dt + h^2).
    """
    if u_t.grid is not u.grid and u_t.grid != u.grid:
        raise ConfigError("jacobian_velocity: grid mismatch between u and u_t")
    _require_finite(u)
    _require_finite(u_t)
    h = u.grid.h
    v1 = cross(u_t.values, d1(u.values, h))
    v2 = cross(u_t.values, d2(u.values, h))
    return VectorField(u.grid, np.stack([v1, v2], axis=-1))


def momentum(u: ComplexField, u_t: ComplexField) -> VectorField:
    """Momentum p(u) = ((d_t u, d1 u), (d_t u, d2 u)), node-centered."""
    if u_t.grid != u.grid:
        raise ConfigError("momentum: grid mismatch between u and u_t")
    h = u.grid.h
    p1 = inner(u_t.values, d1(u.values, h))
    p2 = inner(u_t.values, d2(u.values, h))
    return VectorField(u.grid, np.stack([p1, p2], axis=-1))


def stress(u: ComplexField) -> TensorField:
    """Stress tensor (grad u x grad u)_jk = (d_j u, d_k u); symmetric by
    construction (the off-diagonal entry is computed once)."""
    _require_finite(u)
    h = u.grid.h
    g1, g2 = d1(u.values, h), d2(u.values, h)
    t11 = inner(g1, g1)
    t12 = inner(g1, g2)
    t22 = inner(g2, g2)
    vals = np.empty(u.values.shape + (2, 2))
    vals[..., 0, 0] = t11
    vals[..., 0, 1] = t12
    vals[..., 1, 0] = t12
    vals[..., 1, 1] = t22
    return TensorField(u.grid, vals)


def energy_density(u: ComplexField, scaling: EpsilonScaling) -> ScalarField:
    """e_eps(u) = 1/2 |grad u|^2 + (1 - |u|^2)^2 / (4 eps^2)."""
    _require_finite(u)
    return ScalarField(u.grid, energy_density_values(u.values, u.grid.h, scaling.eps))


def total_energy(u: ComplexField, scaling: EpsilonScaling) -> float:
    """Trapezoidal integral of the energy density over the domain."""
    return trapz2(energy_density_values(u.values, u.grid.h, scaling.eps), u.grid)


def stencil_energy_values(u: Array, h: float, eps: float, quad: Array) -> float:
    """Scheme-consistent discrete energy: forward-difference Dirichlet form
    of the 5-point Laplacian plus the trapezoidal potential.

    The semi-implicit step dissipates this functional to round-off when the
    forcing vanishes; the central-difference `total_energy` is second-order
    accurate but can wobble at the 1e-8 scale along a trajectory because it
    is not the stencil's own quadratic form.
    """
    dx2 = np.abs(np.diff(u, axis=0)) ** 2
    dy2 = np.abs(np.diff(u, axis=1)) ** 2
    wx = np.ones(u.shape[0])
    wx[[0, -1]] = 0.5
    wy = np.ones(u.shape[1])
    wy[[0, -1]] = 0.5
    grad = 0.5 * (float(np.sum(dx2 * wy[None, :])) + float(np.sum(dy2 * wx[:, None])))
    pot = float(np.sum((1.0 - (u * np.conj(u)).real) ** 2 * quad)) / (4.0 * eps**2)
    return grad + pot


def stencil_energy(u: ComplexField, scaling: EpsilonScaling) -> float:
    return stencil_energy_values(u.values, u.grid.h, scaling.eps,
                                 u.grid.quad_weights())


# ---------------------------------------------------------------------------
# pairings against test functions
# ---------------------------------------------------------------------------

def _region_weights(grid: Grid, centering: str, region) -> Array:
    x1, x2 = grid.coords(centering)
    if region is None:
        w = np.ones(x1.shape)
    elif isinstance(region, np.ndarray):
        if region.shape != x1.shape:
            raise ConfigError("region mask shape does not match the field")
        w = region.astype(float)
    elif callable(region):
        w = np.asarray(region(x1, x2), dtype=float)
    else:
        raise ConfigError(f"unsupported region specification {region!r}")
    return w


def pair_with_test(q, phi, region=None) -> float:
    """Trapezoidal pairing integral of a field against a test function.

    q: ScalarField or VectorField (either centering).  phi: callable of node
    coordinates (x1, x2) returning a scalar array for scalar q, or a pair /
    (..., 2) array for vector q; a constant is also accepted.  region: None,
    a boolean mask of matching shape, or a callable of coordinates giving
    weights in [0, 1].  Cell-centered fields use the midpoint rule (uniform
    weights h^2), node-centered the trapezoidal weights.
    """
    grid = q.grid
    x1, x2 = grid.coords(q.centering)
    if q.centering == NODE:
        w = grid.quad_weights()
    else:
        w = np.full(x1.shape, grid.h**2)
    w = w * _region_weights(grid, q.centering, region)

    if isinstance(q, ScalarField):
        ph = phi(x1, x2) if callable(phi) else phi
        return float(np.sum(q.values * ph * w))
    if isinstance(q, VectorField):
        ph = phi(x1, x2) if callable(phi) else phi
        ph = np.asarray(ph, dtype=float)
        if ph.shape and ph.shape[0] == 2 and ph.shape != q.values.shape:
            ph = np.stack([np.broadcast_to(ph[0], x1.shape),
                           np.broadcast_to(ph[1], x1.shape)], axis=-1)
        integrand = q.values[..., 0] * ph[..., 0] + q.values[..., 1] * ph[..., 1]
        return float(np.sum(integrand * w))
    raise ConfigError(f"pair_with_test does not handle {type(q).__name__}")


def disc_weights(grid: Grid, center, radius: float, centering: str = NODE) -> Array:
    """Smoothed indicator of the ball B_radius(center), one cell wide ramp.

    Used as a quadrature-stable stand-in for the sharp ball indicator in
    concentration and equipartition integrals.
    """
    x1, x2 = grid.coords(centering)
    r = np.hypot(x1 - center[0], x2 - center[1])
    return np.clip((radius - r) / grid.h + 0.5, 0.0, 1.0)


def loop_circulation(grid: Grid, v: VectorField, i0: int, i1: int, j0: int, j1: int) -> float:
    """Trapezoidal circulation of a node vector field along the rectangular
    grid loop with node corners (i0, j0) .. (i1, j1), counterclockwise."""
    if not (0 <= i0 < i1 < grid.n1 and 0 <= j0 < j1 < grid.n2):
        raise ConfigError("loop indices out of range")
    h = grid.h
    v1 = v.values[..., 0]
    v2 = v.values[..., 1]

    def edge(vals):
        return h * (0.5 * vals[0] + np.sum(vals[1:-1]) + 0.5 * vals[-1])

    bottom = edge(v1[i0:i1 + 1, j0])
    right = edge(v2[i1, j0:j1 + 1])
    top = edge(v1[i0:i1 + 1, j1])
    left = edge(v2[i0, j0:j1 + 1])
    return bottom + right - top - left


# ---------------------------------------------------------------------------
# convective terms and identities
# ---------------------------------------------------------------------------

def convect(u_values: Array, f1: Array, f2: Array, h: float) -> Array:
    """(F . grad) u as a complex array: F1 d1 u + F2 d2 u."""
    return f1 * d1(u_values, h) + f2 * d2(u_values, h)


def convective_identity_defect(u: ComplexField, g1: Array, g2: Array) -> Array:
    """Pointwise defect of ((G.grad) iu, grad u) - iG * J(u).

    Vanishes to round-off for the pointwise-det Jacobian with matching
    stencils; O(h^2) against the continuum for smooth u and G.
    """
    h = u.grid.h
    du1, du2 = d1(u.values, h), d2(u.values, h)
    conv = 1j * (g1 * du1 + g2 * du2)
    lhs1 = inner(conv, du1)
    lhs2 = inner(conv, du2)
    jpt = cross(du1, du2)
    rhs1 = -g2 * jpt
    rhs2 = g1 * jpt
    return np.stack([lhs1 - rhs1, lhs2 - rhs2], axis=-1)
