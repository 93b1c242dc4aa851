"""Canonical harmonic map, renormalized energy, and the stress identity.

The canonical map of a configuration (a, d) is encoded by a stream function:

    psi = sum_k d_k log|x - a_k| + psi_reg,      j(u*) = grad_perp psi,

so div j = 0 and curl j = 2 pi sum_k d_k delta_{a_k} hold by construction.
psi_reg is harmonic and carries the boundary condition:

  * Neumann-kind runs ((nu, j) = 0 on the boundary): psi = 0 on the edge,
    so psi_reg solves a Dirichlet problem with data -sum d_k log|x - a_k|.
  * Dirichlet-kind runs (trace g): d_nu psi equals the tangential current
    of g, so psi_reg solves a Neumann problem with that flux minus the
    analytic flux of the log terms.

Interaction energy, by singularity subtraction (half the Dirichlet energy of
u* outside shrinking core balls, renormalized by pi N log(1/s)):

    W = 1/2 oint_bdry psi d_nu psi
        - pi sum_k d_k [psi_reg(a_k) + sum_{l != k} d_l log|a_k - a_l|].

The boundary integral vanishes identically for the Neumann kind, and W is
invariant under the additive constant in psi_reg (the shift cancels between
the two terms since oint d_nu psi = 2 pi sum d_k).  The sign and constant
conventions here are pinned by the brute-force annulus oracle in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import (NEUMANN, BoundaryCondition,
                       outward_normal_log_gradient_edges, ring_to_edges, scatter_ring)
from .configuration import VortexConfiguration
from .elliptic import solve_dirichlet_poisson, solve_neumann_poisson
from .errors import ConfigTooClose, TestFunctionInvalid
from .fields import Grid, VectorField
from .operators import d1, d2

Array = np.ndarray


def bilinear(grid: Grid, arr: Array, points: Array) -> Array:
    """Bilinear interpolation of a node array at points (..., 2)."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    s1 = (p[:, 0] - grid.origin[0]) / grid.h
    s2 = (p[:, 1] - grid.origin[1]) / grid.h
    s1 = np.clip(s1, 0.0, grid.n1 - 1.0 - 1e-12)
    s2 = np.clip(s2, 0.0, grid.n2 - 1.0 - 1e-12)
    i = s1.astype(int)
    j = s2.astype(int)
    fx = s1 - i
    fy = s2 - j
    v = (arr[i, j] * (1 - fx) * (1 - fy) + arr[i + 1, j] * fx * (1 - fy)
         + arr[i, j + 1] * (1 - fx) * fy + arr[i + 1, j + 1] * fx * fy)
    return v if points.ndim > 1 else v[0]


def _log_distances(grid: Grid, config: VortexConfiguration):
    """log|x - a_k| on the node grid for every vortex, distances floored at
    h/2 to keep accidental on-node vortices finite (the floor only matters
    for display fields, never for the W assembly)."""
    x1, x2 = grid.nodes()
    out = []
    for k in range(len(config)):
        r = np.hypot(x1 - config.positions[k, 0], x2 - config.positions[k, 1])
        out.append(np.log(np.maximum(r, 0.5 * grid.h)))
    return out


@dataclass(frozen=True)
class StreamFunction:
    """Stream function of the canonical map: singular log coefficients plus
    the regular harmonic part on the grid."""

    grid: Grid
    config: VortexConfiguration
    bc_kind: str
    psi_reg: Array
    flux_defect: float = 0.0

    def psi_total(self) -> Array:
        vals = np.array(self.psi_reg)
        for k, lg in enumerate(_log_distances(self.grid, self.config)):
            vals += self.config.degrees[k] * lg
        return vals

    def psi_reg_at(self, points) -> Array:
        return bilinear(self.grid, self.psi_reg, np.asarray(points, dtype=float))

    def current_values(self) -> tuple[Array, Array]:
        """j(u*) = grad_perp psi; the log parts are differentiated analytically."""
        h = self.grid.h
        j1 = -d2(self.psi_reg, h)
        j2 = d1(self.psi_reg, h)
        x1, x2 = self.grid.nodes()
        for k in range(len(self.config)):
            dx = x1 - self.config.positions[k, 0]
            dy = x2 - self.config.positions[k, 1]
            r2 = np.maximum(dx * dx + dy * dy, (0.25 * h) ** 2)
            dk = self.config.degrees[k]
            j1 += dk * (-dy) / r2
            j2 += dk * dx / r2
        return j1, j2

    def current(self) -> VectorField:
        j1, j2 = self.current_values()
        return VectorField(self.grid, np.stack([j1, j2], axis=-1))


def stream_function(grid: Grid, config: VortexConfiguration,
                    bc: BoundaryCondition, pair_check: bool = True) -> StreamFunction:
    """Solve for the canonical map's stream function.

    Requires rho(config) > 4h so the log singularities are resolved by the
    boundary data; raises ConfigTooClose otherwise.  The solve itself sees
    the vortices only through their boundary data, so callers evaluating
    the smooth (regular + boundary) energy components may relax the pair
    part of the check with pair_check=False; the boundary clearance is
    always enforced.
    """
    if len(config):
        rho = config.rho(grid) if pair_check else \
            float(np.min(grid.boundary_distance(config.positions)))
        if rho <= 4.0 * grid.h:
            raise ConfigTooClose(
                f"configuration scale rho = {rho:.4g} must exceed 4h = {4.0 * grid.h:.4g}"
            )

    if bc.kind == NEUMANN:
        ii, jj = grid.boundary_ring()
        x1 = grid.x1()[ii]
        x2 = grid.x2()[jj]
        ring = np.zeros(ii.size)
        for k in range(len(config)):
            r = np.hypot(x1 - config.positions[k, 0], x2 - config.positions[k, 1])
            ring -= config.degrees[k] * np.log(r)
        boundary = scatter_ring(grid, ring)
        psi_reg = solve_dirichlet_poisson(grid, np.zeros(grid.shape), boundary=boundary)
        return StreamFunction(grid, config, bc.kind, psi_reg)

    # Dirichlet kind: Neumann data for psi_reg
    qb, qr, qt, ql = bc.tangential_current_edges(grid)
    qb, qr, qt, ql = map(np.array, (qb, qr, qt, ql))
    for k in range(len(config)):
        lb, lr, lt, ll = outward_normal_log_gradient_edges(grid, config.positions[k])
        dk = config.degrees[k]
        qb -= dk * lb
        qr -= dk * lr
        qt -= dk * lt
        ql -= dk * ll
    psi_reg, defect = solve_neumann_poisson(
        grid, np.zeros(grid.shape), flux=(ql, qr, qb, qt))
    return StreamFunction(grid, config, bc.kind, psi_reg, flux_defect=defect)


@dataclass(frozen=True)
class RenEnergyValue:
    """W with its pairwise-log and boundary/regular components."""

    W: float
    pairwise_term: float
    regular_term: float
    boundary_term: float

    def __post_init__(self):
        if not math.isfinite(self.W):
            raise ConfigTooClose("renormalized energy is not finite")


def _boundary_integral(grid: Grid, sf: StreamFunction, bc: BoundaryCondition) -> float:
    """1/2 oint psi d_nu psi along the edge, per-edge trapezoid."""
    if bc.kind == NEUMANN:
        return 0.0
    ii, jj = grid.boundary_ring()
    x1 = grid.x1()[ii]
    x2 = grid.x2()[jj]
    ring_psi = sf.psi_reg[ii, jj].astype(float).copy()
    for k in range(len(sf.config)):
        r = np.hypot(x1 - sf.config.positions[k, 0], x2 - sf.config.positions[k, 1])
        ring_psi += sf.config.degrees[k] * np.log(r)
    psi_b, psi_r, psi_t, psi_l = ring_to_edges(grid, ring_psi)

    qb, qr, qt, ql = bc.tangential_current_edges(grid)
    total = 0.0
    for psi_e, q_e in ((psi_b, qb), (psi_r, qr), (psi_t, qt), (psi_l, ql)):
        total += float(np.trapezoid(psi_e * np.asarray(q_e), dx=grid.h))
    return 0.5 * total


def renormalized_energy(grid: Grid, config: VortexConfiguration,
                        bc: BoundaryCondition,
                        pair_check: bool = True) -> RenEnergyValue:
    """Assemble W(config) by singularity subtraction (see module docstring)."""
    sf = stream_function(grid, config, bc, pair_check=pair_check)
    n = len(config)
    pos = config.positions
    deg = config.degrees

    pairwise = 0.0
    for k in range(n):
        for l in range(n):
            if l != k:
                pairwise -= math.pi * deg[k] * deg[l] * math.log(
                    float(np.linalg.norm(pos[k] - pos[l])))

    regular = 0.0
    if n:
        psi_at = np.atleast_1d(sf.psi_reg_at(pos))
        regular = -math.pi * float(np.sum(deg * psi_at))

    boundary = _boundary_integral(grid, sf, bc)
    return RenEnergyValue(W=pairwise + regular + boundary,
                          pairwise_term=pairwise, regular_term=regular,
                          boundary_term=boundary)


def fd_step(grid: Grid, rho: float, delta: float | None = None) -> float:
    """Finite-difference displacement for grad W: inside (4h, rho/8)."""
    lo = 4.0 * grid.h
    hi = rho / 8.0
    if lo >= hi:
        raise ConfigTooClose(
            f"no admissible FD step: need 4h = {lo:.4g} < rho/8 = {hi:.4g}"
        )
    if delta is None:
        return math.sqrt(lo * hi)
    if not (lo < delta < hi):
        raise ConfigTooClose(f"fd step {delta} outside the window ({lo:.4g}, {hi:.4g})")
    return delta


def grad_w_fd(grid: Grid, config: VortexConfiguration, bc: BoundaryCondition,
              delta: float | None = None) -> Array:
    """Plain central finite differences of the full W; (N, 2).

    The step window (4h, rho/8) keeps this usable only while rho > 32h, so
    tight pairs on coarse grids are rejected; `grad_w` below removes that
    restriction by splitting off the singular part analytically.
    """
    delta = fd_step(grid, config.rho(grid), delta)
    out = np.zeros((len(config), 2))
    for k in range(len(config)):
        for c, e in enumerate((np.array([1.0, 0.0]), np.array([0.0, 1.0]))):
            wp = renormalized_energy(grid, config.displaced(k, delta * e), bc).W
            wm = renormalized_energy(grid, config.displaced(k, -delta * e), bc).W
            out[k, c] = (wp - wm) / (2.0 * delta)
    return out


def grad_w(grid: Grid, config: VortexConfiguration, bc: BoundaryCondition,
           delta: float | None = None) -> Array:
    """Gradient of W in each vortex coordinate; (N, 2).

    Exact split: the pairwise log term is differentiated in closed form;
    the remaining regular + boundary components are smooth functions of the
    positions (the elliptic solves see the vortices only through interior
    boundary data), so they are centrally differenced with a step windowed
    by the boundary clearance alone.  This stays accurate arbitrarily close
    to a collision.  An explicit `delta` falls back to plain differences of
    the full W with the (4h, rho/8) window.
    """
    if delta is not None:
        return grad_w_fd(grid, config, bc, delta)
    return grad_w_pairwise(config) + grad_w_smooth(grid, config, bc)


def grad_w_smooth(grid: Grid, config: VortexConfiguration,
                  bc: BoundaryCondition) -> Array:
    """Central differences of the regular + boundary components of W."""
    rho_b = float(np.min(grid.boundary_distance(config.positions)))
    lo = 2.0 * grid.h
    hi = rho_b / 8.0
    if lo >= hi:
        raise ConfigTooClose(
            f"no admissible FD step for the regular part: need 2h = {lo:.4g} "
            f"< (boundary clearance)/8 = {hi:.4g}")
    step = math.sqrt(lo * hi)

    def smooth_part(c: VortexConfiguration) -> float:
        val = renormalized_energy(grid, c, bc, pair_check=False)
        return val.regular_term + val.boundary_term

    out = np.zeros((len(config), 2))
    for k in range(len(config)):
        for c_, e in enumerate((np.array([1.0, 0.0]), np.array([0.0, 1.0]))):
            wp = smooth_part(config.displaced(k, step * e))
            wm = smooth_part(config.displaced(k, -step * e))
            out[k, c_] = (wp - wm) / (2.0 * step)
    return out


def grad_w_pairwise(config: VortexConfiguration) -> Array:
    """Exact gradient of the pairwise log term:
    -2 pi d_k sum_{l != k} d_l (a_k - a_l)/|a_k - a_l|^2."""
    n = len(config)
    out = np.zeros((n, 2))
    for k in range(n):
        for l in range(n):
            if l != k:
                dx = config.positions[k] - config.positions[l]
                out[k] += (-2.0 * math.pi * config.degrees[k] * config.degrees[l]
                           * dx / float(dx @ dx))
    return out


# far-field diagnostic alias: the pairwise term dominates away from the edge
grad_w_farfield = grad_w_pairwise


def _validate_prop21_phi(grid: Grid, config: VortexConfiguration, k: int, phi):
    """phi must be affine near a_k, zero near the other vortices and near
    the boundary; checked by sampling grid nodes."""
    x1, x2 = grid.nodes()
    pos = config.positions
    r_aff = getattr(phi, "affine_radius", None)
    if r_aff is None or r_aff <= 4.0 * grid.h:
        raise TestFunctionInvalid("phi must expose an affine_radius > 4h around a_k")
    rk = np.hypot(x1 - pos[k, 0], x2 - pos[k, 1])
    gc = phi.grad_curl(x1, x2)
    worst = float(np.max(np.abs(gc[rk <= r_aff])))
    if worst > 1e-10:
        raise TestFunctionInvalid(
            f"phi is not affine in B_{r_aff:.3g}(a_k): max |grad curl phi| = {worst:.2e}")
    vals = np.abs(phi.value(x1, x2))
    for l in range(len(config)):
        if l == k:
            continue
        rl = np.hypot(x1 - pos[l, 0], x2 - pos[l, 1])
        sel = rl <= max(4.0 * grid.h, 0.25 * config.rho(grid))
        if sel.any() and float(np.max(vals[sel])) > 1e-12:
            raise TestFunctionInvalid(f"phi does not vanish near vortex {l}")
    edge = ~grid.interior_mask(collar=2)
    if float(np.max(vals[edge])) > 1e-12:
        raise TestFunctionInvalid("phi does not vanish near the boundary")


def prop21_check(grid: Grid, config: VortexConfiguration, bc: BoundaryCondition,
                 k: int, phi) -> tuple[float, float]:
    """Both sides of the stress identity for the canonical map.

    lhs = integral of (grad curl phi) : (j(u*) x j(u*)); the integrand is
    integrable because grad curl phi vanishes on the affine ball around a_k
    (nodes within h/2 of any vortex are masked; phi vanishes there anyway).
    rhs = -curl phi(a_k) . grad_W[k].
    """
    _validate_prop21_phi(grid, config, k, phi)
    sf = stream_function(grid, config, bc)
    j1, j2 = sf.current_values()
    x1, x2 = grid.nodes()
    gc = phi.grad_curl(x1, x2)
    integrand = (gc[..., 0, 0] * j1 * j1 + gc[..., 0, 1] * j1 * j2
                 + gc[..., 1, 0] * j2 * j1 + gc[..., 1, 1] * j2 * j2)
    mask = np.ones(grid.shape, dtype=bool)
    for l in range(len(config)):
        rl = np.hypot(x1 - config.positions[l, 0], x2 - config.positions[l, 1])
        mask &= rl > 0.5 * grid.h
    lhs = float(np.sum(integrand * mask * grid.quad_weights()))

    gw = grad_w(grid, config, bc)
    cphi = np.asarray(phi.curl(config.positions[k, 0], config.positions[k, 1]), dtype=float)
    rhs = -float(cphi @ gw[k])
    return lhs, rhs


def dump_stream_function(path, sf: StreamFunction, eps: float = 0.0) -> None:
    """Diagnostic dump of psi in the snapshot format (real-valued field)."""
    from .fields import ComplexField
    from .snapshot import write_snapshot
    write_snapshot(path, ComplexField(sf.grid, sf.psi_total().astype(complex)),
                   eps=eps)


class GradWCache:
    """grad W evaluator that reuses the last elliptic solves while the
    configuration has moved less than delta_cache (max norm over vortices).

    Only the smooth regular/boundary component is cached; the closed-form
    pairwise force, which dominates near a collision, is evaluated exactly
    on every call, so the cache does not quantize stopping times.
    """

    def __init__(self, grid: Grid, degrees, bc: BoundaryCondition,
                 delta_cache: float | None = None):
        self.grid = grid
        self.degrees = np.asarray(degrees, dtype=int)
        self.bc = bc
        self.delta_cache = 0.5 * grid.h if delta_cache is None else float(delta_cache)
        self._pos = None
        self._smooth = None
        self.recomputations = 0

    def evaluate(self, positions: Array, time: float = 0.0) -> Array:
        pos = np.asarray(positions, dtype=float).reshape(-1, 2)
        config = VortexConfiguration(pos, self.degrees, time)
        fresh = self._pos is None or self.delta_cache <= 0.0 or \
            float(np.max(np.linalg.norm(pos - self._pos, axis=1), initial=0.0)) \
            >= self.delta_cache
        if fresh:
            self._smooth = grad_w_smooth(self.grid, config, self.bc)
            self._pos = pos.copy()
            self.recomputations += 1
        return grad_w_pairwise(config) + self._smooth
