"""Semi-implicit time integration of the forced mixed Ginzburg-Landau flow

    (lambda_eps + i) d_t u + k_eps (F.grad) u + (G.grad)(iu)
        = Lap u + (1/eps^2)(1 - |u|^2) u

with Dirichlet (pinned unimodular trace) or zero-Neumann boundary
conditions, plus the online conservation-law residual monitor.

Scheme: first-order IMEX.  The Laplacian is implicit; division by the
complex coefficient uses 1/(lambda_eps + i) = (lambda_eps - i) /
(lambda_eps^2 + 1); the reaction and convective terms are explicit.  Each
step is one fast sine (Dirichlet) or cosine (Neumann) transform solve.  The
time step follows dt = min(eps^2/4, CFL h / v_conv): the explicit eps^-2
reaction dictates the first term; the implicit Laplacian needs no h^2
restriction.  The modulus is never clamped (|u| <= 1 is not available for
this flow); overshoots are legal and monitored.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .boundary import DIRICHLET, BoundaryCondition
from .elliptic import solve_dirichlet_helmholtz, solve_neumann_helmholtz
from .errors import ConfigError, NonFinite, StabilityViolation
from .fields import ComplexField, EpsilonScaling, Grid
from .forcing import ExternalFields
from .operators import (cross, d1, d2, energy_density_values, inner,
                        stencil_energy_values)

Array = np.ndarray

DEFAULT_ENERGY_GUARD = 1e-6
RESIDUAL_COLLAR = 3


@lru_cache(maxsize=16)
def _nodes(grid: Grid):
    return grid.nodes()


@dataclass(frozen=True)
class PdeState:
    """One time level: the field, its index, and the backward difference
    u_t = (u^n - u^{n-1}) / dt cached by the stepper (None at t = 0)."""

    u: ComplexField
    step_index: int = 0
    u_t: ComplexField | None = None

    @property
    def t(self) -> float:
        return self.u.time


def default_dt(scaling: EpsilonScaling, grid: Grid,
               fields: ExternalFields | None = None,
               t_samples=(0.0,), cfl: float = 0.25,
               safety: float = 1.0) -> float:
    """Stability policy: the explicit reaction needs dt <= eps^2/4; explicit
    centered convection adds an advective CFL bound."""
    dt = safety * scaling.eps**2 / 4.0
    if fields is not None and not fields.is_zero():
        vmax = fields.max_magnitude(grid, t_samples)
        v_eff = scaling.k_eps * vmax + vmax
        if v_eff > 0.0:
            dt = min(dt, cfl * grid.h / v_eff)
    return dt


def _explicit_terms(u: Array, t: float, grid: Grid, scaling: EpsilonScaling,
                    fields: ExternalFields | None) -> Array:
    h = grid.h
    out = (1.0 - (u * np.conj(u)).real) * u / scaling.eps**2
    if fields is not None and not fields.is_zero():
        du1, du2 = d1(u, h), d2(u, h)
        if not fields.F.is_zero():
            f1, f2 = fields.eval_on_grid("F", grid, t)
            out -= scaling.k_eps * (f1 * du1 + f2 * du2)
        if not fields.G.is_zero():
            g1, g2 = fields.eval_on_grid("G", grid, t)
            out -= 1j * (g1 * du1 + g2 * du2)
    return out


def step(state: PdeState, dt: float, scaling: EpsilonScaling,
         bc: BoundaryCondition, fields: ExternalFields | None = None,
         energy_guard: float | None = None) -> PdeState:
    """One IMEX step; returns the new state with u_t cached.

    energy_guard (meaningful only when F = G = 0): raise StabilityViolation
    if the post-step relative energy jump exceeds it.
    """
    if dt <= 0.0:
        raise ConfigError("pde.dt must be positive")
    grid = state.u.grid
    u = state.u.values
    t = state.t
    lam = scaling.lambda_eps
    alpha = (lam - 1j) / (lam * lam + 1.0)
    c = dt * alpha

    rhs = u + c * _explicit_terms(u, t, grid, scaling, fields)
    if bc.kind == DIRICHLET:
        u_next = solve_dirichlet_helmholtz(grid, rhs, c, boundary=bc.g_full(grid))
    else:
        u_next = solve_neumann_helmholtz(grid, rhs, c)

    if not np.all(np.isfinite(u_next)):
        raise NonFinite(f"non-finite field after step {state.step_index + 1}")

    unforced = fields is None or fields.is_zero()
    if energy_guard is not None and unforced:
        # the scheme-consistent (stencil) energy is dissipated to round-off
        quad = grid.quad_weights()
        e0 = stencil_energy_values(u, grid.h, scaling.eps, quad)
        e1 = stencil_energy_values(u_next, grid.h, scaling.eps, quad)
        if e1 - e0 > energy_guard * max(1.0, abs(e0)):
            raise StabilityViolation(
                f"unforced energy grew by {e1 - e0:.3e} in one step "
                f"(guard {energy_guard:.1e}); reduce dt")

    u_t = ComplexField(grid, (u_next - u) / dt, time=t + dt)
    return PdeState(u=ComplexField(grid, u_next, time=t + dt),
                    step_index=state.step_index + 1, u_t=u_t)


def mirrored_operator_residual(state: PdeState, prev: PdeState, dt: float,
                               scaling: EpsilonScaling,
                               fields: ExternalFields | None = None) -> float:
    """Exactness of a Neumann step: max |(I - c Lap_N) u_next - rhs|.

    The mirrored-ghost Laplacian encodes the zero normal derivative; the
    transform solve inverts it exactly, so this residual is round-off.  It
    is the scheme-native statement of the Neumann flux invariant.
    """
    from .elliptic import apply_neumann_laplacian
    grid = prev.u.grid
    lam = scaling.lambda_eps
    c = dt * (lam - 1j) / (lam * lam + 1.0)
    rhs = prev.u.values + c * _explicit_terms(prev.u.values, prev.t, grid, scaling, fields)
    lhs = state.u.values - c * apply_neumann_laplacian(grid, state.u.values)
    return float(np.max(np.abs(lhs - rhs)))


def one_sided_normal_flux(u: ComplexField) -> float:
    """Largest one-sided (second-order) normal derivative on the boundary;
    O(h^2) for Neumann solutions of the mirrored scheme."""
    v = u.values
    h = u.grid.h
    worst = 0.0
    d_left = (-3.0 * v[0, :] + 4.0 * v[1, :] - v[2, :]) / (2.0 * h)
    d_right = (3.0 * v[-1, :] - 4.0 * v[-2, :] + v[-3, :]) / (2.0 * h)
    d_bottom = (-3.0 * v[:, 0] + 4.0 * v[:, 1] - v[:, 2]) / (2.0 * h)
    d_top = (3.0 * v[:, -1] - 4.0 * v[:, -2] + v[:, -3]) / (2.0 * h)
    for d in (d_left, d_right, d_bottom, d_top):
        worst = max(worst, float(np.max(np.abs(d))))
    return worst


# ---------------------------------------------------------------------------
# conservation-law residual monitor
# ---------------------------------------------------------------------------

ENERGY_TERMS = ("dt_energy", "dissipation", "f_momentum", "g_velocity", "div_momentum",
                "source")
JACOBIAN_TERMS = ("dt_jacobian", "curl_momentum", "curl_div_stress", "f_stress",
                  "g_jacobian", "source")
MASS_TERMS = ("dt_mass", "rotation", "f_current", "g_mass", "div_current", "source")


@dataclass(frozen=True)
class ResidualReport:
    """L2 norms (interior, collar excluded) of each named term and of the
    total residual of the three conservation laws, averaged over the
    window's consecutive state pairs."""

    energy: dict
    jacobian: dict
    mass: dict
    pairs: int
    collar: int

    def totals(self) -> tuple[float, float, float]:
        return self.energy["total"], self.jacobian["total"], self.mass["total"]


def _norms(parts: dict, mask: Array, w: Array) -> dict:
    out = {}
    total = None
    for name, arr in parts.items():
        out[name] = float(np.sqrt(np.sum((arr * mask) ** 2 * w)))
        total = arr if total is None else total + arr
    out["total"] = float(np.sqrt(np.sum((total * mask) ** 2 * w)))
    return out


def _pair_residuals(s0: PdeState, s1: PdeState, scaling: EpsilonScaling,
                    fields: ExternalFields | None, collar: int, source=None):
    """Assemble the three laws for one consecutive pair.

    Spatial terms are evaluated at the midpoint average; time derivatives
    are backward differences, matching the stepper's u_t convention.  All
    terms are moved to one side, so each law's exact solution residual is
    O(dt^2 + h^2).  The optional `source` callback is the defect of a
    manufactured solution; it enters each law through the pairing that
    derived it (with d_t u, with iu, and through the current identity).
    """
    grid = s0.u.grid
    h = grid.h
    dt = s1.t - s0.t
    if dt <= 0.0:
        raise ConfigError("residuals need strictly increasing times")
    u0 = s0.u.values
    u1 = s1.u.values
    um = 0.5 * (u0 + u1)
    tm = 0.5 * (s0.t + s1.t)
    u_t = (u1 - u0) / dt
    lam = scaling.lambda_eps
    k = scaling.k_eps
    eps = scaling.eps

    x1, x2 = _nodes(grid)
    if fields is not None and not fields.F.is_zero():
        f1, f2 = fields.eval_F(x1, x2, tm)
    else:
        f1 = f2 = np.zeros(grid.shape)
    if fields is not None and not fields.G.is_zero():
        g1, g2 = fields.eval_G(x1, x2, tm)
    else:
        g1 = g2 = np.zeros(grid.shape)

    du1, du2 = d1(um, h), d2(um, h)
    p1 = inner(u_t, du1)
    p2 = inner(u_t, du2)
    j1 = cross(um, du1)
    j2 = cross(um, du2)
    v1 = cross(u_t, du1)
    v2 = cross(u_t, du2)
    jpt = cross(du1, du2)

    s_arr = None
    if source is not None:
        s_arr = np.asarray(source(x1, x2, tm), dtype=complex)
    zero = np.zeros(grid.shape)

    # --- energy law ---
    e0 = energy_density_values(u0, h, eps)
    e1 = energy_density_values(u1, h, eps)
    energy = {
        "dt_energy": (e1 - e0) / dt,
        "dissipation": lam * (u_t * np.conj(u_t)).real,
        "f_momentum": k * (f1 * p1 + f2 * p2),
        "g_velocity": -(g1 * v1 + g2 * v2),
        "div_momentum": -(d1(p1, h) + d2(p2, h)),
        "source": -inner(s_arr, u_t) if s_arr is not None else zero,
    }

    # --- Jacobian law (pointwise-determinant Jacobian at nodes) ---
    jpt0 = cross(d1(u0, h), d2(u0, h))
    jpt1 = cross(d1(u1, h), d2(u1, h))
    t11 = inner(du1, du1)
    t12 = inner(du1, du2)
    t22 = inner(du2, du2)
    divT1 = d1(t11, h) + d2(t12, h)
    divT2 = d1(t12, h) + d2(t22, h)
    ft1 = f1 * t11 + f2 * t12
    ft2 = f1 * t12 + f2 * t22
    igj1 = -g2 * jpt
    igj2 = g1 * jpt

    def curl_vec(a1, a2):
        return d1(a2, h) - d2(a1, h)

    jac = {
        "dt_jacobian": (jpt1 - jpt0) / dt,
        "curl_momentum": lam * curl_vec(p1, p2),
        "curl_div_stress": -curl_vec(divT1, divT2),
        "f_stress": k * curl_vec(ft1, ft2),
        "g_jacobian": curl_vec(igj1, igj2),
        "source": -curl_vec(inner(s_arr, du1), inner(s_arr, du2))
                  if s_arr is not None else zero,
    }

    # --- mass law ---
    m0 = 0.5 * (1.0 - (u0 * np.conj(u0)).real)
    m1 = 0.5 * (1.0 - (u1 * np.conj(u1)).real)
    mm = 0.5 * (m0 + m1)
    mass = {
        "dt_mass": -(m1 - m0) / dt,
        "rotation": lam * cross(um, u_t),
        "f_current": k * (f1 * j1 + f2 * j2),
        "g_mass": -(g1 * d1(mm, h) + g2 * d2(mm, h)),
        "div_current": -(d1(j1, h) + d2(j2, h)),
        "source": -inner(s_arr, 1j * um) if s_arr is not None else zero,
    }
    return energy, jac, mass


def conservation_residuals(states, scaling: EpsilonScaling,
                           fields: ExternalFields | None = None,
                           collar: int = RESIDUAL_COLLAR,
                           source=None) -> ResidualReport:
    """Residual norms of the three conservation laws over a window of
    consecutive states (at least two)."""
    if len(states) < 2:
        raise ConfigError("residual window needs at least two states")
    grid = states[0].u.grid
    mask = grid.interior_mask(collar=collar).astype(float)
    w = grid.quad_weights()
    acc = None
    pairs = 0
    for s0, s1 in zip(states[:-1], states[1:]):
        e, j, m = _pair_residuals(s0, s1, scaling, fields, collar, source=source)
        norms = (_norms(e, mask, w), _norms(j, mask, w), _norms(m, mask, w))
        if acc is None:
            acc = [dict(n) for n in norms]
        else:
            for slot, n in zip(acc, norms):
                for key in n:
                    slot[key] += n[key]
        pairs += 1
    for slot in acc:
        for key in slot:
            slot[key] /= pairs
    return ResidualReport(energy=acc[0], jacobian=acc[1], mass=acc[2],
                          pairs=pairs, collar=collar)
