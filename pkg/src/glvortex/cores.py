"""Vortex core profile, its finite energy constant, and well-prepared data.

The degree-one core profile f solves

    f'' + f'/rho - f/rho^2 + (1 - f^2) f = 0,   f(0) = 0,  f -> 1,

on [0, R_max] with the asymptotic matching f(R_max) = 1 - 1/(2 R_max^2),
by damped Newton on a uniform 1D discretization.  The core constant is

    gamma = lim_R [ pi * int_0^R ((f')^2 + f^2/rho^2 + (1-f^2)^2/2) rho drho
                    - pi log R ],

evaluated by trapezoidal quadrature with the O(R^-2) tail correction
gamma(R) - pi/(4 R^2).

Well-prepared fields are the canonical-map phase times a product of radial
cores: u0 = u*(x; a, d) * prod_k f(|x - a_k| / eps).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import solve_banded

from .boundary import DIRICHLET, NEUMANN, BoundaryCondition
from .configuration import VortexConfiguration
from .elliptic import solve_neumann_poisson
from .errors import ConfigError, ConfigTooTight, NoConvergence
from .fields import ComplexField, EpsilonScaling, Grid
from .operators import d1, d2
from .renorm import StreamFunction, stream_function

DEFAULT_RESOLUTION = 4000
DEFAULT_R_MAX = 40.0
CACHE_ENV = "GLV_CACHE_DIR"

_memory_cache: dict = {}


@dataclass(frozen=True)
class RadialProfile:
    """Tabulated core profile f(rho) on a uniform grid [0, R_max]."""

    rho: np.ndarray
    f: np.ndarray
    resolution: int
    r_max: float
    newton_residual: float

    def __post_init__(self):
        self.rho.setflags(write=False)
        self.f.setflags(write=False)

    def f_at(self, r):
        """Interpolated profile; beyond the table use 1 - 1/(2 r^2)."""
        r = np.asarray(r, dtype=float)
        inside = np.interp(r, self.rho, self.f)
        far = 1.0 - 1.0 / (2.0 * np.maximum(r, self.r_max) ** 2)
        return np.where(r <= self.r_max, inside, far)


@dataclass(frozen=True)
class GammaEstimate:
    gamma: float
    resolution: int
    r_max: float
    residual: float  # quadrature drift between the two finest levels

    def __post_init__(self):
        if not (self.residual <= 1e-3 * abs(self.gamma)):
            raise NoConvergence(
                f"gamma quadrature residual {self.residual:.2e} exceeds "
                f"1e-3 * |gamma| = {1e-3 * abs(self.gamma):.2e}")


def radial_profile(resolution: int = DEFAULT_RESOLUTION,
                   r_max: float = DEFAULT_R_MAX,
                   tol: float = 1e-10, max_iter: int = 60) -> RadialProfile:
    """Damped-Newton relaxation of the core profile equation."""
    if resolution < 1000:
        raise ConfigError(f"profile resolution must be >= 1000, got {resolution}")
    n = int(resolution)
    rho = np.linspace(0.0, r_max, n + 1)
    drho = rho[1] - rho[0]
    f = rho / np.sqrt(rho**2 + 2.0)  # standard Pade seed
    f[0] = 0.0
    f[-1] = 1.0 - 1.0 / (2.0 * r_max**2)

    ri = rho[1:-1]

    def residual(ff):
        return ((ff[2:] - 2.0 * ff[1:-1] + ff[:-2]) / drho**2
                + (ff[2:] - ff[:-2]) / (2.0 * drho * ri)
                - ff[1:-1] / ri**2 + (1.0 - ff[1:-1] ** 2) * ff[1:-1])

    res = residual(f)
    norm = float(np.max(np.abs(res)))
    for _ in range(max_iter):
        if norm <= tol:
            break
        lower = np.full(n - 1, 1.0 / drho**2) - 1.0 / (2.0 * drho * ri)
        diag = -2.0 / drho**2 - 1.0 / ri**2 + 1.0 - 3.0 * f[1:-1] ** 2
        upper = np.full(n - 1, 1.0 / drho**2) + 1.0 / (2.0 * drho * ri)
        ab = np.zeros((3, n - 1))
        ab[0, 1:] = upper[:-1]
        ab[1, :] = diag
        ab[2, :-1] = lower[1:]
        step = solve_banded((1, 1), ab, -res)
        lam = 1.0
        while lam > 1e-6:
            trial = np.array(f)
            trial[1:-1] = f[1:-1] + lam * step
            tres = residual(trial)
            tnorm = float(np.max(np.abs(tres)))
            if tnorm < norm:
                f, res, norm = trial, tres, tnorm
                break
            lam *= 0.5
        else:
            # the residual floor is ~ eps / drho^2; accept a stall there
            if norm <= max(tol, 1e3 * 2.3e-16 / drho**2):
                break
            raise NoConvergence("radial profile Newton damping stalled")
    else:
        raise NoConvergence(f"radial profile Newton residual {norm:.2e} > {tol:.0e}")

    if np.any(f < -1e-12) or np.any(f > 1.0 + 1e-12):
        raise NoConvergence("radial profile left [0, 1]")
    if np.any(np.diff(f) <= 0.0):
        raise NoConvergence("radial profile is not strictly increasing")
    tail = rho >= 0.1 * r_max
    if np.any(f[tail] < 1.0 - 1.0 / rho[tail] ** 2):
        raise NoConvergence("radial profile tail decays slower than 1 - C/rho^2")
    return RadialProfile(rho=rho, f=np.ascontiguousarray(f), resolution=n,
                         r_max=r_max, newton_residual=norm)


def core_energy_minus_log(rho: np.ndarray, f: np.ndarray, r: float) -> float:
    """pi * int_0^r e_core(f) rho drho - pi log r on the tabulated profile."""
    sel = rho <= r + 1e-12
    rr = rho[sel]
    ff = f[sel]
    fp = np.gradient(ff, rr[1] - rr[0], edge_order=2)
    integrand = (fp**2 + np.divide(ff**2, rr**2, out=np.zeros_like(rr), where=rr > 0)
                 + 0.5 * (1.0 - ff**2) ** 2) * rr
    return math.pi * float(np.trapezoid(integrand, rr)) - math.pi * math.log(r)


def gamma_constant(profile: RadialProfile) -> GammaEstimate:
    """Core energy constant with tail extrapolation and a two-level
    quadrature residual (coarse level uses every second table node)."""
    r = profile.r_max
    fine = core_energy_minus_log(profile.rho, profile.f, r) - math.pi / (4.0 * r**2)
    coarse = core_energy_minus_log(profile.rho[::2], profile.f[::2], r) \
        - math.pi / (4.0 * r**2)
    return GammaEstimate(gamma=fine, resolution=profile.resolution,
                         r_max=r, residual=abs(fine - coarse))


# ---------------------------------------------------------------------------
# profile cache
# ---------------------------------------------------------------------------

def save_profile(path, profile: RadialProfile) -> None:
    with open(path, "w") as fh:
        fh.write("# glvortex radial core profile\n")
        fh.write(f"# resolution={profile.resolution} r_max={profile.r_max!r} "
                 f"newton_residual={profile.newton_residual!r}\n")
        for r, v in zip(profile.rho, profile.f):
            fh.write(f"{float(r)!r} {float(v)!r}\n")


def load_profile(path) -> RadialProfile:
    lines = Path(path).read_text().splitlines()
    meta = dict(item.split("=") for item in lines[1].lstrip("# ").split())
    data = np.array([[float(a) for a in ln.split()] for ln in lines[2:]])
    return RadialProfile(rho=data[:, 0], f=data[:, 1],
                         resolution=int(meta["resolution"]),
                         r_max=float(meta["r_max"]),
                         newton_residual=float(meta["newton_residual"]))


def cached_profile(resolution: int = DEFAULT_RESOLUTION,
                   r_max: float = DEFAULT_R_MAX) -> RadialProfile:
    """Profile, memoized in-process and optionally on disk (GLV_CACHE_DIR)."""
    key = (resolution, r_max)
    if key in _memory_cache:
        return _memory_cache[key]
    cache_dir = os.environ.get(CACHE_ENV)
    path = None
    if cache_dir:
        path = Path(cache_dir) / f"core_profile_n{resolution}_R{r_max:g}.txt"
        if path.exists():
            prof = load_profile(path)
            _memory_cache[key] = prof
            return prof
    prof = radial_profile(resolution, r_max)
    _memory_cache[key] = prof
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        save_profile(path, prof)
    return prof


def default_gamma() -> float:
    return gamma_constant(cached_profile()).gamma


# ---------------------------------------------------------------------------
# canonical map field and well-prepared data
# ---------------------------------------------------------------------------

def _harmonic_conjugate(grid: Grid, psi_reg: np.ndarray) -> np.ndarray:
    """chi with grad chi = grad_perp psi_reg (least-squares via Poisson).

    grad_perp psi_reg is discretely curl-free up to O(h^2); the Neumann
    solve projects onto exact gradients.
    """
    h = grid.h
    v1 = -d2(psi_reg, h)
    v2 = d1(psi_reg, h)
    rhs = d1(v1, h) + d2(v2, h)
    # outward flux of chi per edge: v . nu = -(tangential ccw derivative of psi_reg)
    q_bottom = -np.gradient(psi_reg[:, 0], h, edge_order=2)
    q_right = -np.gradient(psi_reg[-1, :], h, edge_order=2)
    q_top = np.gradient(psi_reg[:, -1], h, edge_order=2)
    q_left = np.gradient(psi_reg[0, :], h, edge_order=2)
    chi, _ = solve_neumann_poisson(grid, rhs, flux=(q_left, q_right, q_bottom, q_top))
    return chi


def canonical_map_field(grid: Grid, config: VortexConfiguration,
                        bc: BoundaryCondition) -> tuple[np.ndarray, StreamFunction]:
    """Unit-modulus canonical map u* as a grid array (singular at the a_k),
    together with its stream function."""
    sf = stream_function(grid, config, bc)
    chi = _harmonic_conjugate(grid, sf.psi_reg)
    x1, x2 = grid.nodes()
    u = np.exp(1j * chi)
    for k in range(len(config)):
        z = (x1 - config.positions[k, 0]) + 1j * (x2 - config.positions[k, 1])
        r = np.abs(z)
        w = np.where(r > 1e-14, z / np.maximum(r, 1e-14), 1.0)
        u = u * (w if config.degrees[k] == 1 else np.conj(w))
    return u, sf


def canonical_boundary_trace(grid: Grid, config: VortexConfiguration) -> np.ndarray:
    """Unimodular boundary trace of the Neumann-kind canonical map; the
    natural Dirichlet datum g for a run starting from `config`."""
    u, _ = canonical_map_field(grid, config, BoundaryCondition(kind=NEUMANN))
    ii, jj = grid.boundary_ring()
    ring = u[ii, jj]
    return ring / np.abs(ring)


def well_prepared(config: VortexConfiguration, scaling: EpsilonScaling,
                  grid: Grid, bc: BoundaryCondition,
                  profile: RadialProfile | None = None) -> ComplexField:
    """Initial field: canonical-map phase times radial cores of size eps.

    Requires rho(config) > 8 eps and > 8 h (ConfigTooTight otherwise).  For
    Dirichlet runs the boundary nodes are overwritten with g exactly.
    """
    rho = config.rho(grid)
    if rho <= 8.0 * scaling.eps:
        raise ConfigTooTight(
            f"configuration scale rho = {rho:.4g} must exceed 8 eps = {8.0 * scaling.eps:.4g}")
    if rho <= 8.0 * grid.h:
        raise ConfigTooTight(
            f"configuration scale rho = {rho:.4g} must exceed 8 h = {8.0 * grid.h:.4g}")
    if profile is None:
        profile = cached_profile()
    u, _ = canonical_map_field(grid, config, bc)
    x1, x2 = grid.nodes()
    for k in range(len(config)):
        r = np.hypot(x1 - config.positions[k, 0], x2 - config.positions[k, 1])
        u = u * profile.f_at(r / scaling.eps)
    if bc.kind == DIRICHLET:
        # the conjugate solve fixes the global phase only up to a constant;
        # align it with g before pinning the trace exactly
        bc.check_ring(grid)
        ii, jj = grid.boundary_ring()
        ring = u[ii, jj]
        mism = np.sum(bc.g * np.conj(ring / np.abs(ring)))
        if abs(mism) > 0:
            u = u * (mism / abs(mism))
        u[ii, jj] = bc.g
    return ComplexField(grid, u, time=0.0)
