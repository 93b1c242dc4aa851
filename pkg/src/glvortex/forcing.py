"""Built-in families of smooth external vector fields F(x, t) and G(x, t).

Every family is C^2 in space (quintic smoothstep cutoffs) and smooth in
time.  Admissibility: F and G vanish on the boundary at t = 0; for Neumann
runs G must in addition be tangential on the boundary at all times.  Both
conditions are checked by sampling boundary nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary import NEUMANN
from .errors import ConfigError
from .fields import Grid

BOUNDARY_TOL = 1e-12

FAMILIES = ("zero", "cutoff_constant", "rigid_rotation", "shear", "polynomial",
            "custom")  # custom: evaluable hook (tests); not config-file loadable


def smootherstep(t):
    """C^2 ramp: 0 for t <= 0, 1 for t >= 1, 6t^5 - 15t^4 + 10t^3 between."""
    s = np.clip(t, 0.0, 1.0)
    return s * s * s * (s * (6.0 * s - 15.0) + 10.0)


def plateau(r, r_plateau: float, r_cutoff: float):
    """Radial cutoff: 1 inside r_plateau, 0 outside r_cutoff, C^2 ramp between."""
    if not (0.0 <= r_plateau < r_cutoff):
        raise ConfigError("cutoff radii must satisfy 0 <= r_plateau < r_cutoff")
    return 1.0 - smootherstep((r - r_plateau) / (r_cutoff - r_plateau))


@dataclass(frozen=True)
class FieldSpec:
    """One external vector field: family name, parameters, optional ramp.

    ramp_time > 0 multiplies the field by smootherstep(t / ramp_time), so
    the field vanishes identically at t = 0.
    """

    family: str
    params: dict = field(default_factory=dict)
    ramp_time: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"fields.family must be one of {FAMILIES}, got {self.family!r}")

    def is_zero(self) -> bool:
        return self.family == "zero"

    def __call__(self, x1, x2, t: float):
        """Evaluate at coordinates (arrays or scalars); returns (f1, f2)."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        p = self.params
        if self.family == "zero":
            f1 = np.zeros(np.broadcast(x1, x2).shape)
            f2 = np.zeros_like(f1)
            return f1, f2
        if self.family == "custom":
            f1, f2 = p["func"](x1, x2, t)
            if self.ramp_time > 0.0:
                ramp = float(smootherstep(t / self.ramp_time))
                return f1 * ramp, f2 * ramp
            return np.asarray(f1, dtype=float), np.asarray(f2, dtype=float)

        cx, cy = p.get("center", (0.0, 0.0))
        r = np.hypot(x1 - cx, x2 - cy)
        chi = 1.0
        if "r_cutoff" in p:
            chi = plateau(r, p.get("r_plateau", 0.0), p["r_cutoff"])

        if self.family == "cutoff_constant":
            v1, v2 = p["value"]
            f1 = v1 * chi * np.ones_like(r)
            f2 = v2 * chi * np.ones_like(r)
        elif self.family == "rigid_rotation":
            om = p["omega"]
            f1 = -om * (x2 - cy) * chi
            f2 = om * (x1 - cx) * chi
        elif self.family == "shear":
            rate = p["rate"]
            f1 = rate * (x2 - cy) * chi
            f2 = np.zeros_like(f1)
        elif self.family == "polynomial":
            f1 = np.zeros_like(r)
            f2 = np.zeros_like(r)
            for i, j, c in p.get("coeffs1", []):
                f1 += c * (x1 - cx) ** i * (x2 - cy) ** j
            for i, j, c in p.get("coeffs2", []):
                f2 += c * (x1 - cx) ** i * (x2 - cy) ** j
            f1 *= chi
            f2 *= chi
        else:  # pragma: no cover
            raise ConfigError(f"unhandled family {self.family!r}")

        if self.ramp_time > 0.0:
            ramp = float(smootherstep(t / self.ramp_time))
            f1 = f1 * ramp
            f2 = f2 * ramp
        return f1, f2


ZERO_FIELD = FieldSpec("zero")


@dataclass
class ExternalFields:
    """The pair (F, G) with admissibility metadata filled in by validate()."""

    F: FieldSpec = ZERO_FIELD
    G: FieldSpec = ZERO_FIELD
    F_zero_at_t0_boundary: bool | None = None
    G_zero_at_t0_boundary: bool | None = None
    G_tangential: bool | None = None

    def is_zero(self) -> bool:
        return self.F.is_zero() and self.G.is_zero()

    def eval_F(self, x1, x2, t: float):
        return self.F(x1, x2, t)

    def eval_G(self, x1, x2, t: float):
        return self.G(x1, x2, t)

    def eval_on_grid(self, which: str, grid: Grid, t: float):
        """Field on the grid nodes; the spatial part (time enters only via
        the ramp factor) is cached per grid."""
        spec = self.F if which == "F" else self.G
        if spec.family == "custom":  # arbitrary time dependence: no caching
            x1, x2 = grid.nodes()
            return spec(x1, x2, t)
        cache = self.__dict__.setdefault("_spatial_cache", {})
        key = (which, grid)
        if key not in cache:
            x1, x2 = grid.nodes()
            base = FieldSpec(spec.family, spec.params)  # ramp stripped
            cache[key] = base(x1, x2, 0.0)
        f1, f2 = cache[key]
        if spec.ramp_time > 0.0:
            ramp = float(smootherstep(t / spec.ramp_time))
            return f1 * ramp, f2 * ramp
        return f1, f2

    def max_magnitude(self, grid: Grid, t_samples) -> float:
        """Largest |F| + |G| over grid nodes and sampled times (CFL aid)."""
        x1, x2 = grid.nodes()
        best = 0.0
        for t in t_samples:
            f1, f2 = self.eval_F(x1, x2, t)
            g1, g2 = self.eval_G(x1, x2, t)
            best = max(best, float(np.max(np.hypot(f1, f2) + np.hypot(g1, g2))))
        return best

    def validate(self, grid: Grid, bc_kind: str, t_samples=(0.0,)):
        """Check the compatibility conditions; raises ConfigError.

        F(x,0) = G(x,0) = 0 on boundary nodes (tolerance 1e-12); Neumann runs
        additionally need (G, nu) = 0 on the boundary at every sampled t.
        """
        ii, jj = grid.boundary_ring()
        x1 = grid.x1()[ii]
        x2 = grid.x2()[jj]

        f1, f2 = self.eval_F(x1, x2, 0.0)
        worst = float(np.max(np.hypot(f1, f2), initial=0.0))
        self.F_zero_at_t0_boundary = worst <= BOUNDARY_TOL
        if not self.F_zero_at_t0_boundary:
            raise ConfigError(
                f"fields.F must vanish on the boundary at t=0 (max |F| = {worst:.3e})"
            )

        g1, g2 = self.eval_G(x1, x2, 0.0)
        worst = float(np.max(np.hypot(g1, g2), initial=0.0))
        self.G_zero_at_t0_boundary = worst <= BOUNDARY_TOL
        if not self.G_zero_at_t0_boundary:
            raise ConfigError(
                f"fields.G must vanish on the boundary at t=0 (max |G| = {worst:.3e})"
            )

        if bc_kind == NEUMANN:
            x_lo, x_hi = grid.origin[0], grid.origin[0] + grid.extent[0]
            y_lo, y_hi = grid.origin[1], grid.origin[1] + grid.extent[1]
            worst = 0.0
            for t in t_samples:
                g1, g2 = self.eval_G(x1, x2, t)
                # normal component per node; corners require both to vanish
                on_x = (np.isclose(x1, x_lo) | np.isclose(x1, x_hi))
                on_y = (np.isclose(x2, y_lo) | np.isclose(x2, y_hi))
                gn = np.where(on_x, np.abs(g1), 0.0) + np.where(on_y, np.abs(g2), 0.0)
                worst = max(worst, float(np.max(gn, initial=0.0)))
            self.G_tangential = worst <= BOUNDARY_TOL
            if not self.G_tangential:
                raise ConfigError(
                    f"fields.G must be tangential on the boundary for Neumann runs "
                    f"(max |(G, nu)| = {worst:.3e})"
                )
        return self
