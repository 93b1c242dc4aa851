"""Run configuration: TOML parsing, validation, and object construction.

A run file is TOML with sections [domain], [pde], [bc], [initial],
[fields.F], [fields.G], [ode], [output], [sweep]; the top-level `kind`
selects the experiment (simulate | ode | compare | sweep | diagnose).
Every validation error names the offending key.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .boundary import DIRICHLET, NEUMANN, BoundaryCondition
from .configuration import VortexConfiguration
from .errors import ConfigError
from .fields import EpsilonScaling, Grid
from .forcing import ExternalFields, FieldSpec

KINDS = ("simulate", "ode", "compare", "sweep", "diagnose")

# auto-grid candidate sizes: n - 1; powers of two times small factors keep
# both the interior sine and full cosine transforms on fast lengths
FAST_CELL_COUNTS = (64, 96, 128, 192, 256, 384, 512, 768, 1024, 1536, 2048)


@dataclass
class RunConfig:
    """Validated experiment description (defaults resolved)."""

    kind: str
    raw: dict
    domain: dict
    pde: dict
    bc: dict
    initial: dict
    fields: dict
    ode: dict
    output: dict
    sweep: dict
    seed: int = 0

    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _req(section: dict, sec_name: str, key: str):
    if key not in section:
        raise ConfigError(f"{sec_name}.{key} is required")
    return section[key]


def _num(section, sec_name, key, default=None, positive=False):
    val = section.get(key, default)
    if val is None:
        raise ConfigError(f"{sec_name}.{key} is required")
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ConfigError(f"{sec_name}.{key} must be a number, got {val!r}")
    if positive and val <= 0:
        raise ConfigError(f"{sec_name}.{key} must be positive, got {val}")
    return float(val)


def read_config_data(path) -> dict:
    """Raw dict from a TOML run file (or a manifest.json with an embedded
    config)."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {p} does not exist")
    if p.suffix == ".json":
        data = json.loads(p.read_text())
        if "config" in data:
            data = data["config"]
        return data
    try:
        return tomllib.loads(p.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {p} is not valid TOML: {exc}") from exc


def load_config(path) -> RunConfig:
    """Parse and validate a run file."""
    return resolve_config(read_config_data(path))


def resolve_config(data: dict) -> RunConfig:
    kind = data.get("kind", "simulate")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")

    dom = dict(data.get("domain", {}))
    dom.setdefault("origin", [0.0, 0.0])
    dom.setdefault("extent", [1.0, 1.0])
    if len(dom["origin"]) != 2 or len(dom["extent"]) != 2:
        raise ConfigError("domain.origin/extent must be 2-vectors")
    dom.setdefault("n1", 257)
    dom.setdefault("n2", dom["n1"])
    for key in ("n1", "n2"):
        if not isinstance(dom[key], int) or dom[key] < 16:
            raise ConfigError(f"domain.{key} must be an integer >= 16")

    pde = dict(data.get("pde", {}))
    pde["eps"] = _num(pde, "pde", "eps", positive=True)
    if pde["eps"] >= 1.0:
        raise ConfigError(f"pde.eps must be < 1, got {pde['eps']}")
    pde["lambda0"] = _num(pde, "pde", "lambda0", default=1.0, positive=True)
    pde["t_final"] = _num(pde, "pde", "t_final", default=0.0)
    if pde["t_final"] < 0.0:
        raise ConfigError("pde.t_final must be >= 0")
    pde["dt"] = _num(pde, "pde", "dt", default=0.0)
    pde["dt_safety"] = _num(pde, "pde", "dt_safety", default=1.0, positive=True)
    pde["energy_guard"] = _num(pde, "pde", "energy_guard", default=1e-6, positive=True)

    bc = dict(data.get("bc", {}))
    bc.setdefault("kind", NEUMANN)
    if bc["kind"] not in (DIRICHLET, NEUMANN):
        raise ConfigError(f"bc.kind must be '{DIRICHLET}' or '{NEUMANN}'")
    if bc["kind"] == DIRICHLET:
        bc.setdefault("g", "canonical")
        if bc["g"] not in ("canonical", "power"):
            raise ConfigError("bc.g must be 'canonical' or 'power'")
        if bc["g"] == "power":
            bc.setdefault("g_degree", 1)
            if not isinstance(bc["g_degree"], int):
                raise ConfigError("bc.g_degree must be an integer")

    init = dict(data.get("initial", {}))
    positions = init.get("positions", [])
    degrees = init.get("degrees", [])
    if len(positions) != len(degrees):
        raise ConfigError("initial.positions and initial.degrees differ in length")
    init["positions"] = [[float(a) for a in p] for p in positions]
    init["degrees"] = [int(d) for d in degrees]
    if any(d not in (-1, 1) for d in init["degrees"]):
        raise ConfigError("initial.degrees entries must be +1 or -1")

    fields = {"F": _field_spec(data.get("fields", {}).get("F", {}), "fields.F"),
              "G": _field_spec(data.get("fields", {}).get("G", {}), "fields.G")}

    ode = dict(data.get("ode", {}))
    ode["rtol"] = _num(ode, "ode", "rtol", default=1e-8, positive=True)
    ode["atol"] = _num(ode, "ode", "atol", default=1e-10, positive=True)
    ode["delta_cache"] = ode.get("delta_cache")
    if ode["delta_cache"] is not None:
        ode["delta_cache"] = float(ode["delta_cache"])

    out = dict(data.get("output", {}))
    out.setdefault("snapshot_stride", 25)
    if not isinstance(out["snapshot_stride"], int) or out["snapshot_stride"] < 1:
        raise ConfigError("output.snapshot_stride must be a positive integer")
    out.setdefault("snapshot_every", 0)
    if not isinstance(out["snapshot_every"], int) or out["snapshot_every"] < 0:
        raise ConfigError("output.snapshot_every must be a non-negative integer")
    out["v_max"] = _num(out, "output", "v_max", default=50.0, positive=True)
    out["well_prepared_threshold"] = _num(out, "output", "well_prepared_threshold",
                                          default=0.5, positive=True)
    out.setdefault("collar_cells", 2)

    sweep = dict(data.get("sweep", {}))
    if kind == "sweep":
        eps_list = sweep.get("eps")
        if not eps_list or not all(isinstance(e, (int, float)) and 0 < e < 1
                                   for e in eps_list):
            raise ConfigError("sweep.eps must be a non-empty list of values in (0, 1)")
        sweep["eps"] = [float(e) for e in eps_list]
        sweep["h_per_eps"] = _num(sweep, "sweep", "h_per_eps", default=3.0, positive=True)
        sweep.setdefault("sub_kind", "compare")
        if sweep["sub_kind"] not in ("compare", "simulate", "diagnose"):
            raise ConfigError("sweep.sub_kind must be compare, simulate, or diagnose")

    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")

    rc = RunConfig(kind=kind, raw=data, domain=dom, pde=pde, bc=bc, initial=init,
                   fields=fields, ode=ode, output=out, sweep=sweep, seed=seed)
    _cross_validate(rc)
    return rc


def _field_spec(section: dict, name: str) -> FieldSpec:
    section = dict(section)
    family = section.pop("family", "zero")
    if family == "custom":
        raise ConfigError(f"{name}.family 'custom' is not loadable from files")
    ramp = float(section.pop("ramp_time", 0.0))
    if ramp < 0.0:
        raise ConfigError(f"{name}.ramp_time must be >= 0")
    params = {}
    for key, val in section.items():
        if key in ("value", "center"):
            if len(val) != 2:
                raise ConfigError(f"{name}.{key} must be a 2-vector")
            params[key] = (float(val[0]), float(val[1]))
        elif key in ("r_plateau", "r_cutoff", "omega", "rate"):
            params[key] = float(val)
        elif key in ("coeffs1", "coeffs2"):
            params[key] = [(int(i), int(j), float(c)) for i, j, c in val]
        else:
            raise ConfigError(f"{name}.{key} is not a recognized parameter")
    try:
        return FieldSpec(family, params, ramp_time=ramp)
    except ConfigError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def _cross_validate(rc: RunConfig):
    grid = build_grid(rc)
    scaling = build_scaling(rc)
    config = build_initial_configuration(rc)
    if len(config):
        if not np.all(grid.contains(config.positions)):
            raise ConfigError("initial.positions must lie inside the domain")
    bc = build_bc(rc, grid, config)
    if bc.kind == DIRICHLET and len(config) and bc.winding() != config.total_degree():
        raise ConfigError(
            f"bc.g winding {bc.winding()} must equal the total degree "
            f"{config.total_degree()} of initial.degrees")
    t_samples = (0.0, 0.5 * rc.pde["t_final"], rc.pde["t_final"])
    fields = build_fields(rc)
    fields.validate(grid, bc.kind, t_samples=t_samples)


# ---------------------------------------------------------------------------
# object builders
# ---------------------------------------------------------------------------

def build_grid(rc: RunConfig) -> Grid:
    d = rc.domain
    return Grid(origin=tuple(d["origin"]), extent=tuple(d["extent"]),
                n1=d["n1"], n2=d["n2"])


def build_scaling(rc: RunConfig) -> EpsilonScaling:
    return EpsilonScaling(eps=rc.pde["eps"], lambda0=rc.pde["lambda0"])


def build_initial_configuration(rc: RunConfig) -> VortexConfiguration:
    return VortexConfiguration(np.array(rc.initial["positions"], dtype=float).reshape(-1, 2),
                               np.array(rc.initial["degrees"], dtype=int))


def build_bc(rc: RunConfig, grid: Grid, config: VortexConfiguration) -> BoundaryCondition:
    if rc.bc["kind"] == NEUMANN:
        return BoundaryCondition(kind=NEUMANN)
    if rc.bc["g"] == "canonical":
        from .cores import canonical_boundary_trace
        g = canonical_boundary_trace(grid, config)
    else:
        ii, jj = grid.boundary_ring()
        x = grid.x1()[ii] - (grid.origin[0] + 0.5 * grid.extent[0])
        y = grid.x2()[jj] - (grid.origin[1] + 0.5 * grid.extent[1])
        z = (x + 1j * y) / np.hypot(x, y)
        g = z ** rc.bc["g_degree"]
    return BoundaryCondition(kind=DIRICHLET, g=g)


def build_fields(rc: RunConfig) -> ExternalFields:
    return ExternalFields(F=rc.fields["F"], G=rc.fields["G"])


def auto_grid_nodes(extent: float, eps: float, h_per_eps: float) -> int:
    """Smallest fast node count with h = extent/(n-1) <= eps/h_per_eps."""
    target = eps / h_per_eps
    for cells in FAST_CELL_COUNTS:
        if extent / cells <= target:
            return cells + 1
    raise ConfigError(
        f"no fast grid size reaches h <= {target:.4g} on extent {extent}")


def sweep_member_config(rc: RunConfig, eps: float) -> RunConfig:
    """Derive one sweep member: fix eps, rescale the grid, inherit the rest."""
    data = json.loads(json.dumps(rc.raw))  # deep copy
    data["kind"] = rc.sweep.get("sub_kind", "compare")
    data.setdefault("pde", {})["eps"] = eps
    n = auto_grid_nodes(float(rc.domain["extent"][0]), eps, rc.sweep["h_per_eps"])
    data.setdefault("domain", {})
    data["domain"]["origin"] = rc.domain["origin"]
    data["domain"]["extent"] = rc.domain["extent"]
    data["domain"]["n1"] = n
    data["domain"]["n2"] = n
    data.pop("sweep", None)
    return resolve_config(data)
