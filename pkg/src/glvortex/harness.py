"""Experiment orchestration: simulation runs, the field/particle comparison,
the diagnostic bundle, and eps sweeps, with reproducible CSV/JSON outputs.

Every run directory contains a manifest.json embedding the resolved
configuration (re-runnable from the manifest alone), and CSV outputs with
fixed column orders and shortest round-trip float formatting, so identical
configurations produce bit-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .boundary import DIRICHLET, NEUMANN, BoundaryCondition
from .config import (RunConfig, build_bc, build_fields, build_grid,
                     build_initial_configuration, build_scaling, load_config,
                     resolve_config, sweep_member_config)
from .configuration import VortexConfiguration
from .cores import cached_profile, default_gamma, well_prepared
from .errors import ConfigError, TrackingError
from .fields import ComplexField, EpsilonScaling, Grid
from .forcing import ExternalFields
from .motion import (BOUNDARY_EXIT, COLLISION, RUNNING, OdeParams, OdeTrajectory,
                     collision_radius, integrate, rhs_terms)
from .operators import current, d1, d2, inner, stencil_energy, trapz2
from .pde import PdeState, conservation_residuals, default_dt, step
from .renorm import GradWCache
from .snapshot import write_snapshot
from .testfuncs import standard_scalar_bank, standard_vector_bank
from .tracking import (detect_vortices, energy_excess, equipartition_defect,
                       match_tracks, mobility_cap)


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, (str, int)) else _fmt(c) for c in row])


# ---------------------------------------------------------------------------
# trajectory record
# ---------------------------------------------------------------------------

@dataclass
class Frame:
    t: float
    positions: np.ndarray          # (N, 2)
    degrees: np.ndarray
    details: list
    energy: float
    energy_stencil: float
    W: float
    W_eps: float
    excess: float
    residuals: tuple               # (energy, jacobian, mass) totals
    kinetic_cum: float
    momentum_pairings: tuple       # 3 values of int (k_eps p, w) dx
    divj_pairings: tuple           # 3 values of int phi div j dx
    equip_defects: tuple           # per vortex


@dataclass
class TrajectoryRecord:
    """Time series of one field run: tracked vortices, energies, excess,
    residual norms, and the concentration pairings."""

    rc: RunConfig
    grid: Grid
    scaling: EpsilonScaling
    bc: BoundaryCondition
    fields: ExternalFields
    gamma: float
    frames: list = field(default_factory=list)
    status: str = RUNNING
    t_end: float = 0.0
    snapshots: list = field(default_factory=list)

    @property
    def n_vortices(self) -> int:
        return len(self.frames[0].degrees) if self.frames else 0

    def times(self) -> np.ndarray:
        return np.array([f.t for f in self.frames])

    def positions(self) -> np.ndarray:
        return np.array([f.positions for f in self.frames])

    def config_at(self, idx: int) -> VortexConfiguration:
        f = self.frames[idx]
        return VortexConfiguration(f.positions, f.degrees, f.t)


def _frame_pairing_banks(grid: Grid):
    return standard_vector_bank(grid), standard_scalar_bank(grid)


def _divj_time_factor(i: int, t: float) -> float:
    # fixed closed forms: constant, decaying, oscillating
    return (1.0, 1.0 / (1.0 + t), math.cos(t))[i]


def run_simulation(rc: RunConfig, outdir: Path | None = None,
                   quiet: bool = True) -> TrajectoryRecord:
    """Integrate the field equation, tracking vortices per snapshot stride.

    Terminates early with Collision when tracked vortices approach within
    the collision radius, or BoundaryExit (Neumann) at the same distance
    from the boundary; tracking failures raise TrackingLost unless they
    occur in the immediate pre-collision regime.
    """
    grid = build_grid(rc)
    scaling = build_scaling(rc)
    config0 = build_initial_configuration(rc)
    bc = build_bc(rc, grid, config0)
    fields = build_fields(rc)
    t_final = rc.pde["t_final"]
    fields.validate(grid, bc.kind, t_samples=(0.0, 0.5 * t_final, t_final))
    gamma = default_gamma()
    if outdir is not None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)

    if len(config0):
        u = well_prepared(config0, scaling, grid, bc, profile=cached_profile())
    else:
        base = bc.g_full(grid) if bc.kind == DIRICHLET else np.ones(grid.shape, complex)
        u = ComplexField(grid, base, time=0.0)

    dt = rc.pde["dt"] if rc.pde["dt"] > 0.0 else default_dt(
        scaling, grid, fields, t_samples=(0.0, 0.5 * t_final, t_final),
        safety=rc.pde["dt_safety"])
    stride = rc.output["snapshot_stride"]
    n_steps = int(math.ceil(t_final / dt - 1e-12)) if t_final > 0.0 else 0
    r_coll = collision_radius(scaling.eps, grid.h)
    cap = mobility_cap(grid, stride * dt, rc.output["v_max"])
    guard = rc.pde["energy_guard"] if fields.is_zero() else None
    vbank, sbank = _frame_pairing_banks(grid)

    record = TrajectoryRecord(rc=rc, grid=grid, scaling=scaling, bc=bc,
                              fields=fields, gamma=gamma)
    state = PdeState(u=u)
    prev_state = None
    kinetic_cum = 0.0
    prev_config = None

    def close_frame(st: PdeState, prev: PdeState | None):
        nonlocal prev_config
        det, details = detect_vortices(
            st.u, scaling, collar_cells=rc.output["collar_cells"],
            return_details=True)
        if prev_config is not None:
            perm = match_tracks(prev_config, det, cap)
            det = VortexConfiguration(det.positions[perm], det.degrees[perm], det.time)
            details = [details[i] for i in perm]
        elif len(config0):
            perm = match_tracks(config0, det, cap=max(cap, 10.0 * grid.h))
            det = VortexConfiguration(det.positions[perm], det.degrees[perm], det.time)
            details = [details[i] for i in perm]
        prev_config = det

        exc = energy_excess(st.u, det, scaling, gamma, bc,
                            threshold=rc.output["well_prepared_threshold"])
        if prev is not None:
            rep = conservation_residuals([prev, st], scaling, fields)
            totals = rep.totals()
        else:
            totals = (0.0, 0.0, 0.0)

        mom = [0.0, 0.0, 0.0]
        if st.u_t is not None:
            h = grid.h
            du1, du2 = d1(st.u.values, h), d2(st.u.values, h)
            p1 = inner(st.u_t.values, du1)
            p2 = inner(st.u_t.values, du2)
            x1, x2 = grid.nodes()
            for i, w in enumerate(vbank):
                wv = w(x1, x2)
                mom[i] = scaling.k_eps * trapz2(p1 * wv[..., 0] + p2 * wv[..., 1], grid)

        h = grid.h
        j = current(st.u)
        divj = d1(j.values[..., 0], h) + d2(j.values[..., 1], h)
        x1, x2 = grid.nodes()
        dj = [0.0, 0.0, 0.0]
        for i, phi in enumerate(sbank):
            dj[i] = trapz2(divj * phi.value(x1, x2), grid) * _divj_time_factor(i, st.t)

        eq = []
        rho = det.rho(grid)
        for k in range(len(det)):
            sigma = 0.45 * rho
            if sigma > 4.0 * grid.h:
                eq.append(equipartition_defect(st.u, det.positions[k], sigma, scaling))
            else:
                eq.append(float("nan"))

        record.frames.append(Frame(
            t=st.t, positions=det.positions, degrees=det.degrees, details=details,
            energy=exc.energy, energy_stencil=stencil_energy(st.u, scaling),
            W=exc.W, W_eps=exc.W_eps, excess=exc.excess, residuals=totals,
            kinetic_cum=kinetic_cum, momentum_pairings=tuple(mom),
            divj_pairings=tuple(dj), equip_defects=tuple(eq)))
        return det

    close_frame(state, None)
    stopped = False
    for i in range(n_steps):
        prev_state = state
        state = step(state, dt, scaling, bc, fields, energy_guard=guard)
        kinetic_cum += scaling.k_eps * dt * trapz2(
            np.abs(state.u_t.values) ** 2, grid)
        at_frame = ((i + 1) % stride == 0) or (i + 1 == n_steps)
        if not at_frame:
            continue
        try:
            det = close_frame(state, prev_state)
        except TrackingError:
            if prev_config is not None and len(prev_config) and (
                    prev_config.min_pair_distance() <= 2.0 * r_coll
                    or (bc.kind == NEUMANN and float(np.min(grid.boundary_distance(
                        prev_config.positions))) <= 2.0 * r_coll)):
                # identity lost in the immediate pre-collision regime
                record.status = COLLISION if prev_config.min_pair_distance() \
                    <= 2.0 * r_coll else BOUNDARY_EXIT
                stopped = True
                break
            raise
        if len(det) >= 2 and det.min_pair_distance() <= r_coll:
            record.status = COLLISION
            stopped = True
        elif bc.kind == NEUMANN and len(det) and float(np.min(
                grid.boundary_distance(det.positions))) <= r_coll:
            record.status = BOUNDARY_EXIT
            stopped = True
        if rc.output["snapshot_every"] and outdir is not None:
            frame_no = len(record.frames) - 1
            if frame_no % rc.output["snapshot_every"] == 0:
                path = Path(outdir) / f"state_{frame_no:06d}.glv"
                write_snapshot(path, state.u, scaling.eps)
                record.snapshots.append(path.name)
        if stopped:
            break

    record.t_end = record.frames[-1].t
    if outdir is not None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        write_snapshot(outdir / "state_final.glv", state.u, scaling.eps)
        record.snapshots.append("state_final.glv")
        _write_record_csvs(record, outdir)
    return record


def _write_record_csvs(record: TrajectoryRecord, outdir: Path):
    n = record.n_vortices
    header = ["t", "energy", "energy_stencil", "W", "W_eps", "excess",
              "res_energy", "res_jacobian", "res_mass", "kinetic_cum",
              "p_pair_0", "p_pair_1", "p_pair_2", "divj_0", "divj_1", "divj_2"]
    for k in range(n):
        header += [f"x_{k}", f"y_{k}", f"d_{k}"]
    rows = []
    for f in record.frames:
        row = [f.t, f.energy, f.energy_stencil, f.W, f.W_eps, f.excess,
               *f.residuals, f.kinetic_cum, *f.momentum_pairings, *f.divj_pairings]
        for k in range(n):
            row += [f.positions[k, 0], f.positions[k, 1], int(f.degrees[k])]
        rows.append(row)
    _write_csv(outdir / "timeseries.csv", header, rows)

    rows = []
    for f in record.frames:
        for k in range(len(f.degrees)):
            d = f.details[k] if k < len(f.details) else {}
            rows.append([f.t, k, int(f.degrees[k]), f.positions[k, 0],
                         f.positions[k, 1], d.get("cluster_size", 0),
                         d.get("min_mod", 0.0)])
    _write_csv(outdir / "tracks.csv", ["t", "k", "d", "x", "y",
                                       "cluster_size", "min_mod"], rows)

    rows = []
    for f in record.frames:
        rows.append(["energy", f.t, "", f.energy])
        rows.append(["excess", f.t, "", f.excess])
        for k in range(len(f.degrees)):
            rows.append(["x", f.t, k, f.positions[k, 0]])
            rows.append(["y", f.t, k, f.positions[k, 1]])
    _write_csv(outdir / "plots.csv", ["quantity", "t", "k", "value"], rows)


# ---------------------------------------------------------------------------
# ODE lane
# ---------------------------------------------------------------------------

def run_ode(rc: RunConfig, outdir: Path | None = None) -> OdeTrajectory:
    grid = build_grid(rc)
    config0 = build_initial_configuration(rc)
    if len(config0) == 0:
        raise ConfigError("initial.positions must contain at least one vortex for ode runs")
    bc = build_bc(rc, grid, config0)
    fields = build_fields(rc)
    fields.validate(grid, bc.kind, t_samples=(0.0, rc.pde["t_final"]))
    params = OdeParams(lambda0=rc.pde["lambda0"], grid=grid, bc=bc, fields=fields,
                       eps=rc.pde["eps"], rtol=rc.ode["rtol"], atol=rc.ode["atol"],
                       delta_cache=rc.ode["delta_cache"])
    traj = integrate(config0, params, rc.pde["t_final"])
    if outdir is not None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        _write_ode_csv(traj, outdir)
    return traj


def _write_ode_csv(traj: OdeTrajectory, outdir: Path, samples: int = 201):
    ts = np.linspace(traj.times[0], traj.t_end, samples)
    grad = traj.params.gradient(traj.degrees)
    n = traj.degrees.size
    header = ["t"]
    for k in range(n):
        header += [f"x_{k}", f"y_{k}", f"w_x_{k}", f"w_y_{k}",
                   f"f_x_{k}", f"f_y_{k}", f"g_x_{k}", f"g_y_{k}"]
    rows = []
    for t in ts:
        pos = traj.sample(float(t))
        terms = rhs_terms(pos, traj.degrees, float(t), traj.params, grad)
        row = [t]
        for k in range(n):
            row += [pos[k, 0], pos[k, 1], terms["w"][k, 0], terms["w"][k, 1],
                    terms["f"][k, 0], terms["f"][k, 1],
                    terms["g"][k, 0], terms["g"][k, 1]]
        rows.append(row)
    _write_csv(outdir / "ode.csv", header, rows)


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------

@dataclass
class ComparisonReport:
    """Field-vs-particle comparison on the common Running horizon."""

    times: np.ndarray
    eta: np.ndarray               # (T, N, 2)
    sup_eta: float
    int_eta: float
    r_norm: np.ndarray            # |R(t)|
    identity_gap: float           # max | |R| - sqrt(l0^2+1) |eta_dot| |
    mobility_lhs: float           # pi sum int |xi_dot|^2
    mobility_rhs: float           # k_eps int int |u_t|^2
    mobility_slack: float
    momentum_pairs: list          # (field integral, -pi sum int(xi_dot, w))
    excess_series: np.ndarray
    t_star_pde: float | None
    t_star_ode: float | None
    status_pde: str
    status_ode: str

    def to_dict(self) -> dict:
        return {
            "sup_eta": self.sup_eta, "int_eta": self.int_eta,
            "identity_gap": self.identity_gap,
            "mobility_lhs": self.mobility_lhs, "mobility_rhs": self.mobility_rhs,
            "mobility_slack": self.mobility_slack,
            "momentum_pairs": [[a, b] for a, b in self.momentum_pairs],
            "t_star_pde": self.t_star_pde, "t_star_ode": self.t_star_ode,
            "status_pde": self.status_pde, "status_ode": self.status_ode,
        }


def _centered_dot(series: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """d/dt by centered differences, one-sided second order at the ends."""
    out = np.empty_like(series)
    if len(ts) < 3:
        out[:] = (series[-1] - series[0]) / max(ts[-1] - ts[0], 1e-300)
        return out
    out[1:-1] = (series[2:] - series[:-2]) / (ts[2:] - ts[:-2])[:, None, None]
    out[0] = (-3.0 * series[0] + 4.0 * series[1] - series[2]) / (ts[2] - ts[0])
    out[-1] = (3.0 * series[-1] - 4.0 * series[-2] + series[-3]) / (ts[-1] - ts[-3])
    return out


def compare_records(pde: TrajectoryRecord, ode: OdeTrajectory,
                    rc: RunConfig) -> ComparisonReport:
    """eta, R, the R-eta identity, the mobility bound, and the momentum
    concentration pairings (def:R semantics; W-gradient along the ODE path)."""
    if pde.n_vortices != ode.degrees.size:
        raise ConfigError("compare: vortex counts differ between records")
    lam0 = rc.pde["lambda0"]

    # degree-respecting assignment at t = 0
    cfg0_pde = pde.config_at(0)
    cfg0_ode = VortexConfiguration(ode.sample(ode.times[0]), ode.degrees)
    perm = match_tracks(cfg0_pde, cfg0_ode, cap=float("inf"))

    t_star_pde = pde.t_end if pde.status != RUNNING else None
    t_star_ode = ode.t_end if ode.status != RUNNING else None
    horizon = min(pde.t_end, ode.t_end)
    ts = np.array([f.t for f in pde.frames if f.t <= horizon + 1e-12])
    if ts.size < 2:
        raise ConfigError("compare: fewer than two common frames")

    n = pde.n_vortices
    xi = pde.positions()[:ts.size]
    a = np.stack([ode.sample(float(t))[perm] for t in ts])
    degrees = pde.frames[0].degrees
    eta = xi - a

    xi_dot = _centered_dot(xi, ts)
    a_dot = np.stack([ode.velocity(float(t))[perm] for t in ts])
    eta_dot = xi_dot - a_dot

    grad = GradWCache(pde.grid, degrees, pde.bc,
                      delta_cache=rc.ode["delta_cache"])
    r_vec = np.empty_like(eta)
    for i, t in enumerate(ts):
        gw = grad.evaluate(a[i], float(t))
        for k in range(n):
            f = np.asarray(pde.fields.eval_F(a[i, k, 0], a[i, k, 1], float(t)),
                           dtype=float).reshape(2)
            g = np.asarray(pde.fields.eval_G(a[i, k, 0], a[i, k, 1], float(t)),
                           dtype=float).reshape(2)
            gy = degrees[k] * np.array([-g[1], g[0]])
            rot = degrees[k] * np.array([-xi_dot[i, k, 1], xi_dot[i, k, 0]])
            r_vec[i, k] = lam0 * xi_dot[i, k] + rot + gw[k] / math.pi - f - gy

    r_norm = np.linalg.norm(r_vec.reshape(len(ts), -1), axis=1)
    etadot_norm = np.linalg.norm(eta_dot.reshape(len(ts), -1), axis=1)
    identity_gap = float(np.max(np.abs(r_norm - math.sqrt(lam0**2 + 1.0)
                                       * etadot_norm)))

    eta_norm = np.linalg.norm(eta.reshape(len(ts), -1), axis=1)
    sup_eta = float(np.max(eta_norm))
    int_eta = float(np.trapezoid(eta_norm, ts))

    # mobility bound: pi sum int |xi_dot|^2 <= k_eps int int |u_t|^2
    mobility_lhs = math.pi * float(np.trapezoid(
        np.sum(np.linalg.norm(xi_dot, axis=-1) ** 2, axis=1), ts))
    kin = np.array([f.kinetic_cum for f in pde.frames[:ts.size]])
    mobility_rhs = float(kin[-1] - kin[0])
    mobility_slack = mobility_rhs - mobility_lhs

    # momentum concentration: int int (k_eps p, w) vs -pi sum int (xi_dot, w)
    vbank, _ = _frame_pairing_banks(pde.grid)
    momentum_pairs = []
    for i, w in enumerate(vbank):
        lhs_series = np.array([f.momentum_pairings[i] for f in pde.frames[:ts.size]])
        lhs = float(np.trapezoid(lhs_series, ts))
        rhs_series = np.zeros(len(ts))
        for j, t in enumerate(ts):
            for k in range(n):
                wv = np.asarray(w(xi[j, k, 0], xi[j, k, 1]), dtype=float).reshape(2)
                rhs_series[j] += float(xi_dot[j, k] @ wv)
        rhs = -math.pi * float(np.trapezoid(rhs_series, ts))
        momentum_pairs.append((lhs, rhs))

    excess_series = np.array([f.excess for f in pde.frames[:ts.size]])
    return ComparisonReport(times=ts, eta=eta, sup_eta=sup_eta, int_eta=int_eta,
                            r_norm=r_norm, identity_gap=identity_gap,
                            mobility_lhs=mobility_lhs, mobility_rhs=mobility_rhs,
                            mobility_slack=mobility_slack,
                            momentum_pairs=momentum_pairs,
                            excess_series=excess_series,
                            t_star_pde=t_star_pde, t_star_ode=t_star_ode,
                            status_pde=pde.status, status_ode=ode.status)


def _write_comparison_csv(rep: ComparisonReport, outdir: Path):
    n = rep.eta.shape[1]
    header = ["t", "eta_norm", "r_norm"]
    for k in range(n):
        header += [f"eta_x_{k}", f"eta_y_{k}"]
    rows = []
    eta_norm = np.linalg.norm(rep.eta.reshape(len(rep.times), -1), axis=1)
    for i, t in enumerate(rep.times):
        row = [t, eta_norm[i], rep.r_norm[i]]
        for k in range(n):
            row += [rep.eta[i, k, 0], rep.eta[i, k, 1]]
        rows.append(row)
    _write_csv(outdir / "comparison.csv", header, rows)
    (outdir / "comparison.json").write_text(
        json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# diagnostics bundle
# ---------------------------------------------------------------------------

def diagnose_record(record: TrajectoryRecord, outdir: Path | None = None) -> dict:
    """Energy-bound ratios, kinetic integral, div-j pairings, equipartition
    defects, stress-concentration pairings, and residual norms."""
    sc = record.scaling
    n = record.n_vortices
    log_inv = sc.log_inv_eps
    rows = []
    for f in record.frames:
        ratio = f.energy / log_inv
        shifted = f.energy - math.pi * n * log_inv
        rows.append([f.t, ratio, shifted, f.excess, f.kinetic_cum,
                     *f.divj_pairings, *f.residuals,
                     *(f.equip_defects if n else ())])
    summary = {
        "energy_over_log": max(abs(r[1]) for r in rows),
        "energy_minus_pin_log_range": (
            float(min(r[2] for r in rows)), float(max(r[2] for r in rows))),
        "kinetic_total": record.frames[-1].kinetic_cum,
        "divj_time_integrals": [
            float(abs(np.trapezoid([f.divj_pairings[i] for f in record.frames],
                                   [f.t for f in record.frames])))
            for i in range(3)],
        "max_excess": float(max(f.excess for f in record.frames)),
        "status": record.status,
    }
    if outdir is not None:
        header = ["t", "energy_over_log", "energy_minus_pin_log", "excess",
                  "kinetic_cum", "divj_0", "divj_1", "divj_2",
                  "res_energy", "res_jacobian", "res_mass"]
        header += [f"equip_defect_{k}" for k in range(n)]
        _write_csv(Path(outdir) / "diagnostics.csv", header, rows)
        (Path(outdir) / "diagnostics.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


# ---------------------------------------------------------------------------
# experiment driver
# ---------------------------------------------------------------------------

def _run_member(args):
    raw, outdir = args
    rc = resolve_config(raw)
    return run_experiment(rc, outdir)


def run_sweep(rc: RunConfig, outdir: Path, workers: int = 1) -> dict:
    members = []
    for eps in rc.sweep["eps"]:
        member = sweep_member_config(rc, eps)
        mdir = outdir / f"eps_{eps:.4f}"
        mdir.mkdir(parents=True, exist_ok=True)
        members.append((member.raw, mdir))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_member, members))
    else:
        results = [_run_member(m) for m in members]

    rows = []
    for (raw, mdir), res in zip(members, results):
        eps = raw["pde"]["eps"]
        row = {"eps": eps, "dir": mdir.name}
        summary_path = mdir / "comparison.json"
        if summary_path.exists():
            row.update(json.loads(summary_path.read_text()))
        rows.append(row)
    keys = ["eps", "dir", "sup_eta", "int_eta", "t_star_pde", "t_star_ode",
            "mobility_lhs", "mobility_rhs", "mobility_slack",
            "status_pde", "status_ode"]
    table = []
    for row in rows:
        table.append([row.get(k, "") if not isinstance(row.get(k), float)
                      else row[k] for k in keys])
    _write_csv(outdir / "sweep_summary.csv", keys, table)
    return {"members": [r.get("dir") for r in rows]}


def run_experiment(config, outdir, workers: int = 1, quiet: bool = True) -> Path:
    """Execute one experiment; returns the output directory.

    `config` is a path to a TOML run file (or manifest.json), a raw dict,
    or a resolved RunConfig.
    """
    if isinstance(config, RunConfig):
        rc = config
    elif isinstance(config, dict):
        rc = resolve_config(config)
    else:
        rc = load_config(config)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    events = {}
    if rc.kind == "simulate":
        record = run_simulation(rc, outdir)
        events = {"status": record.status, "t_end": record.t_end}
    elif rc.kind == "ode":
        traj = run_ode(rc, outdir)
        events = {"status": traj.status, "t_end": traj.t_end}
    elif rc.kind == "compare":
        record = run_simulation(rc, outdir)
        traj = run_ode(rc, outdir)
        rep = compare_records(record, traj, rc)
        _write_comparison_csv(rep, outdir)
        events = {"status_pde": record.status, "status_ode": traj.status,
                  "t_end_pde": record.t_end, "t_end_ode": traj.t_end}
    elif rc.kind == "diagnose":
        record = run_simulation(rc, outdir)
        diagnose_record(record, outdir)
        events = {"status": record.status, "t_end": record.t_end}
    elif rc.kind == "sweep":
        events = run_sweep(rc, outdir, workers=workers)
    else:  # pragma: no cover
        raise ConfigError(f"unhandled kind {rc.kind!r}")

    outputs = sorted(p.name for p in outdir.iterdir() if p.is_file()
                     and p.name != "manifest.json")
    manifest = {
        "config": rc.raw,
        "config_hash": rc.config_hash(),
        "package_version": __version__,
        "seed": rc.seed,
        "kind": rc.kind,
        "events": events,
        "outputs": outputs,
    }
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return outdir
