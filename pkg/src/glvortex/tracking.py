"""Vortex detection, identity tracking, and concentration diagnostics.

Detection: plaquette winding numbers of the phase on cells whose corner
modulus dips below the amplitude threshold; connected clusters of nonzero
winding are merged, the cluster winding is the degree, and the position is
the Jacobian-weighted centroid over a ball of radius 3 eps (sub-grid
accuracy, stable under quadrature noise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.optimize import linear_sum_assignment

from .boundary import BoundaryCondition
from .configuration import VortexConfiguration, empty_configuration
from .errors import BoundaryContamination, ConfigError, DegreeOutOfRange, TrackingLost
from .fields import ComplexField, EpsilonScaling, Grid
from .forcing import smootherstep
from .operators import disc_weights, energy_density_values, jacobian, total_energy, trapz2
from .renorm import renormalized_energy

AMPLITUDE_THRESHOLD = 0.5
COLLAR_CELLS = 2


def _wrap(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def plaquette_winding_raw(u: ComplexField) -> np.ndarray:
    """Phase circulation around each grid cell in units of 2 pi (not
    rounded).  Interior edges cancel when summing over a cell cluster, so
    the cluster sum equals the winding along the cluster's outer loop; this
    keeps zeros sitting exactly on a node detectable (each adjacent cell
    carries a quarter turn)."""
    th = np.angle(u.values)
    d_bottom = _wrap(th[1:, :-1] - th[:-1, :-1])
    d_right = _wrap(th[1:, 1:] - th[1:, :-1])
    d_top = _wrap(th[:-1, 1:] - th[1:, 1:])
    d_left = _wrap(th[:-1, :-1] - th[:-1, 1:])
    return (d_bottom + d_right + d_top + d_left) / (2.0 * np.pi)


def plaquette_winding(u: ComplexField) -> np.ndarray:
    """Integer winding of the phase around each grid cell."""
    return np.rint(plaquette_winding_raw(u)).astype(int)


def _loop_winding(th: np.ndarray, i0: int, i1: int, j0: int, j1: int) -> float:
    """Phase winding along the ccw node rectangle (i0..i1) x (j0..j1)."""
    seq = np.concatenate([
        th[i0:i1 + 1, j0],
        th[i1, j0 + 1:j1 + 1],
        th[i1 - 1::-1, j1][:i1 - i0],
        th[i0, j1 - 1:j0:-1],
    ])
    d = _wrap(np.diff(np.concatenate([seq, seq[:1]])))
    return float(np.sum(d) / (2.0 * np.pi))


def detect_vortices(u: ComplexField, scaling: EpsilonScaling,
                    amplitude_threshold: float = AMPLITUDE_THRESHOLD,
                    collar_cells: int = COLLAR_CELLS,
                    return_details: bool = False):
    """Locate vortices of u: winding clusters plus J-weighted centroids.

    Cells whose corner modulus dips below the threshold are grouped into
    clusters; the cluster degree is the (rounded) total phase winding and
    the position is the J-weighted centroid over a 3-eps ball.  Raises
    DegreeOutOfRange for cluster windings outside {-1, +1} and
    BoundaryContamination when the modulus dips on the boundary ring or a
    cluster touches the boundary collar.  Zero-winding dips (modulus
    overshoots) are ignored.
    """
    grid = u.grid
    mod = np.abs(u.values)
    ring = np.ones(grid.shape, dtype=bool)
    ring[1:-1, 1:-1] = False
    if float(np.min(mod[ring])) <= amplitude_threshold:
        raise BoundaryContamination(
            "modulus dips below the amplitude threshold on the boundary ring")

    corner_min = np.minimum(np.minimum(mod[:-1, :-1], mod[1:, :-1]),
                            np.minimum(mod[:-1, 1:], mod[1:, 1:]))
    core = corner_min < amplitude_threshold
    if not core.any():
        empty = empty_configuration(time=u.time)
        return (empty, []) if return_details else empty

    labels, count = ndimage.label(core, structure=np.ones((3, 3), dtype=int))
    J = jacobian(u).values
    th = np.angle(u.values)
    cx, cy = grid.cell_centers()
    positions = []
    degrees = []
    details = []
    for lab in range(1, count + 1):
        sel = labels == lab
        ii, jj = np.nonzero(sel)
        if (ii.min() < collar_cells or jj.min() < collar_cells
                or ii.max() >= core.shape[0] - collar_cells
                or jj.max() >= core.shape[1] - collar_cells):
            raise BoundaryContamination("winding cluster touches the boundary collar")
        # degree from the phase winding along an expanded node loop, where
        # the modulus is safely away from zero (exact on-node zeros make the
        # per-cell wrapped differences ambiguous)
        i0 = max(ii.min() - 1, 0)
        i1 = min(ii.max() + 2, grid.n1 - 1)
        j0 = max(jj.min() - 1, 0)
        j1 = min(jj.max() + 2, grid.n2 - 1)
        raw = _loop_winding(th, i0, i1, j0, j1)
        degree = int(np.rint(raw))
        if abs(raw - degree) > 0.25:
            raise DegreeOutOfRange(f"ambiguous cluster winding {raw:.3f}")
        if degree == 0:
            continue
        if degree not in (-1, 1):
            raise DegreeOutOfRange(f"winding cluster has degree {degree}")
        dip = (amplitude_threshold - corner_min[sel])
        seed = np.array([np.sum(cx[sel] * dip), np.sum(cy[sel] * dip)]) / np.sum(dip)
        r = np.hypot(cx - seed[0], cy - seed[1])
        ball = r <= 3.0 * scaling.eps
        weights = np.where(ball, np.maximum(degree * J, 0.0), 0.0)
        total = float(np.sum(weights))
        if total > 0.0:
            pos = np.array([float(np.sum(cx * weights)) / total,
                            float(np.sum(cy * weights)) / total])
        else:
            pos = seed
        positions.append(pos)
        degrees.append(degree)
        details.append({"cluster_size": int(np.sum(sel)),
                        "min_mod": float(np.min(corner_min[sel]))})

    if not positions:
        empty = empty_configuration(time=u.time)
        return (empty, []) if return_details else empty
    order = np.lexsort((np.array(positions)[:, 1], np.array(positions)[:, 0]))
    positions = np.array(positions)[order]
    degrees = np.array(degrees, dtype=int)[order]
    config = VortexConfiguration(positions, degrees, time=u.time)
    if return_details:
        return config, [details[i] for i in order]
    return config


def mobility_cap(grid: Grid, dt_frame: float, v_max: float) -> float:
    """Largest credible per-frame displacement: 10 max(h, dt * V_max)."""
    return 10.0 * max(grid.h, dt_frame * v_max)


def match_tracks(prev: VortexConfiguration, cur: VortexConfiguration,
                 cap: float) -> np.ndarray:
    """Minimum-total-distance assignment among same-degree vortices.

    Returns `perm` with cur index perm[i] matched to prev vortex i; raises
    TrackingLost when counts/degrees change or a match exceeds the cap.
    """
    if len(prev) != len(cur):
        raise TrackingLost(f"vortex count changed: {len(prev)} -> {len(cur)}")
    if sorted(prev.degrees.tolist()) != sorted(cur.degrees.tolist()):
        raise TrackingLost(
            f"degree multiset changed: {prev.degrees.tolist()} -> {cur.degrees.tolist()}")
    perm = np.full(len(prev), -1, dtype=int)
    for d in (-1, 1):
        ip = np.nonzero(prev.degrees == d)[0]
        ic = np.nonzero(cur.degrees == d)[0]
        if ip.size == 0:
            continue
        cost = np.linalg.norm(prev.positions[ip, None, :] - cur.positions[None, ic, :],
                              axis=-1)
        rows, cols = linear_sum_assignment(cost)
        moved = cost[rows, cols]
        if np.any(moved > cap):
            raise TrackingLost(
                f"best match moves a vortex {float(np.max(moved)):.4g} > cap {cap:.4g}")
        perm[ip[rows]] = ic[cols]
    return perm


@dataclass(frozen=True)
class ExcessReport:
    """Energy bookkeeping: E_eps, W, gamma, the tight lower bound W_eps, and
    the excess D_eps = E_eps - W_eps."""

    energy: float
    W: float
    gamma: float
    W_eps: float
    excess: float
    well_prepared: bool


def energy_excess(u: ComplexField, config: VortexConfiguration,
                  scaling: EpsilonScaling, gamma: float, bc: BoundaryCondition,
                  threshold: float = 0.5) -> ExcessReport:
    """D_eps = E_eps(u) - [pi N log(1/eps) + N gamma + W(config)]."""
    energy = total_energy(u, scaling)
    W = renormalized_energy(u.grid, config, bc).W
    n = len(config)
    w_eps = math.pi * n * scaling.log_inv_eps + n * gamma + W
    excess = energy - w_eps
    return ExcessReport(energy=energy, W=W, gamma=gamma, W_eps=w_eps,
                        excess=excess, well_prepared=excess < threshold)


def equipartition_defect(u: ComplexField, center, sigma: float,
                         scaling: EpsilonScaling) -> float:
    """Frobenius distance of int_{B_sigma} k_eps (grad u x grad u) from pi Id."""
    grid = u.grid
    if sigma >= float(grid.boundary_distance(np.asarray(center, dtype=float))):
        raise ConfigError("equipartition ball must lie inside the domain")
    h = grid.h
    g1 = np.gradient(u.values, h, axis=0, edge_order=2)
    g2 = np.gradient(u.values, h, axis=1, edge_order=2)
    w = disc_weights(grid, center, sigma) * grid.quad_weights()
    k = scaling.k_eps
    m11 = k * float(np.sum((np.conj(g1) * g1).real * w))
    m12 = k * float(np.sum((np.conj(g1) * g2).real * w))
    m22 = k * float(np.sum((np.conj(g2) * g2).real * w))
    d = np.array([[m11 - math.pi, m12], [m12, m22 - math.pi]])
    return float(np.linalg.norm(d))


def far_field_window(grid: Grid, config: VortexConfiguration, r_clear: float,
                     boundary_margin: float | None = None):
    """Smooth test function equal to 1 away from the vortices, vanishing
    within r_clear of each and near the domain edge."""
    if boundary_margin is None:
        boundary_margin = 0.05 * min(grid.extent)
    x1, x2 = grid.nodes()
    phi = np.ones(grid.shape)
    for k in range(len(config)):
        r = np.hypot(x1 - config.positions[k, 0], x2 - config.positions[k, 1])
        phi *= smootherstep((r - r_clear) / r_clear)
    bdist = grid.boundary_distance(np.stack([x1, x2], axis=-1))
    phi *= smootherstep(bdist / boundary_margin)
    return phi


def energy_far_from_vortices(u: ComplexField, config: VortexConfiguration,
                             scaling: EpsilonScaling, r_clear: float) -> float:
    """|integral of mu_eps against the far-field window| (concentration
    proxy: decreases across an eps sweep)."""
    grid = u.grid
    mu = scaling.k_eps * energy_density_values(u.values, grid.h, scaling.eps)
    phi = far_field_window(grid, config, r_clear)
    return abs(trapz2(mu * phi, grid))


def stress_pairing_defect(u: ComplexField, config: VortexConfiguration,
                          scaling: EpsilonScaling, vfunc) -> float:
    """| int v . k_eps (grad u x grad u) dx - pi sum_k v(xi_k) |."""
    grid = u.grid
    h = grid.h
    g1 = np.gradient(u.values, h, axis=0, edge_order=2)
    g2 = np.gradient(u.values, h, axis=1, edge_order=2)
    x1, x2 = grid.nodes()
    v = np.asarray(vfunc(x1, x2), dtype=float)
    k = scaling.k_eps
    t11 = (np.conj(g1) * g1).real
    t12 = (np.conj(g1) * g2).real
    t22 = (np.conj(g2) * g2).real
    integ1 = k * (t11 * v[..., 0] + t12 * v[..., 1])
    integ2 = k * (t12 * v[..., 0] + t22 * v[..., 1])
    got = np.array([trapz2(integ1, grid), trapz2(integ2, grid)])
    ref = np.zeros(2)
    for p in config.positions:
        ref += np.asarray(vfunc(p[0], p[1]), dtype=float)
    ref *= math.pi
    return float(np.linalg.norm(got - ref))
