"""Detection, matching, excess, equipartition, and concentration checks."""

import math

import numpy as np
import pytest

from glvortex.boundary import NEUMANN, BoundaryCondition
from glvortex.configuration import VortexConfiguration
from glvortex.cores import default_gamma, well_prepared
from glvortex.errors import BoundaryContamination, ConfigError, TrackingLost
from glvortex.fields import ComplexField, EpsilonScaling, Grid
from glvortex.tracking import (detect_vortices, energy_excess, energy_far_from_vortices,
                               equipartition_defect, match_tracks, mobility_cap,
                               stress_pairing_defect)
from glvortex.testfuncs import standard_vector_bank

NBC = BoundaryCondition(kind=NEUMANN)


def square(n, L=2.0):
    return Grid(origin=(0.0, 0.0), extent=(L, L), n1=n, n2=n)


def cfg(points, degrees):
    return VortexConfiguration(np.array(points, dtype=float), np.array(degrees, dtype=int))


SCALING = EpsilonScaling(eps=0.04, lambda0=1.0)


class TestDetect:
    def test_uniform_field_has_no_vortices(self):
        grid = square(65)
        u = ComplexField(grid, np.ones(grid.shape, dtype=complex))
        det = detect_vortices(u, SCALING)
        assert len(det) == 0

    def test_single_vortex_detected_at_position(self):
        grid = square(257)
        c = cfg([[1.03, 0.97]], [1])
        u0 = well_prepared(c, SCALING, grid, NBC)
        det = detect_vortices(u0, SCALING)
        assert det.degrees.tolist() == [1]
        assert np.linalg.norm(det.positions[0] - c.positions[0]) <= grid.h

    def test_dipole_detected(self):
        grid = square(257)
        c = cfg([[0.67, 1.0], [1.33, 1.0]], [1, -1])
        u0 = well_prepared(c, SCALING, grid, NBC)
        det = detect_vortices(u0, SCALING)
        assert sorted(det.degrees.tolist()) == [-1, 1]
        assert np.max(np.linalg.norm(det.positions - c.positions, axis=1)) <= grid.h

    def test_translation_equivariance(self):
        # shifting the sampled content by whole cells shifts the detected
        # position by exactly that offset
        grid = square(257)
        c = cfg([[0.9, 0.9]], [1])
        u0 = well_prepared(c, SCALING, grid, NBC)
        shift = (7, 4)
        rolled = ComplexField(grid, np.roll(u0.values, shift, axis=(0, 1)))
        d0 = detect_vortices(u0, SCALING)
        d1 = detect_vortices(rolled, SCALING)
        expect = d0.positions[0] + grid.h * np.array(shift)
        assert np.max(np.abs(d1.positions[0] - expect)) <= 1e-12

    def test_boundary_contamination_raises(self):
        grid = square(129)
        x, y = grid.nodes()
        z = (x - 0.02) + 1j * (y - 1.0)  # core hugging the left edge
        u = ComplexField(grid, z / np.sqrt(np.abs(z) ** 2 + 0.05**2))
        with pytest.raises(BoundaryContamination):
            detect_vortices(u, SCALING)


class TestMatch:
    def test_identity_assignment(self):
        a = cfg([[0.5, 0.5], [1.5, 1.5]], [1, -1])
        perm = match_tracks(a, a, cap=0.1)
        assert perm.tolist() == [0, 1]

    def test_small_displacement_matched(self):
        a = cfg([[0.5, 0.5]], [1])
        b = cfg([[0.52, 0.51]], [1])
        perm = match_tracks(a, b, cap=0.1)
        assert perm.tolist() == [0]

    def test_count_change_raises(self):
        a = cfg([[0.5, 0.5]], [1])
        b = cfg([[0.5, 0.5], [1.5, 1.5]], [1, -1])
        with pytest.raises(TrackingLost):
            match_tracks(a, b, cap=0.1)

    def test_degree_change_raises(self):
        a = cfg([[0.5, 0.5]], [1])
        b = cfg([[0.5, 0.5]], [-1])
        with pytest.raises(TrackingLost):
            match_tracks(a, b, cap=0.1)

    def test_cap_exceeded_raises(self):
        # two same-degree vortices swapped across a distance far beyond the
        # cap: ambiguity refused
        a = cfg([[0.5, 0.5], [1.5, 0.5]], [1, 1])
        b = cfg([[1.5, 0.5], [0.5, 0.5]], [1, 1])
        perm = match_tracks(a, b, cap=2.0)  # generous cap: fine (identity)
        assert perm.tolist() == [1, 0]
        with pytest.raises(TrackingLost):
            match_tracks(a, cfg([[0.5, 1.6], [1.5, 1.6]], [1, 1]), cap=0.05)

    def test_mobility_cap_formula(self):
        grid = square(65)
        assert mobility_cap(grid, 1e-3, v_max=1.0) == 10.0 * grid.h
        assert mobility_cap(grid, 1.0, v_max=1.0) == 10.0


class TestExcess:
    def test_uniform_state_zero_excess(self):
        grid = square(65, L=1.0)
        u = ComplexField(grid, np.ones(grid.shape, dtype=complex))
        det = detect_vortices(u, SCALING)
        rep = energy_excess(u, det, SCALING, default_gamma(), NBC)
        assert rep.energy == 0.0 and rep.W == 0.0 and rep.excess == 0.0
        assert rep.well_prepared

    def test_phase_perturbation_raises_excess_by_its_dirichlet_energy(self):
        grid = square(257)
        c = cfg([[1.0, 1.0]], [1])
        u0 = well_prepared(c, SCALING, grid, NBC)
        x1, x2 = grid.nodes()
        pert = 0.5 * np.sin(np.pi * x1 / 2.0) * np.sin(np.pi * x2 / 2.0)
        u1 = u0.with_values(u0.values * np.exp(1j * pert))
        gamma = default_gamma()
        d0 = energy_excess(u0, c, SCALING, gamma, NBC).excess
        d1 = energy_excess(u1, c, SCALING, gamma, NBC).excess
        h = grid.h
        gx = np.gradient(pert, h, axis=0, edge_order=2)
        gy = np.gradient(pert, h, axis=1, edge_order=2)
        # |u| = 1 a.e.: the cross term integrates against div j ~ 0, leaving
        # the perturbation's own Dirichlet energy
        dirichlet = 0.5 * float(np.sum((gx**2 + gy**2) * grid.quad_weights()))
        assert abs((d1 - d0) - dirichlet) <= 0.10 * dirichlet, (d1 - d0, dirichlet)


class TestEquipartition:
    def test_uniform_state_full_deficit(self):
        grid = square(65, L=1.0)
        u = ComplexField(grid, np.ones(grid.shape, dtype=complex))
        assert equipartition_defect(u, (0.5, 0.5), 0.3, SCALING) == pytest.approx(
            math.pi * math.sqrt(2.0))

    def test_ball_must_be_interior(self):
        grid = square(65, L=1.0)
        u = ComplexField(grid, np.ones(grid.shape, dtype=complex))
        with pytest.raises(ConfigError):
            equipartition_defect(u, (0.5, 0.5), 0.6, SCALING)

    def test_defect_decreases_across_sweep(self):
        vals = []
        for eps, n in ((0.08, 129), (0.06, 161), (0.04, 257), (0.03, 321)):
            grid = square(n)
            sc = EpsilonScaling(eps=eps, lambda0=1.0)
            c = cfg([[1.0, 1.0]], [1])
            u0 = well_prepared(c, sc, grid, NBC)
            vals.append(equipartition_defect(u0, (1.0, 1.0), 0.5, sc))
        assert all(a > b for a, b in zip(vals, vals[1:])), vals


class TestConcentration:
    def test_energy_far_from_vortices_decreases_across_sweep(self):
        vals = []
        for eps, n in ((0.08, 129), (0.06, 161), (0.04, 257)):
            grid = square(n)
            sc = EpsilonScaling(eps=eps, lambda0=1.0)
            c = cfg([[1.0, 1.0]], [1])
            u0 = well_prepared(c, sc, grid, NBC)
            vals.append(energy_far_from_vortices(u0, c, sc, r_clear=0.2))
        assert all(a > b for a, b in zip(vals, vals[1:])), vals

    def test_stress_pairing_approaches_point_mass(self):
        grid = square(257)
        c = cfg([[1.0, 1.0]], [1])
        defects = []
        for eps, n in ((0.08, 129), (0.06, 161), (0.04, 257)):
            g = square(n)
            sc = EpsilonScaling(eps=eps, lambda0=1.0)
            u0 = well_prepared(c, sc, g, NBC)
            bank = standard_vector_bank(g)
            defects.append(max(stress_pairing_defect(u0, c, sc, v) for v in bank))
        assert all(a > b for a, b in zip(defects, defects[1:])), defects
