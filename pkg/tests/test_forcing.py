"""External field families: values, smoothness, ramps, admissibility."""

import numpy as np
import pytest

from glvortex.boundary import DIRICHLET, NEUMANN
from glvortex.errors import ConfigError
from glvortex.fields import Grid
from glvortex.forcing import ExternalFields, FieldSpec, plateau, smootherstep


def grid65():
    return Grid(origin=(0.0, 0.0), extent=(1.0, 1.0), n1=65, n2=65)


class TestCutoff:
    def test_plateau_values(self):
        r = np.array([0.0, 0.1, 0.2, 0.3, 0.4])
        chi = plateau(r, 0.2, 0.4)
        assert chi[0] == 1.0 and chi[1] == 1.0 and chi[2] == 1.0
        assert 0.0 < chi[3] < 1.0
        assert chi[4] == 0.0

    def test_smootherstep_is_c2_at_the_ends(self):
        # S' and S'' vanish at both ends (the straddling second difference
        # decays linearly in d, the signature of a continuous S'')
        for t in (0.0, 1.0):
            for d in (1e-3, 1e-4):
                s0 = smootherstep(np.array([t - d, t, t + d]))
                second = (s0[0] - 2 * s0[1] + s0[2]) / d**2
                assert abs(second) <= 20.0 * d
            g = (smootherstep(np.array([t + 1e-7])) - smootherstep(np.array([t - 1e-7]))) / 2e-7
            assert abs(g[0]) <= 1e-6

    def test_bad_radii_rejected(self):
        with pytest.raises(ConfigError):
            plateau(np.array([0.1]), 0.4, 0.2)


class TestFamilies:
    def test_zero(self):
        f = FieldSpec("zero")
        a, b = f(np.zeros(3), np.zeros(3), 0.0)
        assert not a.any() and not b.any()
        assert f.is_zero()

    def test_cutoff_constant_plateau_value(self):
        f = FieldSpec("cutoff_constant", {"value": (2.0, -1.0), "center": (0.5, 0.5),
                                          "r_plateau": 0.2, "r_cutoff": 0.4})
        a, b = f(0.5, 0.55, 0.0)
        assert a == pytest.approx(2.0) and b == pytest.approx(-1.0)
        a, b = f(0.5, 0.95, 0.0)
        assert a == 0.0 and b == 0.0

    def test_rigid_rotation_is_tangential(self):
        f = FieldSpec("rigid_rotation", {"omega": 2.0, "center": (0.5, 0.5),
                                         "r_plateau": 0.2, "r_cutoff": 0.4})
        x, y = 0.6, 0.5
        a, b = f(x, y, 0.0)
        # at (0.6, 0.5) the radial direction is e1: the field is 2*i(x-c)
        assert a == pytest.approx(0.0) and b == pytest.approx(0.2)

    def test_shear_profile(self):
        f = FieldSpec("shear", {"rate": 3.0, "center": (0.5, 0.5),
                                "r_plateau": 0.3, "r_cutoff": 0.45})
        a, b = f(0.5, 0.6, 0.0)
        assert a == pytest.approx(0.3) and b == 0.0

    def test_polynomial(self):
        f = FieldSpec("polynomial", {"center": (0.0, 0.0),
                                     "coeffs1": [(1, 0, 2.0)],
                                     "coeffs2": [(0, 2, -1.0)]})
        a, b = f(0.5, 0.5, 0.0)
        assert a == pytest.approx(1.0) and b == pytest.approx(-0.25)

    def test_time_ramp_vanishes_at_zero(self):
        f = FieldSpec("cutoff_constant", {"value": (1.0, 0.0), "center": (0.5, 0.5),
                                          "r_plateau": 0.2, "r_cutoff": 0.4},
                      ramp_time=0.5)
        a0, _ = f(0.5, 0.5, 0.0)
        a1, _ = f(0.5, 0.5, 10.0)
        assert a0 == 0.0 and a1 == pytest.approx(1.0)

    def test_unknown_family_rejected(self):
        with pytest.raises(ConfigError):
            FieldSpec("vortex_sheet")


class TestAdmissibility:
    def test_flags_recorded_for_valid_fields(self):
        grid = grid65()
        ext = ExternalFields(
            F=FieldSpec("cutoff_constant", {"value": (1.0, 0.0), "center": (0.5, 0.5),
                                            "r_plateau": 0.15, "r_cutoff": 0.35}),
            G=FieldSpec("rigid_rotation", {"omega": 1.0, "center": (0.5, 0.5),
                                           "r_plateau": 0.1, "r_cutoff": 0.3}))
        ext.validate(grid, NEUMANN, t_samples=(0.0, 0.5, 1.0))
        assert ext.F_zero_at_t0_boundary and ext.G_zero_at_t0_boundary
        assert ext.G_tangential

    def test_non_tangential_g_rejected_under_neumann(self):
        # a ramp satisfies the t = 0 condition, so the violation specific to
        # Neumann runs is the missing tangentiality at later sampled times
        grid = grid65()
        ext = ExternalFields(G=FieldSpec("cutoff_constant",
                                         {"value": (1.0, 0.0), "center": (0.5, 0.5),
                                          "r_plateau": 0.4, "r_cutoff": 2.0},
                                         ramp_time=0.3))
        with pytest.raises(ConfigError, match="tangential"):
            ext.validate(grid, NEUMANN, t_samples=(0.0, 1.0))

    def test_same_g_allowed_under_dirichlet_with_ramp(self):
        grid = grid65()
        ext = ExternalFields(G=FieldSpec("cutoff_constant",
                                         {"value": (1.0, 0.0), "center": (0.5, 0.5),
                                          "r_plateau": 0.4, "r_cutoff": 2.0},
                                         ramp_time=0.3))
        ext.validate(grid, DIRICHLET, t_samples=(0.0, 1.0))
        assert ext.G_zero_at_t0_boundary

    def test_grid_cache_ignores_time_for_static_fields(self):
        grid = grid65()
        ext = ExternalFields(F=FieldSpec("cutoff_constant",
                                         {"value": (1.0, 0.0), "center": (0.5, 0.5),
                                          "r_plateau": 0.15, "r_cutoff": 0.35}))
        a0, _ = ext.eval_on_grid("F", grid, 0.0)
        a1, _ = ext.eval_on_grid("F", grid, 5.0)
        assert np.array_equal(a0, a1)

    def test_max_magnitude(self):
        grid = grid65()
        ext = ExternalFields(F=FieldSpec("cutoff_constant",
                                         {"value": (3.0, 4.0), "center": (0.5, 0.5),
                                          "r_plateau": 0.2, "r_cutoff": 0.4}))
        assert ext.max_magnitude(grid, (0.0,)) == pytest.approx(5.0)
