"""Transform solvers: exact inversion of the discrete operators."""

import numpy as np
import pytest

from glvortex.elliptic import (apply_interior_helmholtz, apply_neumann_laplacian,
                               solve_dirichlet_helmholtz, solve_dirichlet_poisson,
                               solve_neumann_helmholtz, solve_neumann_poisson)
from glvortex.fields import Grid


def make_grid(n=33, L=1.0):
    return Grid(origin=(0.0, 0.0), extent=(L, L), n1=n, n2=n)


def test_dirichlet_helmholtz_inverts_exactly():
    grid = make_grid()
    rng = np.random.default_rng(0)
    u_exact = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    c = 0.01 * (0.3 - 1.0j)
    rhs = np.zeros(grid.shape, dtype=complex)
    rhs[1:-1, 1:-1] = apply_interior_helmholtz(grid, u_exact, c)
    u = solve_dirichlet_helmholtz(grid, rhs, c, boundary=u_exact)
    assert np.max(np.abs(u - u_exact)) <= 1e-11


def test_dirichlet_poisson_inverts_exactly():
    grid = make_grid()
    rng = np.random.default_rng(1)
    u_exact = rng.normal(size=grid.shape)
    h = grid.h
    lap = (u_exact[2:, 1:-1] + u_exact[:-2, 1:-1] + u_exact[1:-1, 2:]
           + u_exact[1:-1, :-2] - 4.0 * u_exact[1:-1, 1:-1]) / h**2
    rhs = np.zeros(grid.shape)
    rhs[1:-1, 1:-1] = lap
    u = solve_dirichlet_poisson(grid, rhs, boundary=u_exact)
    assert np.max(np.abs(u - u_exact)) <= 1e-10


def test_neumann_helmholtz_inverts_exactly():
    grid = make_grid()
    rng = np.random.default_rng(2)
    u_exact = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    c = 2e-3 * (1.0 - 0.7j)
    rhs = u_exact - c * apply_neumann_laplacian(grid, u_exact)
    u = solve_neumann_helmholtz(grid, rhs, c)
    assert np.max(np.abs(u - u_exact)) <= 1e-11


def test_neumann_poisson_inverts_mirror_laplacian():
    grid = make_grid()
    rng = np.random.default_rng(3)
    u_exact = rng.normal(size=grid.shape)
    u_exact -= np.sum(u_exact * grid.quad_weights())  # zero mean target
    rhs = apply_neumann_laplacian(grid, u_exact)
    u, defect = solve_neumann_poisson(grid, rhs)
    assert abs(defect) <= 1e-12
    w = grid.quad_weights()
    u_exact_0 = u_exact - np.sum(u_exact * w) / np.sum(w)
    assert np.max(np.abs(u - u_exact_0)) <= 1e-10


def test_neumann_poisson_with_flux_converges():
    # manufactured u = x^2 y + cos(2x) - mean; Lap u = 2y - 4cos(2x)
    errs = []
    for n in (33, 65, 129):
        grid = make_grid(n=n)
        x, y = grid.nodes()
        u_exact = x**2 * y + np.cos(2.0 * x)
        rhs = 2.0 * y - 4.0 * np.cos(2.0 * x)
        x1 = grid.x1()
        x2 = grid.x2()
        # du/dx = 2xy - 2 sin 2x, du/dy = x^2; outward normals -x, +x, -y, +y
        q_left = np.zeros_like(x2)
        q_right = 2.0 * x2 - 2.0 * np.sin(2.0) * np.ones_like(x2)
        q_bottom = -(x1**2)
        q_top = x1**2
        u, defect = solve_neumann_poisson(grid, rhs, flux=(q_left, q_right, q_bottom, q_top))
        w = grid.quad_weights()
        ue = u_exact - np.sum(u_exact * w) / np.sum(w)
        errs.append(np.max(np.abs(u - ue)))
    # mirrored-ghost Neumann data is O(h^2)-consistent after projection
    slope = np.polyfit(np.log([1 / 32, 1 / 64, 1 / 128]), np.log(errs), 1)[0]
    assert slope >= 1.5, (slope, errs)


def test_solver_shapes_and_boundary_pinning():
    grid = make_grid(n=17)
    rhs = np.zeros(grid.shape)
    boundary = np.zeros(grid.shape)
    boundary[0, :] = 3.0
    u = solve_dirichlet_poisson(grid, rhs, boundary=boundary)
    assert np.allclose(u[0, :], 3.0)
    assert u.shape == grid.shape
