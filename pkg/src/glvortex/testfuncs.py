"""Deterministic test-function banks with closed-form derivatives.

All window functions use the quintic smoothstep S(t) = 6t^5 - 15t^4 + 10t^3,
which is C^2 at both ends, so second derivatives are continuous:

    chi(r) = 1                      for r <= r0,
           = 1 - S((r-r0)/(r1-r0))  for r0 < r < r1,
           = 0                      for r >= r1.

ScalarWindow: phi(x) = (c0 + b . (x - center)) * chi(|x - center|), exactly
affine inside r0 and exactly zero outside r1.  VectorWindow/RotationWindow
are the vector-valued analogues used for the concentration pairings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Array = np.ndarray


def _S(t):
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def _S1(t):
    return 30.0 * t * t * (t - 1.0) ** 2


def _S2(t):
    return t * (120.0 * t * t - 180.0 * t + 60.0)


@dataclass(frozen=True)
class RadialCutoff:
    r0: float
    r1: float

    def value(self, r):
        t = np.clip((r - self.r0) / (self.r1 - self.r0), 0.0, 1.0)
        return 1.0 - _S(t)

    def d1(self, r):
        t = (r - self.r0) / (self.r1 - self.r0)
        inside = (t > 0.0) & (t < 1.0)
        out = np.zeros_like(np.asarray(r, dtype=float))
        out[inside] = -_S1(t[inside]) / (self.r1 - self.r0)
        return out

    def d2(self, r):
        t = (r - self.r0) / (self.r1 - self.r0)
        inside = (t > 0.0) & (t < 1.0)
        out = np.zeros_like(np.asarray(r, dtype=float))
        out[inside] = -_S2(t[inside]) / (self.r1 - self.r0) ** 2
        return out


@dataclass(frozen=True)
class ScalarWindow:
    """phi = (c0 + b1 dx + b2 dy) * chi(r), with analytic derivatives."""

    center: tuple[float, float]
    coeffs: tuple[float, float, float]  # (c0, b1, b2)
    r0: float
    r1: float

    @property
    def affine_radius(self) -> float:
        return self.r0

    @property
    def support_radius(self) -> float:
        return self.r1

    def _parts(self, x1, x2):
        dx = np.asarray(x1, dtype=float) - self.center[0]
        dy = np.asarray(x2, dtype=float) - self.center[1]
        r = np.hypot(dx, dy)
        return dx, dy, r

    def value(self, x1, x2):
        dx, dy, r = self._parts(x1, x2)
        c0, b1, b2 = self.coeffs
        return (c0 + b1 * dx + b2 * dy) * RadialCutoff(self.r0, self.r1).value(r)

    def grad(self, x1, x2):
        dx, dy, r = self._parts(x1, x2)
        c0, b1, b2 = self.coeffs
        cut = RadialCutoff(self.r0, self.r1)
        chi = cut.value(r)
        chi1 = cut.d1(r)
        rs = np.where(r > 0.0, r, 1.0)
        a = c0 + b1 * dx + b2 * dy
        g1 = b1 * chi + a * chi1 * dx / rs
        g2 = b2 * chi + a * chi1 * dy / rs
        return np.stack([g1, g2], axis=-1)

    def hessian(self, x1, x2):
        dx, dy, r = self._parts(x1, x2)
        c0, b1, b2 = self.coeffs
        cut = RadialCutoff(self.r0, self.r1)
        chi1 = cut.d1(r)
        chi2 = cut.d2(r)
        rs = np.where(r > 0.0, r, 1.0)
        a = c0 + b1 * dx + b2 * dy
        nx = dx / rs
        ny = dy / rs
        # chi_i = chi' n_i ; chi_ij = chi'' n_i n_j + chi' (delta_ij - n_i n_j)/r
        cxx = chi2 * nx * nx + chi1 * (1.0 - nx * nx) / rs
        cxy = chi2 * nx * ny - chi1 * nx * ny / rs
        cyy = chi2 * ny * ny + chi1 * (1.0 - ny * ny) / rs
        h11 = 2.0 * b1 * chi1 * nx + a * cxx
        h12 = b1 * chi1 * ny + b2 * chi1 * nx + a * cxy
        h22 = 2.0 * b2 * chi1 * ny + a * cyy
        out = np.empty(np.shape(h11) + (2, 2))
        out[..., 0, 0] = h11
        out[..., 0, 1] = h12
        out[..., 1, 0] = h12
        out[..., 1, 1] = h22
        return out

    def curl(self, x1, x2):
        g = self.grad(x1, x2)
        out = np.empty_like(g)
        out[..., 0] = -g[..., 1]
        out[..., 1] = g[..., 0]
        return out

    def grad_curl(self, x1, x2):
        he = self.hessian(x1, x2)
        out = np.empty_like(he)
        out[..., 0, 0] = -he[..., 0, 1]
        out[..., 0, 1] = -he[..., 1, 1]
        out[..., 1, 0] = he[..., 0, 0]
        out[..., 1, 1] = he[..., 0, 1]
        return out


@dataclass(frozen=True)
class VectorWindow:
    """Constant direction times radial cutoff: w(x) = vec * chi(|x - c|)."""

    center: tuple[float, float]
    vec: tuple[float, float]
    r0: float
    r1: float

    def __call__(self, x1, x2):
        r = np.hypot(np.asarray(x1) - self.center[0], np.asarray(x2) - self.center[1])
        chi = RadialCutoff(self.r0, self.r1).value(r)
        return np.stack([self.vec[0] * chi, self.vec[1] * chi], axis=-1)


@dataclass(frozen=True)
class RotationWindow:
    """Rigid rotation times cutoff: w(x) = omega * i(x - c) * chi(|x - c|)."""

    center: tuple[float, float]
    omega: float
    r0: float
    r1: float

    def __call__(self, x1, x2):
        dx = np.asarray(x1) - self.center[0]
        dy = np.asarray(x2) - self.center[1]
        chi = RadialCutoff(self.r0, self.r1).value(np.hypot(dx, dy))
        return np.stack([-self.omega * dy * chi, self.omega * dx * chi], axis=-1)


def standard_vector_bank(grid) -> list:
    """Three fixed smooth vector fields supported away from the boundary,
    used for the stress/momentum concentration pairings."""
    cx = grid.origin[0] + 0.5 * grid.extent[0]
    cy = grid.origin[1] + 0.5 * grid.extent[1]
    r1 = 0.47 * min(grid.extent)
    r0 = 0.7 * r1
    return [
        VectorWindow((cx, cy), (1.0, 0.0), r0, r1),
        VectorWindow((cx, cy), (0.0, 1.0), r0, r1),
        RotationWindow((cx, cy), 1.0, r0, r1),
    ]


def standard_scalar_bank(grid) -> list:
    """Three fixed scalar test functions vanishing on the boundary, used for
    the div-j pairings (time factors are attached by the caller)."""
    cx = grid.origin[0] + 0.5 * grid.extent[0]
    cy = grid.origin[1] + 0.5 * grid.extent[1]
    r1 = 0.47 * min(grid.extent)
    r0 = 0.6 * r1
    return [
        ScalarWindow((cx, cy), (1.0, 0.0, 0.0), r0, r1),
        ScalarWindow((cx, cy), (0.0, 1.0, 0.0), r0, r1),
        ScalarWindow((cx, cy), (0.0, 0.0, 1.0), r0, r1),
    ]
