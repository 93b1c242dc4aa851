"""Effective point-vortex motion law and its adaptive integrator.

The k-th vortex with degree d_k obeys the mixed flow of the interaction
energy with the transferred forcing terms:

    (lambda0 + d_k i) da_k/dt = -(1/pi) grad_{a_k} W(a(t))
                                + F(a_k(t), t) + d_k i G(a_k(t), t).

The rotational part of the response operator carries the degree: the
equation-error identity R_k = (lambda0 + d_k i) (xi_k - a_k)' requires it,
and the simulated flow exhibits exactly this coupling (the response of a
d = -1 vortex to either field is the mirror image of the d = +1 response,
not its negative).  Inversion is algebraic:

    da_k/dt = (lambda0 - d_k i) B_k / (lambda0^2 + 1),

with B_k the right-hand side above and i acting as rotation by pi/2.

Integration uses an embedded 4(5) Runge-Kutta pair with event-based
termination: Collision when the configuration scale hits the collision
radius 4 max(eps, 2h) (shared with the field solver so the stopping times
are comparable), BoundaryExit (Neumann only) when a vortex reaches that
distance from the boundary.  grad W is recomputed only after the
configuration moves delta_cache = h/2 since the last evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .boundary import NEUMANN, BoundaryCondition
from .configuration import VortexConfiguration
from .errors import ConfigError, StepUnderflow
from .fields import Grid, rot90
from .forcing import ExternalFields
from .renorm import GradWCache

RUNNING = "Running"
COLLISION = "Collision"
BOUNDARY_EXIT = "BoundaryExit"


def collision_radius(eps: float, h: float) -> float:
    """Separation below which distinct zeros cannot be resolved."""
    return 4.0 * max(eps, 2.0 * h)


@dataclass(frozen=True)
class OdeState:
    positions: np.ndarray  # (N, 2)
    degrees: np.ndarray
    t: float
    status: str = RUNNING


@dataclass
class OdeParams:
    """Motion-law parameters: damping, forcing, the boundary kind selecting
    W, the grid used for the W solves, and integrator controls."""

    lambda0: float
    grid: Grid
    bc: BoundaryCondition
    fields: ExternalFields = field(default_factory=ExternalFields)
    eps: float = 0.04          # only via the shared collision radius
    rtol: float = 1e-8
    atol: float = 1e-10
    delta_cache: float | None = None  # default h/2
    grad_w_func: object = None  # injectable gradient (testing); (pos, t) -> (N, 2)

    def __post_init__(self):
        if self.lambda0 <= 0.0:
            raise ConfigError("ode.lambda0 must be positive")
        if self.rtol <= 0.0 or self.atol <= 0.0:
            raise ConfigError("ode tolerances must be positive")

    def collision_radius(self) -> float:
        return collision_radius(self.eps, self.grid.h)

    def gradient(self, degrees) -> object:
        if self.grad_w_func is not None:
            return self.grad_w_func
        cache = GradWCache(self.grid, degrees, self.bc, delta_cache=self.delta_cache)
        return lambda pos, t: cache.evaluate(pos, t)


def rhs_terms(positions: np.ndarray, degrees: np.ndarray, t: float,
              params: OdeParams, grad) -> dict:
    """The three force contributions per vortex: W-term, F-term, G-term."""
    pos = positions.reshape(-1, 2)
    w_term = -grad(pos, t) / math.pi
    f_term = np.zeros_like(w_term)
    g_term = np.zeros_like(w_term)
    for k in range(pos.shape[0]):
        f = params.fields.eval_F(pos[k, 0], pos[k, 1], t)
        g = params.fields.eval_G(pos[k, 0], pos[k, 1], t)
        f_term[k] = np.asarray(f, dtype=float).reshape(2)
        g_term[k] = degrees[k] * rot90(np.asarray(g, dtype=float).reshape(2))
    return {"w": w_term, "f": f_term, "g": g_term}


def invert_response(b: np.ndarray, degrees: np.ndarray, lambda0: float) -> np.ndarray:
    """Solve (lambda0 + d_k i) v_k = b_k:  v = (lambda0 b - d_k i b)/(lambda0^2+1)."""
    v = lambda0 * b - degrees[:, None] * rot90(b)
    return v / (lambda0**2 + 1.0)


def ode_rhs(state: OdeState, params: OdeParams, grad=None) -> np.ndarray:
    """Vortex velocities (N, 2) for the current state."""
    if state.status != RUNNING:
        raise ConfigError(f"ode_rhs needs a Running state, got {state.status}")
    if grad is None:
        grad = params.gradient(state.degrees)
    terms = rhs_terms(state.positions, state.degrees, state.t, params, grad)
    b = terms["w"] + terms["f"] + terms["g"]
    return invert_response(b, state.degrees, params.lambda0)


@dataclass
class OdeTrajectory:
    """Integrator output: solver-step samples plus the dense interpolant."""

    times: np.ndarray
    positions: np.ndarray  # (T, N, 2)
    degrees: np.ndarray
    status: str
    t_end: float
    dense: object
    params: OdeParams

    def sample(self, t) -> np.ndarray:
        """Positions at times t (clamped to the computed span), (..., N, 2)."""
        tt = np.clip(np.asarray(t, dtype=float), self.times[0], self.t_end)
        y = self.dense(tt)
        n = self.degrees.size
        return np.moveaxis(y.reshape(n, 2, -1), -1, 0) if y.ndim > 1 \
            else y.reshape(n, 2)

    def velocity(self, t) -> np.ndarray:
        grad = self.params.gradient(self.degrees)
        pos = self.sample(t)
        st = OdeState(pos, self.degrees, float(t), RUNNING)
        return ode_rhs(st, self.params, grad=grad)


def integrate(config0: VortexConfiguration, params: OdeParams,
              t_final: float) -> OdeTrajectory:
    """Integrate the motion law up to t_final or the first stopping event."""
    n = len(config0)
    if n == 0:
        raise ConfigError("ode integration needs at least one vortex")
    degrees = config0.degrees
    grad = params.gradient(degrees)
    r_stop = params.collision_radius()
    grid = params.grid

    def f(t, y):
        terms = rhs_terms(y, degrees, t, params, grad)
        b = terms["w"] + terms["f"] + terms["g"]
        return invert_response(b.reshape(-1, 2), degrees, params.lambda0).ravel()

    events = []
    event_kinds = []

    def min_pair_distance(t, y):
        pos = y.reshape(-1, 2)
        best = np.inf
        for a in range(n):
            for b_ in range(a + 1, n):
                best = min(best, float(np.linalg.norm(pos[a] - pos[b_])))
        return best - r_stop

    if n >= 2:
        min_pair_distance.terminal = True
        min_pair_distance.direction = -1.0
        events.append(min_pair_distance)
        event_kinds.append(COLLISION)

    def boundary_distance(t, y):
        pos = y.reshape(-1, 2)
        return float(np.min(grid.boundary_distance(pos))) - r_stop

    if params.bc.kind == NEUMANN:
        boundary_distance.terminal = True
        boundary_distance.direction = -1.0
        events.append(boundary_distance)
        event_kinds.append(BOUNDARY_EXIT)

    sol = solve_ivp(f, (config0.time, config0.time + t_final),
                    config0.positions.ravel(), method="RK45",
                    rtol=params.rtol, atol=params.atol,
                    dense_output=True, events=events)
    if sol.status == -1:
        err = StepUnderflow(f"adaptive step collapsed at t = {sol.t[-1]:.6g}")
        err.last_state = OdeState(sol.y[:, -1].reshape(-1, 2), degrees,
                                  float(sol.t[-1]), RUNNING)
        raise err

    status = RUNNING
    if sol.status == 1:
        for kind, hits in zip(event_kinds, sol.t_events):
            if hits.size:
                status = kind
                break
    positions = np.moveaxis(sol.y.reshape(n, 2, -1), -1, 0)
    return OdeTrajectory(times=sol.t, positions=positions, degrees=degrees,
                         status=status, t_end=float(sol.t[-1]), dense=sol.sol,
                         params=params)
