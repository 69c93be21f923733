"""Explicit leapfrog time stepping for the fluid and the two PML schemes.

Pressures live at integer times n*dt and velocities at half-integer times.
A step advances, in order: the damped velocities V, the auxiliary
velocities V*, the auxiliary pressure P*, then recovers P from the
second-order relation linking P* to P. Schemes A and B differ only in that
last recovery, in how the sigma_x * sigma_y term is centred in time.

All mass matrices are diagonal and the damping is sampled at the nodes, so
every update is pointwise apart from the two sparse gradient products.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .assembly import AssembledOperators


class Scheme(str, Enum):
    FLUID = "fluid"
    A = "A"
    B = "B"


@dataclass(frozen=True)
class RickerSpec:
    """Ricker bump ``amp * (1 - 2 a r^2) exp(-a r^2)`` with ``a = (pi f0 / ratio)^2``."""

    center: tuple[float, float] = (17.0, 17.0)
    f0: float = 1.0
    ratio: float = 0.5
    amplitude: float = 1.0

    @property
    def a(self) -> float:
        return (np.pi * self.f0 / self.ratio) ** 2

    def __call__(self, x, y):
        r2 = (np.asarray(x) - self.center[0]) ** 2 + (np.asarray(y) - self.center[1]) ** 2
        return self.amplitude * (1.0 - 2.0 * self.a * r2) * np.exp(-self.a * r2)


@dataclass(frozen=True)
class SimState:
    """Unknowns at step n.

    ``P_prev``/``P_curr`` (and the starred pair) are at (n-1)dt and n dt;
    the four velocity arrays are at (n-1/2)dt.
    """

    P_prev: np.ndarray
    P_curr: np.ndarray
    Pstar_prev: np.ndarray
    Pstar_curr: np.ndarray
    Vx: np.ndarray
    Vy: np.ndarray
    Vstar_x: np.ndarray
    Vstar_y: np.ndarray
    n: int
    dt: float

    @property
    def t(self) -> float:
        return self.n * self.dt


def init_state(ops: AssembledOperators, source: RickerSpec, dt: float) -> SimState:
    """Ricker initial pressure, zero velocities, P* = P, P^{-1} = P^0."""
    if dt <= 0:
        raise ValueError(f"time step must be positive, got {dt}")
    mesh = ops.mesh
    cx, cy = source.center
    if not (mesh.x_min <= cx <= mesh.x_max and mesh.y_min <= cy <= mesh.y_max):
        raise ValueError(f"source center {source.center} lies outside the computational domain")
    px, py = ops.dofs.free_coordinates()
    P0 = np.asarray(source(px, py), dtype=float)
    return state_from_pressure(ops, P0, dt)


def state_from_pressure(ops: AssembledOperators, P0: np.ndarray, dt: float) -> SimState:
    P0 = np.array(P0, dtype=float)
    if P0.shape != (ops.n_pressure,):
        raise ValueError(f"pressure must have shape ({ops.n_pressure},), got {P0.shape}")
    zv = np.zeros(ops.n_velocity)
    return SimState(
        P_prev=P0, P_curr=P0, Pstar_prev=P0, Pstar_curr=P0,
        Vx=zv, Vy=zv, Vstar_x=zv, Vstar_y=zv, n=0, dt=float(dt),
    )


def step_fluid(state: SimState, ops: AssembledOperators) -> SimState:
    dt = state.dt
    Vx = state.Vx + dt * (ops.RxT @ state.P_curr) / ops.B
    Vy = state.Vy + dt * (ops.RyT @ state.P_curr) / ops.B
    P_next = state.P_curr - dt * (ops.Rx @ Vx + ops.Ry @ Vy) / ops.M
    return replace(
        state,
        P_prev=state.P_curr, P_curr=P_next,
        Pstar_prev=state.P_curr, Pstar_curr=P_next,
        Vx=Vx, Vy=Vy, Vstar_x=Vx, Vstar_y=Vy, n=state.n + 1,
    )


def _velocity_and_pstar(state: SimState, ops: AssembledOperators):
    dt = state.dt
    sx, sy = ops.sx_v, ops.sy_v
    gx = (ops.RxT @ state.P_curr) / ops.B
    gy = (ops.RyT @ state.P_curr) / ops.B
    Vx = ((1.0 / dt - 0.5 * sx) * state.Vx + gx) / (1.0 / dt + 0.5 * sx)
    Vy = ((1.0 / dt - 0.5 * sy) * state.Vy + gy) / (1.0 / dt + 0.5 * sy)
    Vsx = state.Vstar_x + (Vx - state.Vx) + 0.5 * dt * sy * (Vx + state.Vx)
    Vsy = state.Vstar_y + (Vy - state.Vy) + 0.5 * dt * sx * (Vy + state.Vy)
    Pstar_next = state.Pstar_curr - dt * (ops.Rx @ Vsx + ops.Ry @ Vsy) / ops.M
    return Vx, Vy, Vsx, Vsy, Pstar_next


def _recover(state: SimState, ops: AssembledOperators, Pstar_next: np.ndarray, centred_product: bool):
    # dt^2 * D^2 P* = dt^2 * [D^2 P + s DI P + p (P^n or I^2 P)], solved for P^{n+1}.
    dt = state.dt
    s = ops.sx_p + ops.sy_p
    p = ops.sx_p * ops.sy_p
    P, Pm = state.P_curr, state.P_prev
    d2star = Pstar_next - 2.0 * state.Pstar_curr + state.Pstar_prev
    if centred_product:
        lhs = 1.0 + 0.5 * dt * s + 0.25 * dt * dt * p
        rhs = d2star + (2.0 - 0.5 * dt * dt * p) * P - (1.0 - 0.5 * dt * s + 0.25 * dt * dt * p) * Pm
    else:
        lhs = 1.0 + 0.5 * dt * s
        rhs = d2star + (2.0 - dt * dt * p) * P - (1.0 - 0.5 * dt * s) * Pm
    return rhs / lhs


def _step_pml(state: SimState, ops: AssembledOperators, centred_product: bool) -> SimState:
    Vx, Vy, Vsx, Vsy, Pstar_next = _velocity_and_pstar(state, ops)
    P_next = _recover(state, ops, Pstar_next, centred_product)
    return SimState(
        P_prev=state.P_curr, P_curr=P_next,
        Pstar_prev=state.Pstar_curr, Pstar_curr=Pstar_next,
        Vx=Vx, Vy=Vy, Vstar_x=Vsx, Vstar_y=Vsy, n=state.n + 1, dt=state.dt,
    )


def step_scheme_a(state: SimState, ops: AssembledOperators) -> SimState:
    """PML step with the product term taken at P^n."""
    return _step_pml(state, ops, centred_product=False)


def step_scheme_b(state: SimState, ops: AssembledOperators) -> SimState:
    """PML step with the product term averaged, (P^{n+1} + 2P^n + P^{n-1})/4."""
    return _step_pml(state, ops, centred_product=True)


STEPPERS = {
    Scheme.FLUID: step_fluid,
    Scheme.A: step_scheme_a,
    Scheme.B: step_scheme_b,
}


def stepper(scheme: Scheme | str):
    return STEPPERS[Scheme(scheme)]


def pressure_coefficient(ops: AssembledOperators, dt: float, scheme: Scheme | str) -> np.ndarray:
    """Nodal coefficient multiplying P^{n+1} in the recovery, 1/dt^2 + s/(2dt) [+ p/4]."""
    s = ops.sx_p + ops.sy_p
    a0 = 1.0 / dt**2 + s / (2.0 * dt)
    if Scheme(scheme) is Scheme.B:
        a0 = a0 + ops.sx_p * ops.sy_p / 4.0
    return a0


def reverse_step_fluid(state: SimState, ops: AssembledOperators) -> SimState:
    """Undo one :func:`step_fluid` (the leapfrog is time-reversible)."""
    dt = state.dt
    P_prev = state.P_curr + dt * (ops.Rx @ state.Vx + ops.Ry @ state.Vy) / ops.M
    Vx = state.Vx - dt * (ops.RxT @ P_prev) / ops.B
    Vy = state.Vy - dt * (ops.RyT @ P_prev) / ops.B
    return replace(
        state,
        P_prev=P_prev, P_curr=P_prev, Pstar_prev=P_prev, Pstar_curr=P_prev,
        Vx=Vx, Vy=Vy, Vstar_x=Vx, Vstar_y=Vy, n=state.n - 1,
    )
