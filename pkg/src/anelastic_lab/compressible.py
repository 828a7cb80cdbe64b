"""
Degenerate compressible Navier-Stokes in conservative variables (rho, m).

The pressure-gravity force is never formed as grad p(rho) - rho grad G,
which cancels two O(1/eps^2) terms.  It is split around the profile b,

    (1/eps^2)(grad p(rho) - rho grad G)
        = (1/eps) b grad(P''(b) s) + (1/eps^2) grad(p(rho) - p(b) - p'(b)(rho - b)),

with s = (rho - b)/eps, which is O(1/eps) + O(1) for near-profile states
and makes (b, 0) an exact discrete steady state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .background import BackgroundState, PhysParams
from .helmholtz import project_b


class VacuumError(RuntimeError):
    pass


class CFLError(ValueError):
    pass


RHO_FLOOR_FRACTION = 1e-6


@dataclass(frozen=True, eq=False)
class CompressibleState:
    time: float
    rho: np.ndarray
    momentum: np.ndarray
    params: PhysParams
    bg: BackgroundState

    @property
    def grid(self):
        return self.bg.grid

    @property
    def rho_floor(self) -> float:
        return RHO_FLOOR_FRACTION * self.bg.b_min

    @property
    def velocity(self) -> np.ndarray:
        return self.momentum / self.rho

    def check(self):
        if not (np.all(np.isfinite(self.rho)) and np.all(np.isfinite(self.momentum))):
            raise VacuumError(f"non-finite field at t={self.time:.6g}")
        rmin = float(np.min(self.rho))
        if rmin < self.rho_floor:
            raise VacuumError(f"vacuum guard: min rho = {rmin:.3e} < floor {self.rho_floor:.3e} at t={self.time:.6g}")
        return self


@dataclass(frozen=True, eq=False)
class TwoVelocityView:
    v: np.ndarray
    w: np.ndarray


def _initial_state(bg, rho, u, params):
    # Every momentum forcing is 2/3-filtered, so unfiltered high modes of m
    # would never feel a force and would drive secular growth of rho.  The
    # filtered subspace (around b) is invariant under the dynamics.
    g = bg.grid
    rho = bg.b + g.dealias(rho - bg.b)
    return CompressibleState(0.0, rho, g.dealias(rho * u), params, bg).check()


def init_well_prepared(bg: BackgroundState, U0: np.ndarray, rho1: np.ndarray,
                       params: PhysParams, *, project: bool = True) -> CompressibleState:
    """rho_0 = b + eps*rho1, m_0 = rho_0 U0 with U0 made b-solenoidal."""
    g = bg.grid
    if project:
        U0 = project_b(bg.b * U0, bg.b, g) / bg.b
    rho0 = bg.b + params.epsilon * rho1
    return _initial_state(bg, rho0, U0, params)


def init_ill_prepared(bg: BackgroundState, phi0: np.ndarray, u0: np.ndarray,
                      params: PhysParams) -> CompressibleState:
    """rho_0 = b + eps*phi0, m_0 = rho_0 u0; u0 may carry an acoustic part."""
    return _initial_state(bg, bg.b + params.epsilon * phi0, u0, params)


def rhs(state: CompressibleState) -> tuple[np.ndarray, np.ndarray]:
    """Tendencies (d rho/dt, d m/dt); products are 2/3-dealiased."""
    state.check()
    g = state.grid
    p = state.params
    b = state.bg.b
    eps = p.epsilon
    rho, m = state.rho, state.momentum

    drho = -g.divergence(m)

    u = g.dealias(m / rho)
    flux = g.dealias(m[:, None] * u[None, :])
    s = (rho - b) / eps
    q = g.dealias(state.bg.ddP_b * s)
    acoustic = g.dealias(b * g.gradient(q)) / eps
    remainder = g.dealias(p.pressure_remainder(rho, b))
    nonlinear_pressure = g.gradient(remainder) / eps**2
    D, _ = g.sym_antisym_grad(u)
    stress = g.dealias(rho * D)

    dm = -g.div_tensor(flux) - acoustic - nonlinear_pressure + 2.0 * p.mu * g.div_tensor(stress)
    return drho, dm


def sound_speed_max(state: CompressibleState) -> float:
    p = state.params
    return float(np.sqrt(p.a * p.gamma * np.max(state.rho) ** (p.gamma - 1.0)))


def cfl_dt(state: CompressibleState, cfl: float = 0.4) -> float:
    g = state.grid
    p = state.params
    umax = float(np.max(np.sqrt(np.sum(state.velocity**2, axis=0))))
    c = sound_speed_max(state)
    rmin, rmax = float(np.min(state.rho)), float(np.max(state.rho))
    dts = []
    for h in g.spacing:
        dts.append(h / (umax + c / p.epsilon))
        dts.append(h * h * rmin / (4.0 * p.mu * rmax * g.dim))
    return cfl * min(dts)


def _advance(state, drho, dm, dt):
    return replace(state, time=state.time + dt, rho=state.rho + dt * drho, momentum=state.momentum + dt * dm)


def step_rk4(state: CompressibleState, dt: float, *, cfl: float = 0.4, check_cfl: bool = True) -> CompressibleState:
    """Classical four-stage Runge-Kutta step; the vacuum guard runs per stage."""
    if dt == 0:
        return state
    if check_cfl:
        limit = cfl_dt(state, cfl)
        if dt > limit * (1 + 1e-12):
            raise CFLError(f"dt={dt:.4e} exceeds CFL limit {limit:.4e}")
    k1 = rhs(state)
    k2 = rhs(_advance(state, *k1, dt / 2))
    k3 = rhs(_advance(state, *k2, dt / 2))
    s3 = _advance(state, *k3, dt)
    k4 = rhs(s3)
    drho = (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) / 6
    dm = (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) / 6
    return _advance(state, drho, dm, dt).check()


def two_velocity(state: CompressibleState) -> TwoVelocityView:
    """v = u + 2 kappa mu grad log rho, w = 2 sqrt(kappa(1-kappa)) mu grad log rho."""
    state.check()
    p = state.params
    grad_log_rho = state.grid.gradient(np.log(state.rho))
    u = state.velocity
    return TwoVelocityView(u + p.v_factor * grad_log_rho, p.w_factor * grad_log_rho)


def advance_to(state: CompressibleState, t_end: float, *, cfl: float = 0.4,
               max_steps: int = 10_000_000) -> tuple[CompressibleState, int]:
    """Step to exactly ``t_end`` with equal sub-steps below the CFL limit."""
    span = t_end - state.time
    if span <= 0:
        return state, 0
    n = max(1, int(np.ceil(span / cfl_dt(state, cfl) * (1 + 1e-12))))
    steps = 0
    while steps < max_steps:
        dt = (t_end - state.time) / n
        limit = cfl_dt(state, cfl)
        if dt > limit:
            n = int(np.ceil((t_end - state.time) / limit))
            continue
        state = step_rk4(state, dt, check_cfl=False)
        steps += 1
        n -= 1
        if n == 0:
            break
    return replace(state, time=t_end), steps
