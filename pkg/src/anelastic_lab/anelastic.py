"""
Generalized anelastic system

    div(b U) = 0,
    dU/dt + U.grad U + grad Pi = (2 mu / b) div(b D(U)),

advanced with RK4 where every stage tendency is projected with the
weighted projector P_b.  The gradient part of the projection is b grad Pi,
so the pressure comes out of the same decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .background import BackgroundState
from .compressible import CFLError
from .helmholtz import decompose, project_b


@dataclass(frozen=True, eq=False)
class AnelasticState:
    time: float
    U: np.ndarray
    Pi: np.ndarray
    bg: BackgroundState
    mu: float

    @property
    def grid(self):
        return self.bg.grid

    def constraint_residual(self) -> float:
        """sup|div(bU)| / sup|bU|."""
        bU = self.bg.b * self.U
        scale = max(float(np.max(np.abs(bU))), 1e-300)
        return float(np.max(np.abs(self.grid.divergence(bU)))) / scale


def enforce_constraint(U: np.ndarray, bg: BackgroundState) -> np.ndarray:
    """P_b[bU] / b."""
    return project_b(bg.b * U, bg.b, bg.grid) / bg.b


def make_state(U0: np.ndarray, bg: BackgroundState, mu: float, *, project: bool = True) -> AnelasticState:
    U = enforce_constraint(U0, bg) if project else U0
    st = AnelasticState(0.0, U, bg.grid.zeros(), bg, mu)
    _, Pi = anelastic_rhs(st)
    return replace(st, Pi=Pi)


def tentative_tendency(U: np.ndarray, bg: BackgroundState, mu: float) -> np.ndarray:
    """F = -U.grad U + (2 mu / b) div(b D(U)), before projection."""
    g = bg.grid
    b = bg.b
    gu = g.grad_vector(U)
    adv = g.dealias(np.einsum("j...,ij...->i...", U, gu))
    D = 0.5 * (gu + np.swapaxes(gu, 0, 1))
    visc = 2.0 * mu * g.div_tensor(g.dealias(b * D)) / b
    return -adv + visc


def anelastic_rhs(state: AnelasticState) -> tuple[np.ndarray, np.ndarray]:
    """Projected tendency dU and the zero-mean pressure Pi."""
    b = state.bg.b
    F = tentative_tendency(state.U, state.bg, state.mu)
    res = decompose(b * F, b, state.grid)
    Pi = res.potential - np.mean(res.potential)
    return res.solenoidal / b, Pi


def cfl_dt(state: AnelasticState, cfl: float = 0.4) -> float:
    g = state.grid
    bg = state.bg
    umax = float(np.max(np.sqrt(np.sum(state.U**2, axis=0))))
    dts = []
    for h in g.spacing:
        if umax > 0:
            dts.append(h / umax)
        dts.append(h * h * bg.b_min / (4.0 * state.mu * bg.b_max * g.dim))
    return cfl * min(dts)


def step(state: AnelasticState, dt: float, *, cfl: float = 0.4, check_cfl: bool = True,
         compute_pressure: bool = True) -> AnelasticState:
    """RK4 with projected stages; U is re-projected after the step."""
    if dt == 0:
        return state
    if check_cfl:
        limit = cfl_dt(state, cfl)
        if dt > limit * (1 + 1e-12):
            raise CFLError(f"dt={dt:.4e} exceeds CFL limit {limit:.4e}")
    U = state.U

    def f(V):
        return anelastic_rhs(replace(state, U=V))[0]

    k1 = f(U)
    k2 = f(U + 0.5 * dt * k1)
    k3 = f(U + 0.5 * dt * k2)
    k4 = f(U + dt * k3)
    Unew = enforce_constraint(U + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6, state.bg)
    new = replace(state, time=state.time + dt, U=Unew)
    if compute_pressure:
        new = replace(new, Pi=anelastic_rhs(new)[1])
    return new


def advance_to(state: AnelasticState, t_end: float, *, cfl: float = 0.4,
               compute_pressure: bool = True) -> tuple[AnelasticState, int]:
    """Equal sub-steps to land exactly on ``t_end``."""
    span = t_end - state.time
    if span <= 0:
        return state, 0
    n = max(1, int(np.ceil(span / cfl_dt(state, cfl) * (1 + 1e-12))))
    dt = span / n
    for i in range(n):
        state = step(state, dt, check_cfl=False, compute_pressure=compute_pressure and i == n - 1)
    return replace(state, time=t_end), n


def kinetic_energy(U: np.ndarray, bg: BackgroundState) -> float:
    """Weighted energy of b |U|^2 / 2."""
    return float(bg.grid.integrate(0.5 * bg.b * np.sum(U * U, axis=0)))


def dissipation(U: np.ndarray, bg: BackgroundState, mu: float) -> float:
    """2 mu integral of b |D(U)|^2."""
    D, _ = bg.grid.sym_antisym_grad(U)
    return float(bg.grid.integrate(2.0 * mu * bg.b * np.sum(D * D, axis=(0, 1))))
