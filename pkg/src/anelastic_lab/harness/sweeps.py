"""
Epsilon sweeps comparing the compressible solver against its limit.

Well-prepared: the relative entropy against (b, U + 2 kappa mu grad log b,
2 sqrt(kappa(1-kappa)) mu grad log b), sampled uniformly on [0, T].

Ill-prepared: the same with the acoustic corrector (b + eps s, V + grad Phi, W),
plus the L^2(0,T; L^2(window)) distance between sqrt(rho) v and sqrt(b) V on a
central window, and the acoustic dispersion metric over each epsilon's
wrap-around horizon.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .. import acoustic as ac
from .. import anelastic as an
from .. import compressible as cs
from ..entropy import (EntropyError, assemble_test_state_ill_prepared, assemble_test_state_well_prepared,
                       relative_entropy)
from .config import RunConfig

log = logging.getLogger(__name__)

SOLVER_ERRORS = (RuntimeError, ValueError, ArithmeticError)


@dataclass
class SweepRow:
    epsilon: float
    delta: float | None = None
    sup_E: float | None = None
    E0: float | None = None
    ET: float | None = None
    local_L2: float | None = None
    wall_ms: float | None = None
    steps: int | None = None
    status: str = "ok"
    reason: str = ""
    dispersion: float | None = None
    final: object = field(default=None, repr=False)


@dataclass
class TrajectoryRow:
    time: float
    E_total: float
    E_kin_v: float
    E_kin_w: float
    E_press: float
    ess_norm: float
    res_mass: float
    acoustic_energy: float | None = None


@dataclass
class SweepReport:
    kind: str
    config_hash: str
    rows: list[SweepRow] = field(default_factory=list)
    trajectories: dict = field(default_factory=dict)

    def deltas(self) -> list:
        out = []
        for r in self.rows:
            if r.delta not in out:
                out.append(r.delta)
        return out

    def metric(self) -> str:
        return "local_L2" if self.kind == "ill_prepared" else "sup_E"

    def series(self, delta=None, metric: str | None = None) -> list[tuple[float, float | None]]:
        m = metric or self.metric()
        return [(r.epsilon, getattr(r, m)) for r in self.rows if r.delta == delta]

    def ratios(self, delta=None, metric: str | None = None) -> list[float | None]:
        vals = [v for _, v in self.series(delta, metric)]
        return [None if a is None or b is None or a == 0 else b / a for a, b in zip(vals, vals[1:])]

    def monotone(self, delta=None, metric: str | None = None) -> bool:
        """Strictly decreasing along the (descending) epsilon list, no failed rows."""
        vals = [v for _, v in self.series(delta, metric)]
        if not vals or any(v is None for v in vals):
            return False
        return all(b < a for a, b in zip(vals, vals[1:]))


def sample_times(cfg: RunConfig) -> np.ndarray:
    return np.linspace(0.0, cfg.T_final, cfg.samples)


def _trajectory_row(t, rep, acoustic_energy=None) -> TrajectoryRow:
    return TrajectoryRow(t, rep.total, rep.kinetic_v, rep.kinetic_w, rep.pressure_part, rep.ess_norm,
                         rep.res_mass, acoustic_energy)


def _finish(row: SweepRow, traj: list[TrajectoryRow], steps: int, t0: float, cfg: RunConfig):
    totals = [r.E_total for r in traj]
    row.sup_E = float(max(totals))
    row.E0 = float(totals[0])
    row.ET = float(totals[-1])
    row.steps = steps
    row.wall_ms = round(1e3 * (time.perf_counter() - t0), 3) if cfg.record_timing else None


def anelastic_trajectory(cfg: RunConfig, bg, U0, times) -> tuple[list, int]:
    """Anelastic states at every sample time (epsilon independent)."""
    st = an.make_state(U0, bg, cfg.mu)
    out = [st]
    steps = 0
    for t in times[1:]:
        st, n = an.advance_to(st, float(t), cfl=cfg.cfl)
        out.append(st)
        steps += n
    return out, steps


# -- well-prepared ------------------------------------------------------


def well_prepared_member(cfg: RunConfig, eps: float, bg, chi, U0, anelastic_states, times, *,
                         keep_final: bool = False):
    """One epsilon: run the compressible solver and sample E against the limit."""
    t0 = time.perf_counter()
    params = cfg.params(eps)
    row = SweepRow(epsilon=eps)
    traj = []
    steps = 0
    try:
        state = cs.init_well_prepared(bg, U0, np.sqrt(eps) * chi, params, project=False)
        for t, ast in zip(times, anelastic_states):
            state, n = cs.advance_to(state, float(t), cfl=cfg.cfl)
            steps += n
            test = assemble_test_state_well_prepared(bg, ast, params, float(t))
            traj.append(_trajectory_row(float(t), relative_entropy(state, test)))
    except SOLVER_ERRORS as exc:
        row.status, row.reason = "failed", f"{type(exc).__name__}: {exc}"
        log.warning("eps=%g aborted: %s", eps, row.reason)
        return row, traj
    _finish(row, traj, steps, t0, cfg)
    if keep_final:
        row.final = state
    return row, traj


def run_well_prepared_sweep(cfg: RunConfig) -> SweepReport:
    grid = cfg.grid()
    bg = cfg.background(grid)
    chi = cfg.scalar(grid, "rho1", seed_offset=1)
    U0 = an.enforce_constraint(cfg.vector(grid, "U0", seed_offset=2), bg)
    times = sample_times(cfg)
    states, _ = anelastic_trajectory(cfg, bg, U0, times)
    report = SweepReport("well_prepared", cfg.hash())
    for eps in cfg.epsilons:
        row, traj = well_prepared_member(cfg, eps, bg, chi, U0, states, times)
        report.rows.append(row)
        report.trajectories[(None, eps)] = traj
        log.info("eps=%g sup_E=%s steps=%s", eps, row.sup_E, row.steps)
    return report


# -- ill-prepared -------------------------------------------------------


def window_mask(grid, radius: float) -> np.ndarray:
    return (grid.radius() < radius).astype(float)


def dispersion_for(bg, op, cut, params, state0) -> float:
    """Dispersion metric over 0.9 of the wrap-around horizon of this epsilon."""
    eps = params.epsilon
    T = 0.9 * ac.horizon(bg, params, eps, cut.support_radius)
    if T <= 0:
        raise ac.AcousticError("box too small for the data support")
    period = ac.fastest_period(op, cut, eps)
    n = max(64, int(np.ceil(4 * T / period)) + 1)
    times = np.linspace(0.0, T, n)
    states = ac.sample_trajectory(state0, op, times, params)
    return ac.dispersion_decay_metric(times, states, bg.grid, T, period=period,
                                      horizon_time=T / 0.9)


def ill_prepared_member(cfg: RunConfig, eps: float, delta: float, bg, op, cut, phi0, u0,
                        anelastic_states, times):
    t0 = time.perf_counter()
    params = cfg.params(eps)
    grid = bg.grid
    row = SweepRow(epsilon=eps, delta=delta)
    traj = []
    steps = 0
    mask = window_mask(grid, cfg.window_radius)
    sqrt_b = np.sqrt(bg.b)
    dist = []
    try:
        a0 = ac.acoustic_initial_data(bg, phi0, u0, params, cut, op)
        row.dispersion = dispersion_for(bg, op, cut, params, a0)
        state = cs.init_ill_prepared(bg, phi0, u0, params)
        for t, ast in zip(times, anelastic_states):
            state, n = cs.advance_to(state, float(t), cfl=cfg.cfl)
            steps += n
            a_t = ac.evolve(a0, op, float(t), params)
            test = assemble_test_state_ill_prepared(bg, ast, a_t, params, float(t))
            rep = relative_entropy(state, test)
            traj.append(_trajectory_row(float(t), rep, ac.acoustic_energy(a_t, bg, params)))
            v = cs.two_velocity(state).v
            V = ast.U + params.v_factor * bg.grad_log_b
            diff = np.sqrt(state.rho) * v - sqrt_b * V
            dist.append(grid.integrate(mask * np.sum(diff * diff, axis=0)))
    except EntropyError as exc:
        row.status, row.reason = "failed", f"eps too large for delta: {exc}"
        log.warning("eps=%g delta=%g aborted: %s", eps, delta, row.reason)
        return row, traj
    except SOLVER_ERRORS as exc:
        row.status, row.reason = "failed", f"{type(exc).__name__}: {exc}"
        log.warning("eps=%g delta=%g aborted: %s", eps, delta, row.reason)
        return row, traj
    row.local_L2 = float(np.sqrt(np.trapezoid(dist, times)))
    _finish(row, traj, steps, t0, cfg)
    return row, traj


def run_ill_prepared_sweep(cfg: RunConfig) -> SweepReport:
    """delta outer, epsilon inner."""
    grid = cfg.grid()
    bg = cfg.background(grid)
    phi0 = cfg.scalar(grid, "phi0", seed_offset=3)
    u0 = cfg.vector(grid, "u0", seed_offset=4)
    U0 = an.enforce_constraint(u0, bg)
    times = sample_times(cfg)
    states, _ = anelastic_trajectory(cfg, bg, U0, times)
    approximate = cfg.acoustic_backend == "constant_coeff_fourier"
    op = ac.build_operator(bg, cfg.params(), cfg.acoustic_backend, approximate=approximate)
    report = SweepReport("ill_prepared", cfg.hash())
    for delta in cfg.deltas:
        cut = ac.make_cutoff(grid, delta)
        for eps in cfg.epsilons:
            row, traj = ill_prepared_member(cfg, eps, delta, bg, op, cut, phi0, u0, states, times)
            report.rows.append(row)
            report.trajectories[(delta, eps)] = traj
            log.info("delta=%g eps=%g local_L2=%s sup_E=%s", delta, eps, row.local_L2, row.sup_E)
    return report
