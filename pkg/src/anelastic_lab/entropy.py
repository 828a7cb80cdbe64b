"""
Entropy functionals: pressure potentials, the kappa-entropy, the relative
kappa-entropy against a smooth test triple (r, V, W), and its
essential/residual split.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acoustic import AcousticState
from .anelastic import AnelasticState
from .background import BackgroundState, PhysParams
from .compressible import CompressibleState, two_velocity
from .templates import plateau


class EntropyError(ValueError):
    pass


def pressure_potential(rho, params: PhysParams):
    if np.any(np.asarray(rho) < 0):
        raise EntropyError("negative density")
    return params.potential(rho)


def relative_potential(rho, r, params: PhysParams):
    """P(rho) - P(r) - P'(r)(rho - r) >= 0."""
    if np.any(np.asarray(rho) < 0):
        raise EntropyError("negative density")
    if np.any(np.asarray(r) <= 0):
        raise EntropyError("reference density must be positive")
    # P = p/(gamma-1), so the remainder of P is that of p scaled
    return params.pressure_remainder(rho, r) / (params.gamma - 1.0)


@dataclass(frozen=True, eq=False)
class TestState:
    r: np.ndarray
    V: np.ndarray
    W: np.ndarray
    time: float = 0.0

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if np.min(self.r) <= 0:
            raise EntropyError("test density must be positive")


@dataclass(frozen=True)
class EntropyReport:
    kinetic_v: float
    kinetic_w: float
    pressure_part: float
    total: float
    ess_norm: float
    res_mass: float


def kappa_entropy(state: CompressibleState, mode: str = "torus", rho_bar: float | None = None) -> float:
    """Integral of rho(|v|^2+|w|^2)/2 plus eps^-2 times the pressure part.

    ``mode='whole_space_proxy'`` replaces P(rho) by its remainder about rho_bar.
    """
    g = state.grid
    p = state.params
    tv = two_velocity(state)
    kin = 0.5 * state.rho * (np.sum(tv.v**2, axis=0) + np.sum(tv.w**2, axis=0))
    if mode == "torus":
        press = pressure_potential(state.rho, p)
    elif mode == "whole_space_proxy":
        rb = state.bg.rho_bar if rho_bar is None else rho_bar
        press = relative_potential(state.rho, np.full(g.shape, rb), p)
    else:
        raise EntropyError(f"unknown mode {mode!r}")
    return float(g.integrate(kin) + g.integrate(press) / p.epsilon**2)


def ess_res_masks(rho: np.ndarray, bg: BackgroundState) -> tuple[np.ndarray, np.ndarray]:
    """psi(rho) and 1 - psi(rho); psi = 1 on [b_min/2, 2 b_max]."""
    ess = plateau(rho, bg.b_min / 4, bg.b_min / 2, 2 * bg.b_max, 4 * bg.b_max)
    return ess, 1.0 - ess


def relative_entropy(state: CompressibleState, test: TestState) -> EntropyReport:
    g = state.grid
    p = state.params
    eps = p.epsilon
    rho = state.rho
    tv = two_velocity(state)
    kv = float(g.integrate(0.5 * rho * np.sum((tv.v - test.V) ** 2, axis=0)))
    kw = float(g.integrate(0.5 * rho * np.sum((tv.w - test.W) ** 2, axis=0)))
    press = float(g.integrate(relative_potential(rho, test.r, p))) / eps**2
    ess, res = ess_res_masks(rho, state.bg)
    ess_norm = g.l2_norm(ess * (rho - test.r) / eps)
    res_mass = float(g.integrate(res * (1.0 + rho**p.gamma)))
    return EntropyReport(kv, kw, press, kv + kw + press, ess_norm, res_mass)


def coercivity_constants(b_min: float, b_max: float, params: PhysParams, *, r_lo: float | None = None,
                         r_hi: float | None = None, n: int = 400) -> tuple[float, float]:
    """Brute-force constants (C_ess, C_res) with

        psi(rho)^2 (rho - r)^2 <= C_ess * relative_potential(rho, r),
        (1 - psi(rho)) (1 + rho^gamma) <= C_res * relative_potential(rho, r),

    for test densities r in [r_lo, r_hi] (default [b_min, b_max]).  Summing
    gives ess_norm^2 <= C_ess * E and res_mass <= C_res * eps^2 * E.
    """
    r_lo = b_min if r_lo is None else r_lo
    r_hi = b_max if r_hi is None else r_hi
    rs = np.linspace(r_lo, r_hi, 41)
    top = 4 * b_max
    rho = np.unique(np.concatenate([
        np.linspace(0.0, top * 1.5, n),
        np.geomspace(1e-8, 1e8, n),
    ]))
    ess = plateau(rho, b_min / 4, b_min / 2, 2 * b_max, 4 * b_max)
    c_ess = 0.0
    c_res = 0.0
    for r in rs:
        rel = relative_potential(rho, np.full_like(rho, r), params)
        ok = rel > 0
        c_ess = max(c_ess, float(np.max((ess**2 * (rho - r) ** 2)[ok] / rel[ok])))
        mask = ok & (ess < 1)
        if np.any(mask):
            c_res = max(c_res, float(np.max(((1 - ess) * (1 + rho**params.gamma))[mask] / rel[mask])))
    return c_ess, c_res


def assemble_test_state_well_prepared(bg: BackgroundState, anelastic: AnelasticState, params: PhysParams,
                                      time: float | None = None, *, time_tol: float = 1e-9) -> TestState:
    """(b, U + 2 kappa mu grad log b, 2 sqrt(kappa(1-kappa)) mu grad log b)."""
    if time is not None and abs(time - anelastic.time) > time_tol:
        raise EntropyError(f"time mismatch: {time} vs anelastic {anelastic.time}")
    glb = bg.grad_log_b
    return TestState(bg.b, anelastic.U + params.v_factor * glb, params.w_factor * glb, anelastic.time)


def assemble_test_state_ill_prepared(bg: BackgroundState, anelastic: AnelasticState, acoustic: AcousticState,
                                     params: PhysParams, time: float | None = None, *,
                                     time_tol: float = 1e-9) -> TestState:
    """(b + eps s, V + grad Phi, W) with the acoustic corrector folded in.

    Requires eps sup|s| < b_min / 2, which keeps r in [b_min/2, 2 b_max].
    """
    if abs(acoustic.time - anelastic.time) > time_tol:
        raise EntropyError(f"time mismatch: acoustic {acoustic.time} vs anelastic {anelastic.time}")
    eps = acoustic.epsilon
    amp = eps * float(np.max(np.abs(acoustic.s)))
    if amp >= bg.b_min / 2:
        raise EntropyError(f"r_{{ε,δ}} positivity: eps*sup|s| = {amp:.3e} >= b_min/2 (eps too large for delta)")
    base = assemble_test_state_well_prepared(bg, anelastic, params, time, time_tol=time_tol)
    return TestState(bg.b + eps * acoustic.s, base.V + bg.grid.gradient(acoustic.Phi), base.W, anelastic.time)
