"""
Physical constants and the stationary density profile.

The profile solves grad p(b) = b grad G for the power law p = a rho^gamma.
Since P'(b) = a gamma b^(gamma-1) / (gamma-1) this is P'(b) = G + C, which
is inverted in closed form; only the normalization constant C needs a
scalar solve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .grid import Grid

log = logging.getLogger(__name__)


class BackgroundError(ValueError):
    pass


@dataclass(frozen=True)
class PhysParams:
    """Constants of the degenerate system; ``beta`` is derived from kappa."""

    a: float = 0.5
    gamma: float = 2.0
    mu: float = 0.05
    kappa: float = 0.25
    epsilon: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")
        if not self.gamma > 1:
            raise ValueError("gamma must exceed 1")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not 0 < self.kappa < 1:
            raise ValueError("kappa must lie in (0, 1)")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def beta(self) -> float:
        return float(np.sqrt(self.kappa / (1.0 - self.kappa)))

    @property
    def w_factor(self) -> float:
        """2 sqrt(kappa (1 - kappa)) mu, the coefficient of grad log rho in w."""
        return 2.0 * np.sqrt(self.kappa * (1.0 - self.kappa)) * self.mu

    @property
    def v_factor(self) -> float:
        """2 kappa mu, the coefficient of grad log rho in v."""
        return 2.0 * self.kappa * self.mu

    # pressure law and its potential
    def pressure(self, rho):
        return self.a * np.power(rho, self.gamma)

    def dpressure(self, rho):
        return self.a * self.gamma * np.power(rho, self.gamma - 1.0)

    def potential(self, rho):
        return self.a / (self.gamma - 1.0) * np.power(rho, self.gamma)

    def dpotential(self, rho):
        return self.a * self.gamma / (self.gamma - 1.0) * np.power(rho, self.gamma - 1.0)

    def ddpotential(self, rho):
        """P''(rho) = p'(rho) / rho."""
        return self.a * self.gamma * np.power(rho, self.gamma - 2.0)

    def inverse_dpotential(self, y):
        """Solve P'(b) = y for b; y must be positive."""
        return np.power((self.gamma - 1.0) * y / (self.a * self.gamma), 1.0 / (self.gamma - 1.0))

    def pressure_remainder(self, rho, r):
        """p(rho) - p(r) - p'(r)(rho - r), evaluated without cancellation."""
        x = (rho - r) / r
        return self.a * np.power(r, self.gamma) * _power_remainder(x, self.gamma)


def _power_remainder(x, gamma):
    # (1+x)^gamma - 1 - gamma*x for x >= -1
    with np.errstate(divide="ignore"):
        return np.expm1(gamma * np.log1p(x)) - gamma * x


@dataclass(frozen=True, eq=False)
class BackgroundState:
    grid: Grid
    params: PhysParams
    b: np.ndarray
    G: np.ndarray
    grad_log_b: np.ndarray
    Wbar: np.ndarray
    rho_bar: float
    normalization: str
    constant: float
    b_min: float = field(init=False)
    b_max: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "b_min", float(np.min(self.b)))
        object.__setattr__(self, "b_max", float(np.max(self.b)))

    @property
    def pprime_b(self) -> np.ndarray:
        return self.params.dpressure(self.b)

    @property
    def ddP_b(self) -> np.ndarray:
        return self.params.ddpotential(self.b)

    def residual(self) -> float:
        """Relative sup-norm of grad p(b) - b grad G."""
        g = self.grid
        lhs = g.gradient(self.params.pressure(self.b))
        rhs = self.b * g.gradient(self.G)
        err = float(np.max(np.abs(lhs - rhs)))
        scale = float(np.max(np.abs(rhs)))
        # absolute when G is (numerically) flat
        return err / scale if scale > 1e-14 else err

    @property
    def is_constant(self) -> bool:
        return self.b_max - self.b_min <= 1e-14 * self.b_max


def _profile(G, C, params):
    y = G + C
    if np.min(y) <= 0:
        raise BackgroundError(f"profile non-positive: min(G + C) = {np.min(y):.3e}")
    return params.inverse_dpotential(y)


def solve_background(G: np.ndarray, grid: Grid, params: PhysParams, normalization: str = "mean",
                     rho_bar: float = 1.0, tol_background: float = 1e-6) -> BackgroundState:
    """Stationary profile b with P'(b) = G + C.

    ``normalization='mean'`` picks C so that the grid mean of b is rho_bar;
    ``'far_field'`` takes C = P'(rho_bar), so b = rho_bar wherever G = 0.
    """
    if not rho_bar > 0:
        raise BackgroundError("rho_bar must be positive")
    G = np.asarray(G, dtype=float)
    if normalization == "far_field":
        C = float(params.dpotential(rho_bar))
    elif normalization == "mean":
        Pbar = float(params.dpotential(rho_bar))
        lo, hi = Pbar - float(np.max(G)), Pbar - float(np.min(G))
        floor = -float(np.min(G))

        def excess(C):
            y = np.maximum(G + C, 0.0)
            return float(np.mean(params.inverse_dpotential(y))) - rho_bar

        if hi <= lo:
            C = Pbar - float(G.flat[0])
        else:
            lo = max(lo, floor)
            try:
                C = optimize.bisect(excess, lo, hi, xtol=1e-13, maxiter=400)
            except ValueError as exc:
                raise BackgroundError(f"root-finding for C does not bracket: {exc}") from exc
    else:
        raise BackgroundError(f"unknown normalization {normalization!r}")

    b = _profile(G, C, params)
    grad_log_b = grid.gradient(np.log(b))
    bg = BackgroundState(grid, params, b, G, grad_log_b, params.w_factor * grad_log_b,
                         float(rho_bar), normalization, float(C))
    res = bg.residual()
    if res > tol_background:
        log.warning("background residual %.3e exceeds %.1e (under-resolved G?)", res, tol_background)
    return bg


def limit_fields(bg: BackgroundState, params: PhysParams) -> tuple[np.ndarray, np.ndarray]:
    """(Wbar, Voffset) = (2 sqrt(k(1-k)) mu, 2 k mu) * grad log b."""
    return params.w_factor * bg.grad_log_b, params.v_factor * bg.grad_log_b
