"""
Acoustic wave system with variable coefficient b.

With q = P''(b) s the system

    eps ds/dt + div(b grad Phi) = 0,    eps dPhi/dt = -P''(b) s

becomes eps dq/dt = T_b Phi, eps dPhi/dt = -q, where
T_b v = -(p'(b)/b) div(b grad v) is self-adjoint and non-negative on L^2
with weight g = b / p'(b).  In a g-orthonormal eigenbasis every mode is a
rotation at angular frequency sqrt(lambda)/eps, which ``evolve`` applies
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .background import BackgroundState, PhysParams
from .grid import Grid
from .helmholtz import decompose
from .templates import plateau, smoothstep

DENSE_LIMIT = 16384


class AcousticError(ValueError):
    pass


def _diff_matrix_1d(n: int, length: float) -> np.ndarray:
    m = np.fft.fftfreq(n, 1.0 / n)
    k = m * 2 * np.pi / length
    k[n // 2] = 0.0
    eye = np.eye(n)
    return np.real(np.fft.ifft(1j * k[:, None] * np.fft.fft(eye, axis=0), axis=0))


def derivative_matrices(grid: Grid) -> list[np.ndarray]:
    """Dense spectral derivative matrices acting on C-order flattened fields."""
    mats = []
    for ax in range(grid.dim):
        D = _diff_matrix_1d(grid.sizes[ax], grid.lengths[ax])
        full = np.ones((1, 1))
        for other in range(grid.dim):
            full = np.kron(full, D if other == ax else np.eye(grid.sizes[other]))
        mats.append(full)
    return mats


@dataclass(frozen=True, eq=False)
class AcousticOperator:
    grid: Grid
    b: np.ndarray
    pprime_b: np.ndarray
    weight: np.ndarray
    backend: str
    eigenvalues: np.ndarray | None = None
    eigenvectors: np.ndarray | None = None
    multiplier: np.ndarray | None = None

    def apply(self, v: np.ndarray) -> np.ndarray:
        """T_b v, matrix-free."""
        g = self.grid
        return -(self.pprime_b / self.b) * g.divergence(self.b * g.gradient(v))

    def inner(self, f: np.ndarray, h: np.ndarray) -> float:
        """Weighted inner product integral of f h g."""
        return float(self.grid.integrate(f * h * self.weight))

    @property
    def max_eigenvalue(self) -> float:
        if self.backend == "dense_eigen":
            return float(self.eigenvalues[-1])
        return float(np.max(self.multiplier))

    def to_modal(self, f: np.ndarray) -> np.ndarray:
        if self.backend == "dense_eigen":
            w = self.grid.cell_volume
            return self.eigenvectors.T @ (w * self.weight * f).ravel()
        return self.grid.fft(f)

    def from_modal(self, c: np.ndarray) -> np.ndarray:
        if self.backend == "dense_eigen":
            return (self.eigenvectors @ c).reshape(self.grid.shape)
        return self.grid.ifft(c)

    @property
    def modal_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues if self.backend == "dense_eigen" else self.multiplier

    def function_of(self, f: np.ndarray, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """fn(T_b) applied to f through the spectral calculus."""
        return self.from_modal(fn(self.modal_eigenvalues) * self.to_modal(f))


def build_operator(bg: BackgroundState, params: PhysParams, backend: str = "dense_eigen",
                   *, approximate: bool = False) -> AcousticOperator:
    """Assemble T_b.

    ``dense_eigen`` diagonalizes the full matrix (total points <= 16384).
    ``constant_coeff_fourier`` uses the multiplier p'(b)|k|^2 and requires
    constant b, unless ``approximate`` is set, in which case the far-field
    value rho_bar stands in for b.
    """
    g = bg.grid
    b = bg.b
    pp = params.dpressure(b)
    weight = b / pp
    if backend == "dense_eigen":
        if g.npoints > DENSE_LIMIT:
            raise AcousticError(f"dense backend limited to {DENSE_LIMIT} points, grid has {g.npoints}")
        mats = derivative_matrices(g)
        bf = b.ravel()
        K = sum(-Dm @ (bf[:, None] * Dm) for Dm in mats)  # g * T_b, symmetric
        K = 0.5 * (K + K.T)
        gs = np.sqrt(weight.ravel())
        S = K / gs[:, None] / gs[None, :]
        lam, Q = np.linalg.eigh(S)
        lam = np.where(lam < 0, 0.0, lam)
        vecs = Q / gs[:, None] / np.sqrt(g.cell_volume)
        return AcousticOperator(g, b, pp, weight, backend, eigenvalues=lam, eigenvectors=vecs)
    if backend == "constant_coeff_fourier":
        if bg.is_constant:
            bref = float(np.mean(b))
        elif approximate:
            bref = bg.rho_bar
        else:
            raise AcousticError("Fourier backend requires constant b (pass approximate=True to use rho_bar)")
        const_b = np.full(g.shape, bref)
        pp_c = params.dpressure(const_b)
        mult = float(params.dpressure(bref)) * g.k2_deriv
        return AcousticOperator(g, const_b, pp_c, const_b / pp_c, backend, multiplier=mult)
    raise AcousticError(f"unknown backend {backend!r}")


# -- regularization ----------------------------------------------------


def frequency_window(z, delta: float):
    """Even window: 1 on [delta, 1/delta], 0 on [0, delta/2] and beyond 2/delta."""
    return plateau(np.abs(z), delta / 2, delta, 1 / delta, 2 / delta)


def spatial_mask(grid: Grid, delta: float, center=None) -> np.ndarray:
    """1 within radius 1/delta of the center, 0 beyond 2/delta."""
    r = grid.radius(center)
    return 1.0 - smoothstep((r - 1 / delta) / (1 / delta))


@dataclass(frozen=True, eq=False)
class CutoffPair:
    delta: float
    psi: np.ndarray

    def M(self, z):
        return frequency_window(z, self.delta)

    @property
    def support_radius(self) -> float:
        return 2.0 / self.delta


def make_cutoff(grid: Grid, delta: float, center=None) -> CutoffPair:
    if not 0 < delta < 1:
        raise AcousticError("delta must lie in (0, 1)")
    return CutoffPair(float(delta), spatial_mask(grid, delta, center))


def regularize(f: np.ndarray, op: AcousticOperator, cut: CutoffPair) -> np.ndarray:
    """[f]_delta = M_delta(sqrt(T_b)) [psi_delta f]."""
    return op.function_of(cut.psi * f, lambda lam: cut.M(np.sqrt(lam)))


# -- states and evolution ---------------------------------------------


@dataclass(frozen=True, eq=False)
class AcousticState:
    time: float
    s: np.ndarray
    Phi: np.ndarray
    epsilon: float
    delta: float | None = None


def acoustic_initial_data(bg: BackgroundState, phi0: np.ndarray, u0: np.ndarray, params: PhysParams,
                          cut: CutoffPair, op: AcousticOperator) -> AcousticState:
    """Regularized data: s0 = (b/p'(b)) [(p'(b)/b) phi0]_delta, Phi0 = [Phi_{0,eps}]_delta
    with grad Phi_{0,eps} = Q_b[b u0] / b."""
    b = bg.b
    ddP = params.ddpotential(b)
    q0 = regularize(ddP * phi0, op, cut)
    potential = decompose(b * u0, b, bg.grid).potential
    Phi0 = regularize(potential, op, cut)
    return AcousticState(0.0, q0 / ddP, Phi0, params.epsilon, cut.delta)


def evolve(state: AcousticState, op: AcousticOperator, T: float, params: PhysParams) -> AcousticState:
    """Exact evolution by time T (mode-wise rotation)."""
    ddP = params.ddpotential(op.b)
    eps = state.epsilon
    q = op.to_modal(ddP * state.s)
    phi = op.to_modal(state.Phi)
    lam = op.modal_eigenvalues
    root = np.sqrt(lam)
    theta = root * T / eps
    c, s = np.cos(theta), np.sin(theta)
    # sin(theta)/sqrt(lam) written through sinc so lam = 0 gives the linear drift
    s_over_root = (T / eps) * np.sinc(theta / np.pi)
    q_new = c * q + root * s * phi
    phi_new = c * phi - s_over_root * q
    return replace(state, time=state.time + T, s=op.from_modal(q_new) / ddP, Phi=op.from_modal(phi_new))


def acoustic_energy(state: AcousticState, bg: BackgroundState, params: PhysParams | None = None) -> float:
    """Integral of b|grad Phi|^2 + P''(b) s^2."""
    p = bg.params if params is None else params
    g = bg.grid
    gp = g.gradient(state.Phi)
    return float(g.integrate(bg.b * np.sum(gp * gp, axis=0) + p.ddpotential(bg.b) * state.s**2))


def sample_trajectory(state: AcousticState, op: AcousticOperator, times, params: PhysParams) -> list[AcousticState]:
    """Exact states at the given absolute times (each evolved from ``state``)."""
    return [evolve(state, op, t - state.time, params) for t in times]


def horizon(bg: BackgroundState, params: PhysParams, epsilon: float, support_radius: float) -> float:
    """Time before waves leaving the data support wrap around the box."""
    reach = min(bg.grid.lengths) / 2 - support_radius
    if reach <= 0:
        return 0.0
    return epsilon * reach / float(np.sqrt(params.dpressure(bg.b_max)))


def fastest_period(op: AcousticOperator, cut: CutoffPair | None, epsilon: float) -> float:
    top = np.sqrt(op.max_eigenvalue)
    if cut is not None:
        top = min(top, 2.0 / cut.delta)
    return 2 * np.pi * epsilon / top if top > 0 else np.inf


def dispersion_decay_metric(times, states: list[AcousticState], grid: Grid, T: float, *,
                            period: float | None = None, horizon_time: float | None = None) -> float:
    """Time integral over [0, T] of sup|Phi| + sup|grad Phi| + sup|s| (trapezoid).

    ``period`` is the fastest active oscillation period; at least four
    samples per period are required.  ``horizon_time`` bounds T.
    """
    times = np.asarray(times, dtype=float)
    if horizon_time is not None and T > horizon_time * (1 + 1e-12):
        raise AcousticError(f"window T={T:.4g} exceeds wrap-around horizon {horizon_time:.4g}")
    if len(times) < 2:
        raise AcousticError("need at least two samples")
    if times[0] > 1e-14 or times[-1] < T * (1 - 1e-12):
        raise AcousticError("samples must cover [0, T]")
    if period is not None and np.max(np.diff(times)) > period / 4:
        raise AcousticError("undersampled trajectory: fewer than 4 samples per fastest period")
    vals = []
    for st in states:
        gp = grid.gradient(st.Phi)
        vals.append(np.max(np.abs(st.Phi)) + np.max(np.sqrt(np.sum(gp * gp, axis=0))) + np.max(np.abs(st.s)))
    vals = np.asarray(vals)
    keep = times <= T * (1 + 1e-12)
    return float(np.trapezoid(vals[keep], times[keep]))
