"""
Weighted Helmholtz decomposition z = P_b[z] + b grad(Phi), div P_b[z] = 0.

Phi solves div(b grad Phi) = div z on the torus (zero-mean gauge).  The
variable-coefficient problem is solved by a fixed-point iteration
preconditioned with the constant-coefficient inverse Laplacian; a
matrix-free conjugate-gradient solve is the fallback when the iteration
stalls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import linalg as spla

from .grid import Grid


class HelmholtzError(RuntimeError):
    pass


@dataclass(eq=False)
class HelmholtzResult:
    solenoidal: np.ndarray
    gradient_part: np.ndarray
    potential: np.ndarray
    iterations: int = 0
    contraction: float = 0.0
    method: str = "fixed_point"


def _reference_weight(b: np.ndarray) -> float:
    # midrange: the iteration contracts by (bmax-bmin)/(bmax+bmin) < 1
    return 0.5 * (float(np.max(b)) + float(np.min(b)))


def _solve_fixed_point(div_z, b, grid, tol, max_iter, phi0):
    bref = _reference_weight(b)
    bp = b - bref
    phi = grid.zeros() if phi0 is None else phi0 - np.mean(phi0)
    if not np.any(bp):
        phi = grid.inverse_laplacian(div_z) / bref
        return phi, 1, 0.0, True
    diffs = []
    for it in range(1, max_iter + 1):
        rhs = div_z - grid.divergence(bp * grid.gradient(phi))
        new = grid.inverse_laplacian(rhs) / bref
        diff = float(np.max(np.abs(new - phi)))
        phi = new
        diffs.append(diff)
        if diff <= tol:
            rate = diffs[-1] / diffs[-2] if len(diffs) > 1 and diffs[-2] > 0 else 0.0
            return phi, it, rate, True
    rate = diffs[-1] / diffs[-2] if len(diffs) > 1 and diffs[-2] > 0 else float("nan")
    return phi, max_iter, rate, False


def _solve_cg(div_z, b, grid, tol):
    shape = grid.shape
    bref = _reference_weight(b)

    def apply(x):
        phi = x.reshape(shape)
        return (-grid.divergence(b * grid.gradient(phi))).ravel()

    def precond(x):
        return (-grid.inverse_laplacian(x.reshape(shape)) / bref).ravel()

    n = grid.npoints
    A = spla.LinearOperator((n, n), matvec=apply, dtype=float)
    M = spla.LinearOperator((n, n), matvec=precond, dtype=float)
    rhs = -div_z.ravel()
    phi, info = spla.cg(A, rhs, M=M, rtol=tol, atol=0.0, maxiter=10 * n)
    if info != 0:
        raise HelmholtzError(f"conjugate-gradient fallback failed (info={info})")
    phi = phi.reshape(shape)
    return phi - np.mean(phi)


def decompose(z: np.ndarray, b: np.ndarray, grid: Grid, *, tol: float = 1e-13,
              max_iter: int = 500, phi0: np.ndarray | None = None,
              fallback: bool = True) -> HelmholtzResult:
    """Split ``z`` into its b-solenoidal part and ``b grad Phi``.

    Convergence is declared when successive iterates of Phi differ by at most
    ``tol * max|z|`` in sup-norm.
    """
    if np.min(b) <= 0:
        raise HelmholtzError("weight b must be positive")
    div_z = grid.divergence(z)
    scale = max(float(np.max(np.abs(z))), 1e-300)
    phi, iters, rate, ok = _solve_fixed_point(div_z, b, grid, tol * scale, max_iter, phi0)
    method = "fixed_point"
    if not ok:
        if not fallback:
            raise HelmholtzError(
                f"fixed-point iteration did not converge in {max_iter} iterations "
                f"(observed contraction {rate:.3f})"
            )
        phi = _solve_cg(div_z, b, grid, 1e-14)
        method = "cg"
    q = b * grid.gradient(phi)
    return HelmholtzResult(z - q, q, phi, iters, rate, method)


def project_b(z: np.ndarray, b: np.ndarray, grid: Grid, **kw) -> np.ndarray:
    """P_b[z], the solenoidal part of the weighted decomposition."""
    return decompose(z, b, grid, **kw).solenoidal
