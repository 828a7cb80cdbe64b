"""
Periodic spectral grids.

Fields are plain numpy arrays: a scalar field has shape ``grid.shape``, a
vector field ``(dim, *grid.shape)`` and a tensor field
``(dim, dim, *grid.shape)``.  The tensor convention for the velocity
gradient is ``grad_u[i, j] = d u_i / d x_j``.

Transforms are real-to-half-spectrum (``rfftn`` over the spatial axes).
The derivative symbol zeroes the Nyquist wavenumber on every axis, so the
discrete derivative is a real skew-symmetric operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft as sfft


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on ``[0, L_1) x ... x [0, L_d)``."""

    dim: int
    sizes: tuple[int, ...]
    lengths: tuple[float, ...]

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise GridError(f"dim must be 1, 2 or 3, got {self.dim}")
        if len(self.sizes) != self.dim or len(self.lengths) != self.dim:
            raise GridError("sizes and lengths must have one entry per axis")
        for n in self.sizes:
            if n % 2 != 0:
                raise GridError(f"size must be even, got {n}")
            if n < 8:
                raise GridError(f"size must be >= 8, got {n}")
        for length in self.lengths:
            if not length > 0:
                raise GridError(f"lengths must be positive, got {length}")

    # -- geometry -------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.sizes)

    @property
    def npoints(self) -> int:
        return int(np.prod(self.sizes))

    @cached_property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.sizes))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def center(self) -> tuple[float, ...]:
        return tuple(L / 2 for L in self.lengths)

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(np.arange(n) * h for n, h in zip(self.sizes, self.spacing))

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Broadcast coordinate arrays, one per axis (``indexing='ij'``)."""
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    def radius(self, center=None) -> np.ndarray:
        """Euclidean distance from ``center`` (default: box center), no wrap."""
        c = self.center if center is None else center
        return np.sqrt(sum((x - ci) ** 2 for x, ci in zip(self.coords, c)))

    # -- wavenumbers ----------------------------------------------------

    def wavenumber_table(self, axis: int) -> np.ndarray:
        """Full-axis wavenumbers {0, +-1, ..., +-(n/2-1), n/2} * 2pi/L."""
        n = self.sizes[axis]
        m = np.fft.fftfreq(n, 1.0 / n)
        m[n // 2] = n // 2
        return m * (2 * np.pi / self.lengths[axis])

    @cached_property
    def _mode_index(self) -> tuple[np.ndarray, ...]:
        # integer mode numbers on the half-spectrum layout, broadcastable
        out = []
        for ax, n in enumerate(self.sizes):
            if ax == self.dim - 1:
                m = np.arange(n // 2 + 1, dtype=float)
            else:
                m = np.fft.fftfreq(n, 1.0 / n)
                m[n // 2] = n // 2
            shp = [1] * self.dim
            shp[ax] = m.size
            out.append(m.reshape(shp))
        return tuple(out)

    @cached_property
    def k(self) -> tuple[np.ndarray, ...]:
        """Wavenumbers on the half-spectrum layout (Nyquist kept)."""
        return tuple(m * (2 * np.pi / L) for m, L in zip(self._mode_index, self.lengths))

    @cached_property
    def k_deriv(self) -> tuple[np.ndarray, ...]:
        """Derivative symbol: wavenumbers with the Nyquist entry zeroed."""
        out = []
        for m, kk, n in zip(self._mode_index, self.k, self.sizes):
            out.append(np.where(np.abs(m) == n // 2, 0.0, kk))
        return tuple(out)

    @cached_property
    def k2(self) -> np.ndarray:
        return sum(kk**2 for kk in self.k)

    @cached_property
    def k2_deriv(self) -> np.ndarray:
        """Symbol of -div(grad), consistent with the discrete gradient."""
        return sum(kk**2 for kk in self.k_deriv)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        mask = np.ones(self.spectral_shape, dtype=bool)
        for m, n in zip(self._mode_index, self.sizes):
            mask = mask & (np.abs(m) <= n / 3)
        return mask

    @property
    def spectral_shape(self) -> tuple[int, ...]:
        return tuple(self.sizes[:-1]) + (self.sizes[-1] // 2 + 1,)

    @cached_property
    def _half_weights(self) -> np.ndarray:
        # multiplicity of each half-spectrum coefficient in the full spectrum
        n = self.sizes[-1]
        w = np.full(n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        shp = [1] * self.dim
        shp[-1] = w.size
        return w.reshape(shp)

    # -- transforms -----------------------------------------------------

    @property
    def _axes(self) -> tuple[int, ...]:
        return tuple(range(-self.dim, 0))

    def fft(self, f: np.ndarray) -> np.ndarray:
        return sfft.rfftn(f, axes=self._axes)

    def ifft(self, fh: np.ndarray) -> np.ndarray:
        return sfft.irfftn(fh, s=self.shape, axes=self._axes)

    # -- differential operators -----------------------------------------

    def gradient(self, f: np.ndarray) -> np.ndarray:
        fh = self.fft(f)
        return np.stack([self.ifft(1j * kk * fh) for kk in self.k_deriv])

    def divergence(self, v: np.ndarray) -> np.ndarray:
        vh = self.fft(v)
        return self.ifft(sum(1j * kk * vh[i] for i, kk in enumerate(self.k_deriv)))

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        """Spectral Laplacian -|k|^2 (Nyquist kept)."""
        return self.ifft(-self.k2 * self.fft(f))

    def grad_vector(self, u: np.ndarray) -> np.ndarray:
        """``out[i, j] = d u_i / d x_j``."""
        uh = self.fft(u)
        return np.stack(
            [np.stack([self.ifft(1j * kk * uh[i]) for kk in self.k_deriv]) for i in range(self.dim)]
        )

    def div_tensor(self, T: np.ndarray) -> np.ndarray:
        """Row-wise divergence: ``out[i] = sum_j d T_ij / d x_j``."""
        Th = self.fft(T)
        return np.stack(
            [self.ifft(sum(1j * kk * Th[i, j] for j, kk in enumerate(self.k_deriv))) for i in range(self.dim)]
        )

    def sym_antisym_grad(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return the symmetric and antisymmetric parts of ``grad u``."""
        g = self.grad_vector(u)
        gt = np.swapaxes(g, 0, 1)
        return 0.5 * (g + gt), 0.5 * (g - gt)

    def inverse_laplacian(self, f: np.ndarray) -> np.ndarray:
        """Zero-mean solution of div(grad phi) = f using the discrete symbol.

        Modes in the kernel of the discrete gradient (constant and Nyquist
        combinations) are set to zero.
        """
        fh = self.fft(f)
        k2 = self.k2_deriv
        out = np.zeros_like(fh)
        nz = k2 > 0
        out[nz] = -fh[nz] / k2[nz]
        return self.ifft(out)

    def leray_project(self, z: np.ndarray) -> np.ndarray:
        """Classical Fourier projection onto divergence-free fields."""
        zh = self.fft(z)
        k2 = self.k2_deriv
        kdotz = sum(kk * zh[i] for i, kk in enumerate(self.k_deriv))
        safe = np.where(k2 > 0, k2, 1.0)
        coef = np.where(k2 > 0, kdotz / safe, 0.0)
        return np.stack([self.ifft(zh[i] - kk * coef) for i, kk in enumerate(self.k_deriv)])

    # -- filters and quadrature ----------------------------------------

    def dealias(self, f: np.ndarray) -> np.ndarray:
        """2/3-rule truncation: zero every mode with some |k_i| > n_i/3."""
        return self.ifft(self.fft(f) * self.dealias_mask)

    def integrate(self, f: np.ndarray) -> float | np.ndarray:
        axes = self._axes
        return np.sum(f, axis=axes) * self.cell_volume

    def mean(self, f: np.ndarray) -> float:
        return float(np.mean(f))

    def l2_norm(self, f: np.ndarray) -> float:
        """Discrete L2 norm, summing over any leading component axes."""
        return float(np.sqrt(np.sum(f * f) * self.cell_volume))

    def spectral_l2_norm(self, fh: np.ndarray) -> float:
        """L2 norm evaluated from half-spectrum coefficients (Parseval)."""
        s = np.sum(self._half_weights * np.abs(fh) ** 2)
        return float(np.sqrt(s * self.cell_volume / self.npoints))

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def zeros_vector(self) -> np.ndarray:
        return np.zeros((self.dim,) + self.shape)


def make_grid(dim: int, sizes, lengths=None) -> Grid:
    """Build a validated grid; ``sizes`` may be a single int for all axes."""
    if np.isscalar(sizes):
        sizes = (int(sizes),) * dim
    if lengths is None:
        lengths = (2 * np.pi,) * dim
    elif np.isscalar(lengths):
        lengths = (float(lengths),) * dim
    return Grid(int(dim), tuple(int(n) for n in sizes), tuple(float(L) for L in lengths))
