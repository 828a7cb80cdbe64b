"""
Ramps, bumps and named initial-data templates.

The smoothstep ramp is shared by the frequency window, the spatial mask of
the acoustic regularization and the essential/residual cutoff.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid


def smoothstep(t):
    """C1 cubic ramp 3t^2 - 2t^3 clamped to [0, 1]."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def plateau(z, rise_start, rise_end, fall_start, fall_end):
    """0 below rise_start, smoothstep up to 1 at rise_end, 1 until fall_start,
    smoothstep down to 0 at fall_end."""
    z = np.asarray(z, dtype=float)
    up = smoothstep((z - rise_start) / (rise_end - rise_start))
    down = 1.0 - smoothstep((z - fall_start) / (fall_end - fall_start))
    return up * down


def bump(r, radius):
    """C-infinity compactly supported bump, 1 at r = 0 and 0 for r >= radius."""
    r = np.asarray(r, dtype=float)
    x2 = (r / radius) ** 2
    out = np.zeros_like(x2)
    inside = x2 < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x2[inside]))
    return out


# -- scalar templates -------------------------------------------------


def scalar_template(grid: Grid, kind: str, amplitude: float = 1.0, *, radius: float = 1.0,
                    mode: int = 1, seed: int = 0) -> np.ndarray:
    """Named scalar field.

    kinds: zero, constant, cosine (product of cos(mode*x_i) scaled to the box),
    bump (centered C-infinity bump), gaussian, random (band-limited, zero mean).
    """
    if kind == "zero":
        return grid.zeros()
    if kind == "constant":
        return np.full(grid.shape, float(amplitude))
    if kind == "cosine":
        f = np.ones(grid.shape)
        for x, L in zip(grid.coords, grid.lengths):
            f = f * np.cos(2 * np.pi * mode * x / L)
        return amplitude * f
    if kind == "bump":
        return amplitude * bump(grid.radius(), radius)
    if kind == "gaussian":
        return amplitude * np.exp(-0.5 * (grid.radius() / radius) ** 2)
    if kind == "random":
        return amplitude * random_bandlimited(grid, mode_max=max(mode, 2), seed=seed)
    raise ValueError(f"unknown scalar template {kind!r}")


def random_bandlimited(grid: Grid, mode_max: int = 4, seed: int = 0, components: int | None = None) -> np.ndarray:
    """Zero-mean random field with integer modes |m_i| <= mode_max, sup-norm 1."""
    rng = np.random.default_rng(seed)
    ncomp = 1 if components is None else components
    out = []
    for _ in range(ncomp):
        fh = rng.standard_normal(grid.spectral_shape) + 1j * rng.standard_normal(grid.spectral_shape)
        mask = np.ones(grid.spectral_shape, dtype=bool)
        for kk, L in zip(grid.k, grid.lengths):
            mask &= np.abs(kk * L / (2 * np.pi)) <= mode_max
        fh = fh * mask
        fh.flat[0] = 0.0
        f = grid.ifft(fh)
        # round-trip once so the stored field is exactly Hermitian-consistent
        f = grid.ifft(grid.fft(f))
        out.append(f / np.max(np.abs(f)))
    return out[0] if components is None else np.stack(out)


# -- vector templates -------------------------------------------------


def vector_template(grid: Grid, kind: str, amplitude: float = 1.0, *, radius: float = 1.0,
                    mode: int = 1, seed: int = 0) -> np.ndarray:
    """Named vector field.

    kinds: zero, taylor_green (2D/3D), shear (u_0 = sin of the last axis),
    gradient_bump (gradient of a bump, pure potential flow), vortex_bump
    (rotated gradient of a bump, 2D), random (band-limited).
    """
    d = grid.dim
    if kind == "zero":
        return grid.zeros_vector()
    if kind == "taylor_green":
        if d < 2:
            raise ValueError("taylor_green needs dim >= 2")
        x = [2 * np.pi * mode * c / L for c, L in zip(grid.coords, grid.lengths)]
        u = grid.zeros_vector()
        if d == 2:
            u[0] = np.sin(x[0]) * np.cos(x[1])
            u[1] = -np.cos(x[0]) * np.sin(x[1])
        else:
            u[0] = np.sin(x[0]) * np.cos(x[1]) * np.cos(x[2])
            u[1] = -np.cos(x[0]) * np.sin(x[1]) * np.cos(x[2])
        return amplitude * u
    if kind == "shear":
        u = grid.zeros_vector()
        u[0] = np.sin(2 * np.pi * mode * grid.coords[-1] / grid.lengths[-1])
        return amplitude * u
    if kind == "gradient_bump":
        phi = bump(grid.radius(), radius)
        g = grid.gradient(phi)
        return amplitude * g / max(np.max(np.abs(g)), 1e-300)
    if kind == "vortex_bump":
        if d != 2:
            raise ValueError("vortex_bump needs dim == 2")
        g = grid.gradient(bump(grid.radius(), radius))
        u = np.stack([-g[1], g[0]])
        return amplitude * u / max(np.max(np.abs(u)), 1e-300)
    if kind == "random":
        return amplitude * random_bandlimited(grid, mode_max=max(mode, 2), seed=seed, components=d)
    raise ValueError(f"unknown vector template {kind!r}")
