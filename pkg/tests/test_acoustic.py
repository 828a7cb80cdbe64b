"""Acoustic operator, delta-regularization, exact evolution and the dispersion surrogate."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anelastic_lab import AcousticError, PhysParams, make_grid, solve_background
from anelastic_lab import acoustic as ac
from anelastic_lab.templates import random_bandlimited, scalar_template

UNIT = PhysParams(a=1.0, gamma=2.0)


def flat(g, params=UNIT, rho_bar=1.0):
    return solve_background(g.zeros(), g, params, "mean", rho_bar)


def full_k2(g):
    """|k|^2 over the full (not half) spectrum with Nyquist dropped, as a sorted list."""
    ks = []
    for n, L in zip(g.sizes, g.lengths):
        m = np.fft.fftfreq(n, 1.0 / n)
        ks.append(np.where(np.abs(m) == n // 2, 0.0, m * 2 * np.pi / L))
    mesh = np.meshgrid(*ks, indexing="ij")
    return np.sort(sum(k**2 for k in mesh).ravel())


@pytest.fixture(scope="module")
def line():
    """Variable b on the 1D proxy box: n = 256, L = 16 pi."""
    g = make_grid(1, 256, 16 * np.pi)
    p = PhysParams()
    bg = solve_background(scalar_template(g, "bump", 0.3, radius=5.0), g, p, "far_field", 1.0)
    return g, p, bg, ac.build_operator(bg, p)


@pytest.fixture(scope="module")
def square():
    g = make_grid(2, 48)
    p = PhysParams()
    bg = solve_background(scalar_template(g, "cosine", 0.2), g, p, "mean", 1.0)
    return g, p, bg, ac.build_operator(bg, p)


@pytest.fixture(params=["line", "square"])
def setup(request):
    return request.getfixturevalue(request.param)


class TestOperator:
    def test_constant_b_spectrum(self):
        g = make_grid(2, 12)
        op = ac.build_operator(flat(g), UNIT)
        assert np.max(np.abs(op.eigenvalues - 2 * full_k2(g))) < 1e-10 * op.max_eigenvalue

    def test_constants_in_kernel(self):
        g = make_grid(1, 32)
        op = ac.build_operator(flat(g), UNIT)
        one = np.ones(g.shape)
        assert np.max(np.abs(op.apply(one))) == 0
        c = op.to_modal(one)
        zero = op.eigenvalues < 1e-10
        assert np.max(np.abs(op.from_modal(np.where(zero, c, 0.0)) - one)) < 1e-12

    def test_eigen_invariants(self, setup):
        g, p, bg, op = setup
        assert np.all(op.eigenvalues >= 0) and np.all(np.diff(op.eigenvalues) >= 0)
        V = op.eigenvectors
        gram = V.T @ (g.cell_volume * op.weight.ravel()[:, None] * V)
        assert np.max(np.abs(gram - np.eye(g.npoints))) < 1e-10
        for j in (g.npoints // 3, g.npoints // 2, g.npoints - 1):
            phi = V[:, j].reshape(g.shape)
            rhs = op.eigenvalues[j] * phi
            assert np.max(np.abs(op.apply(phi) - rhs)) <= 1e-8 * np.max(np.abs(rhs))

    def test_self_adjoint_and_non_negative(self, setup):
        g, _, _, op = setup
        f, h = random_bandlimited(g, 6, seed=1), random_bandlimited(g, 6, seed=2)
        norm = np.sqrt(op.inner(f, f) * op.inner(h, h))
        assert abs(op.inner(op.apply(f), h) - op.inner(f, op.apply(h))) <= 1e-9 * norm
        assert op.inner(op.apply(f), f) >= -1e-10 * op.inner(f, f)

    def test_perturbative_consistency(self):
        g = make_grid(1, 64)
        p = UNIT
        ref = ac.build_operator(flat(g), p).eigenvalues
        # b = (G + C) / 2 here, so osc(b) = osc(G) / 2
        G = 1e-3 * np.cos(g.coords[0])
        bg = solve_background(G, g, p, "mean", 1.0)
        assert (bg.b_max - bg.b_min) == pytest.approx(1e-3, rel=0.05)
        lam = ac.build_operator(bg, p).eigenvalues
        nz = ref > 1e-8
        assert np.max(np.abs(lam[nz] - ref[nz]) / ref[nz]) <= 1e-2

    def test_size_limit(self):
        g = make_grid(2, 130)
        with pytest.raises(AcousticError, match="limited"):
            ac.build_operator(flat(g), UNIT)

    def test_fourier_requires_constant_b(self, line):
        g, p, bg, _ = line
        with pytest.raises(AcousticError, match="constant b"):
            ac.build_operator(bg, p, "constant_coeff_fourier")
        approx = ac.build_operator(bg, p, "constant_coeff_fourier", approximate=True)
        assert np.all(approx.b == bg.rho_bar)

    def test_fourier_matches_dense_for_constant_b(self):
        g = make_grid(1, 32)
        bg = flat(g)
        dense = ac.build_operator(bg, UNIT)
        fourier = ac.build_operator(bg, UNIT, "constant_coeff_fourier")
        f = random_bandlimited(g, 8, seed=3)
        sq = lambda lam: np.sqrt(lam)  # noqa: E731
        assert np.max(np.abs(dense.function_of(f, sq) - fourier.function_of(f, sq))) < 1e-10

    def test_unknown_backend(self, line):
        with pytest.raises(AcousticError):
            ac.build_operator(line[2], line[1], "chebyshev")


class TestCutoffs:
    @settings(max_examples=40, deadline=None)
    @given(delta=st.floats(0.05, 0.95), z=st.floats(0, 100))
    def test_window_shape(self, delta, z):
        w = ac.frequency_window(z, delta)
        assert 0 <= w <= 1
        assert w == ac.frequency_window(-z, delta)
        if delta <= z <= 1 / delta:
            assert w == 1
        if z <= delta / 2 or z >= 2 / delta:
            assert w == 0

    def test_spatial_mask(self):
        g = make_grid(1, 256, 16 * np.pi)
        cut = ac.make_cutoff(g, 0.5)
        r = g.radius()
        assert np.all(cut.psi[r < 2] == 1) and np.all(cut.psi[r > 4] == 0)
        assert np.all((0 <= cut.psi) & (cut.psi <= 1))

    @pytest.mark.parametrize("delta", [0.0, 1.0, -0.5])
    def test_delta_range(self, delta):
        with pytest.raises(AcousticError):
            ac.make_cutoff(make_grid(1, 16), delta)


class TestRegularize:
    def test_constant_killed(self):
        # psi = 1 on this box, so psi f stays constant and M(0) = 0 removes it
        g = make_grid(1, 32)
        bg = solve_background(scalar_template(g, "cosine", 0.2), g, UNIT, "mean", 1.0)
        cut = ac.make_cutoff(g, 0.3)
        assert np.all(cut.psi == 1)
        out = ac.regularize(np.full(g.shape, 3.0), ac.build_operator(bg, UNIT), cut)
        assert np.max(np.abs(out)) < 1e-10

    def test_pass_band_identity(self):
        # sqrt(lambda) = sqrt(2)|k| lies in [0.3, 1/0.3] for |k| <= 2; psi = 1 on the box
        g = make_grid(1, 32)
        op = ac.build_operator(flat(g), UNIT)
        cut = ac.make_cutoff(g, 0.3)
        assert np.all(cut.psi == 1)
        x = g.coords[0]
        f = np.sin(x) + 0.5 * np.cos(2 * x)
        assert np.max(np.abs(ac.regularize(f, op, cut) - f)) < 1e-10

    def test_single_eigenvector(self):
        g = make_grid(1, 32)
        bg = solve_background(scalar_template(g, "cosine", 0.2), g, UNIT, "mean", 1.0)
        op = ac.build_operator(bg, UNIT)
        cut = ac.make_cutoff(g, 0.3)
        j = int(np.argmin(np.abs(np.sqrt(op.eigenvalues) - 1.5)))
        phi = op.eigenvectors[:, j].reshape(g.shape)
        assert np.max(np.abs(ac.regularize(phi, op, cut) - phi)) < 1e-10

    def test_window_contraction(self, setup):
        g, _, _, op = setup
        cut = ac.make_cutoff(g, 0.5)
        f = random_bandlimited(g, 12, seed=4)
        r = ac.regularize(f, op, cut)
        assert np.sqrt(op.inner(r, r)) <= np.sqrt(op.inner(f, f)) + 1e-10


class TestInitialData:
    def test_well_prepared_data_carry_no_acoustics(self, line):
        g, p, bg, op = line
        u0 = np.stack([np.ones(g.shape) / bg.b])  # b u0 constant, so Q_b[b u0] = 0
        st0 = ac.acoustic_initial_data(bg, g.zeros(), u0, p, ac.make_cutoff(g, 0.5), op)
        assert np.max(np.abs(st0.s)) < 1e-12 and np.max(np.abs(st0.Phi)) < 1e-12

    def test_weights_cancel(self):
        g = make_grid(1, 32)
        op = ac.build_operator(flat(g), UNIT)
        phi0 = np.cos(2 * g.coords[0])
        st0 = ac.acoustic_initial_data(flat(g), phi0, g.zeros_vector(), UNIT, ac.make_cutoff(g, 0.3), op)
        assert np.max(np.abs(st0.s - phi0)) < 1e-10

    def test_regularized_energy_not_larger(self, line):
        g, p, bg, op = line
        phi0 = scalar_template(g, "bump", 1.0, radius=1.0)
        u0 = g.gradient(scalar_template(g, "bump", 0.5, radius=1.0))
        st0 = ac.acoustic_initial_data(bg, phi0, u0, p, ac.make_cutoff(g, 0.5), op)
        raw = ac.AcousticState(0.0, phi0, ac.decompose(bg.b * u0, bg.b, g).potential, p.epsilon)
        assert ac.acoustic_energy(st0, bg, p) <= ac.acoustic_energy(raw, bg, p)


class TestEvolve:
    def test_stationary_constant_potential(self, line):
        g, p, bg, op = line
        st0 = ac.AcousticState(0.0, g.zeros(), np.full(g.shape, 2.0), 0.1)
        out = ac.evolve(st0, op, 3.7, p)
        # roundoff leakage of the constant into rotating modes only
        assert np.max(np.abs(out.s)) < 1e-10 and np.max(np.abs(out.Phi - 2.0)) < 1e-9

    @pytest.mark.parametrize("k", [1, 3])
    def test_plane_wave_period(self, k):
        g = make_grid(1, 32)
        bg = flat(g, UNIT, 1.5)
        op = ac.build_operator(bg, UNIT)
        eps = 0.2
        x = g.coords[0]
        st0 = ac.AcousticState(0.0, np.cos(k * x), 0.3 * np.sin(k * x), eps)
        period = 2 * np.pi * eps / (np.sqrt(UNIT.dpressure(1.5)) * k)
        out = ac.evolve(st0, op, period, UNIT)
        assert np.max(np.abs(out.s - st0.s)) < 1e-11 and np.max(np.abs(out.Phi - st0.Phi)) < 1e-11

    def test_energy_conserved_over_crossings(self, setup):
        g, p, bg, op = setup
        st0 = ac.AcousticState(0.0, random_bandlimited(g, 6, seed=5), random_bandlimited(g, 6, seed=6), 0.1)
        e0 = ac.acoustic_energy(st0, bg, p)
        crossing = 0.1 * max(g.lengths) / np.sqrt(p.dpressure(bg.b_min))
        e1 = ac.acoustic_energy(ac.evolve(st0, op, 10 * crossing, p), bg, p)
        assert abs(e1 - e0) <= 1e-12 * e0

    def test_zero_mode_drift(self):
        g = make_grid(1, 16)
        bg = flat(g)
        op = ac.build_operator(bg, UNIT)
        st0 = ac.AcousticState(0.0, np.full(g.shape, 0.5), g.zeros(), 0.25)
        out = ac.evolve(st0, op, 1.0, UNIT)
        # eps dPhi/dt = -P''(b) s with P'' = 2
        assert np.max(np.abs(out.Phi + 2 * 0.5 / 0.25)) < 1e-12
        assert np.max(np.abs(out.s - 0.5)) < 1e-12


class TestEnergy:
    def test_zero(self, line):
        g, p, bg, _ = line
        assert ac.acoustic_energy(ac.AcousticState(0.0, g.zeros(), g.zeros(), 0.1), bg, p) == 0

    def test_sin(self):
        g = make_grid(1, 32)
        st0 = ac.AcousticState(0.0, np.sin(g.coords[0]), g.zeros(), 0.1)
        assert ac.acoustic_energy(st0, flat(g), UNIT) == pytest.approx(2 * np.pi, rel=1e-14)


class TestDispersion:
    @pytest.fixture
    def traj(self, line):
        g, p, bg, op = line
        cut = ac.make_cutoff(g, 0.5)
        phi0 = scalar_template(g, "bump", 1.0, radius=1.0)

        def run(eps, amp=1.0):
            pe = PhysParams(a=p.a, gamma=p.gamma, mu=p.mu, kappa=p.kappa, epsilon=eps)
            st0 = ac.acoustic_initial_data(bg, amp * phi0, g.zeros_vector(), pe, cut, op)
            T = 0.9 * ac.horizon(bg, pe, eps, cut.support_radius)
            period = ac.fastest_period(op, cut, eps)
            times = np.linspace(0, T, int(np.ceil(4 * T / period)) + 2)
            return times, ac.sample_trajectory(st0, op, times, pe), T, period

        return run

    def test_zero_state(self, line):
        g = line[0]
        states = [ac.AcousticState(t, g.zeros(), g.zeros(), 0.1) for t in (0.0, 1.0)]
        assert ac.dispersion_decay_metric([0.0, 1.0], states, g, 1.0) == 0

    def test_decreasing_in_eps(self, traj, line):
        vals = []
        for eps in (0.4, 0.2, 0.1):
            times, states, T, period = traj(eps)
            vals.append(ac.dispersion_decay_metric(times, states, line[0], T, period=period))
        assert vals[0] > vals[1] > vals[2]

    def test_homogeneous(self, traj, line):
        vals = []
        for amp in (1.0, 2.5):
            times, states, T, period = traj(0.2, amp)
            vals.append(ac.dispersion_decay_metric(times, states, line[0], T, period=period))
        assert vals[1] == pytest.approx(2.5 * vals[0], rel=1e-12)

    def test_undersampled(self, traj, line):
        times, states, T, period = traj(0.2)
        with pytest.raises(AcousticError, match="undersampled"):
            keep = np.linspace(0, len(times) - 1, 5).astype(int)
            ac.dispersion_decay_metric(times[keep], [states[i] for i in keep], line[0], T, period=period)

    def test_horizon_enforced(self, traj, line):
        times, states, T, period = traj(0.2)
        with pytest.raises(AcousticError, match="horizon"):
            ac.dispersion_decay_metric(times, states, line[0], T, horizon_time=T / 2)

