"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line with the observed values, the
thresholds and the runtime budget; the lines are repeated in the pytest
terminal summary.
"""

import time

import numpy as np
from scipy.integrate import simpson

from anelastic_lab import PhysParams, decompose, default_config, make_grid, project_b, solve_background
from anelastic_lab import acoustic as ac
from anelastic_lab import anelastic as an
from anelastic_lab import compressible as cs
from anelastic_lab.entropy import TestState, kappa_entropy, relative_entropy
from anelastic_lab.harness.sweeps import dispersion_for, run_ill_prepared_sweep, run_well_prepared_sweep
from anelastic_lab.templates import random_bandlimited, scalar_template


class Criterion:
    """Collects (label, observed, limit, ok) checks and a wall-clock budget."""

    def __init__(self, log, number, title, budget_s):
        self.log, self.number, self.title, self.budget = log, number, title, budget_s
        self.checks = []

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def le(self, label, observed, limit):
        self.checks.append((f"{label}={observed:.3g}<={limit:g}", bool(observed <= limit)))

    def ge(self, label, observed, limit):
        self.checks.append((f"{label}={observed:.3g}>={limit:g}", bool(observed >= limit)))

    def flag(self, label, ok):
        self.checks.append((f"{label}={'yes' if ok else 'no'}", bool(ok)))

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        if exc_type is not None:
            self.checks.append((f"error={exc_type.__name__}: {exc}", False))
        self.checks.append((f"runtime={elapsed:.1f}s<{self.budget:g}s", elapsed < self.budget))
        ok = all(c[1] for c in self.checks)
        bad = [c[0] for c in self.checks if not c[1]]
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {self.number} {self.title}: " + "; ".join(
            c[0] for c in self.checks)
        self.log.append(line)
        print(line)
        if exc_type is None:
            assert ok, f"criterion {self.number} failed: {bad}"
        return False


def weight(g, lo, hi, seed):
    f = random_bandlimited(g, 3, seed=seed)
    return lo + (hi - lo) * (f - f.min()) / (f.max() - f.min())


def test_criterion_01_spectral_layer(acceptance_log):
    with Criterion(acceptance_log, 1, "spectral layer", 1.0) as c:
        g = make_grid(1, 64)
        x = g.coords[0]
        c.le("d/dx sin(3x) sup err", float(np.max(np.abs(g.gradient(np.sin(3 * x))[0] - 3 * np.cos(3 * x)))), 1e-12)
        g2 = make_grid(2, 64)
        f = np.random.default_rng(0).standard_normal(g2.shape)
        c.le("parseval rel err", abs(g2.spectral_l2_norm(g2.fft(f)) / g2.l2_norm(f) - 1), 1e-12)
        # direct convolution of the retained Fourier coefficients
        n, top = 16, 16 // 3
        h = make_grid(1, n)
        xs = h.coords[0]
        rng = np.random.default_rng(1)
        A, B = (rng.standard_normal(top + 1) + 1j * rng.standard_normal(top + 1) for _ in range(2))
        A[0], B[0] = A[0].real, B[0].real

        def field(C):
            return np.real(C[0] + 2 * sum(C[m] * np.exp(1j * m * xs) for m in range(1, top + 1)))

        full = lambda C: {m: (C[m] if m >= 0 else np.conj(C[-m])) for m in range(-top, top + 1)}  # noqa: E731
        Fa, Fb = full(A), full(B)
        prod = {}
        for p in Fa:
            for q in Fb:
                prod[p + q] = prod.get(p + q, 0) + Fa[p] * Fb[q]
        exact = np.real(sum(prod[m] * np.exp(1j * m * xs) for m in prod if abs(m) <= top))
        c.le("dealias oracle err", float(np.max(np.abs(h.dealias(field(A) * field(B)) - exact))), 1e-12)


def test_criterion_02_background(acceptance_log):
    with Criterion(acceptance_log, 2, "background", 5.0) as c:
        g = make_grid(1, 1024, 16 * np.pi)
        G = scalar_template(g, "bump", 0.3, radius=10.0)
        bg = solve_background(G, g, PhysParams(a=0.5, gamma=2.0), "far_field", 1.0)
        c.le("closed form err", float(np.max(np.abs(bg.b - (1 + G)))), 1e-12)
        g64 = make_grid(2, 64)
        worst = 0.0
        for gamma in (1.4, 5 / 3, 3.0):
            b = solve_background(scalar_template(g64, "cosine", 0.2), g64, PhysParams(a=1.0, gamma=gamma), "mean")
            worst = max(worst, b.residual())
        c.le("general-gamma residual", worst, 1e-6)
        p = PhysParams(epsilon=0.1)
        bgs = solve_background(scalar_template(g64, "cosine", 0.2), g64, p, "mean")
        st = cs.CompressibleState(0.0, bgs.b.copy(), g64.zeros_vector(), p, bgs)
        dt = cs.cfl_dt(st)
        for _ in range(100):
            st = cs.step_rk4(st, dt, check_cfl=False)
        drift = max(float(np.max(np.abs(st.rho - bgs.b))) / bgs.b_max, float(np.max(np.abs(st.momentum))))
        c.le("steady state drift (100 steps)", drift, 1e-12)


def test_criterion_03_weighted_helmholtz(acceptance_log):
    with Criterion(acceptance_log, 3, "weighted Helmholtz", 5.0) as c:
        g = make_grid(2, 64)
        b = weight(g, 0.5, 2.0, seed=0)
        z = random_bandlimited(g, 6, seed=3, components=2)
        res = decompose(z, b, g)
        scale = float(np.max(np.abs(z)))
        c.le("div residual", float(np.max(np.abs(g.divergence(res.solenoidal)))) / scale, 1e-10)
        orth = abs(g.integrate(np.sum(res.solenoidal * res.gradient_part, axis=0) / b)) / g.l2_norm(z) ** 2
        c.le("weighted orthogonality", orth, 1e-10)
        idem = float(np.max(np.abs(project_b(res.solenoidal, b, g) - res.solenoidal))) / scale
        c.le("idempotence", idem, 1e-10)
        leray = float(np.max(np.abs(project_b(z, np.ones(g.shape), g) - g.leray_project(z))))
        c.le("b=1 vs Leray", leray, 1e-12)


def test_criterion_04_acoustic(acceptance_log):
    with Criterion(acceptance_log, 4, "acoustic waves", 60.0) as c:
        p = PhysParams()
        line = make_grid(1, 256, 16 * np.pi)
        square = make_grid(2, 48)
        setups = [
            solve_background(scalar_template(line, "bump", 0.3, radius=5.0), line, p, "far_field", 1.0),
            solve_background(scalar_template(square, "cosine", 0.2), square, p, "mean", 1.0),
        ]
        drift = adj = neg = grow = 0.0
        for bg in setups:
            g = bg.grid
            op = ac.build_operator(bg, p)
            eps = 0.1
            st0 = ac.AcousticState(0.0, random_bandlimited(g, 6, seed=5), random_bandlimited(g, 6, seed=6), eps)
            e0 = ac.acoustic_energy(st0, bg, p)
            crossing = eps * max(g.lengths) / np.sqrt(p.dpressure(bg.b_min))
            drift = max(drift, abs(ac.acoustic_energy(ac.evolve(st0, op, 10 * crossing, p), bg, p) - e0) / e0)
            f, h = random_bandlimited(g, 8, seed=1), random_bandlimited(g, 8, seed=2)
            norm = np.sqrt(op.inner(f, f) * op.inner(h, h))
            adj = max(adj, abs(op.inner(op.apply(f), h) - op.inner(f, op.apply(h))) / norm)
            neg = max(neg, -op.inner(op.apply(f), f) / op.inner(f, f))
            cut = ac.make_cutoff(g, 0.5)
            r = ac.regularize(f, op, cut)
            grow = max(grow, np.sqrt(op.inner(r, r)) - np.sqrt(op.inner(f, f)))
        c.le("energy drift (10 crossings)", drift, 1e-12)
        c.le("self-adjointness", adj, 1e-9)
        c.le("negativity", neg, 1e-9)
        c.le("window growth", grow, 1e-10)
        g = make_grid(1, 32)
        bg = solve_background(g.zeros(), g, PhysParams(a=1.0, gamma=2.0), "mean", 1.5)
        op = ac.build_operator(bg, bg.params)
        eps, k = 0.2, 3
        st0 = ac.AcousticState(0.0, np.cos(k * g.coords[0]), 0.3 * np.sin(k * g.coords[0]), eps)
        period = 2 * np.pi * eps / (np.sqrt(bg.params.dpressure(1.5)) * k)
        out = ac.evolve(st0, op, period, bg.params)
        c.le("period err", float(max(np.max(np.abs(out.s - st0.s)), np.max(np.abs(out.Phi - st0.Phi)))), 1e-11)


def test_criterion_05_dispersive_surrogate(acceptance_log):
    with Criterion(acceptance_log, 5, "dispersive surrogate", 60.0) as c:
        cfg = default_config("ill_prepared")
        g = cfg.grid()
        bg = cfg.background(g)
        op = ac.build_operator(bg, cfg.params())
        cut = ac.make_cutoff(g, 0.5)
        phi0, u0 = cfg.scalar(g, "phi0", 3), cfg.vector(g, "u0", 4)
        vals = []
        for eps in (0.4, 0.2, 0.1):
            params = cfg.params(eps)
            vals.append(dispersion_for(bg, op, cut, params, ac.acoustic_initial_data(bg, phi0, u0, params, cut, op)))
        ratios = [b / a for a, b in zip(vals, vals[1:])]
        c.flag("strictly decreasing " + ",".join(f"{v:.4g}" for v in vals), vals[0] > vals[1] > vals[2])
        c.le("max ratio", max(ratios), 0.75)


def test_criterion_06_anelastic(acceptance_log):
    with Criterion(acceptance_log, 6, "anelastic solver", 120.0) as c:
        g = make_grid(2, 64)
        flat = solve_background(g.zeros(), g, PhysParams(), "mean", 1.0)
        x, y = g.coords
        U0 = np.stack([np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y)])
        st, _ = an.advance_to(an.make_state(U0, flat, 0.01), 1.0)
        amp = np.exp(-0.02)
        c.le("Taylor-Green amplitude rel err", abs(float(np.max(np.abs(st.U[0]))) - amp) / amp, 1e-4)

        mu, T = 0.05, 0.5
        bg = solve_background(scalar_template(g, "cosine", 0.2), g, PhysParams(), "mean", 1.0)
        st = an.make_state(random_bandlimited(g, 3, seed=1, components=2), bg, mu)
        ts = np.linspace(0, T, 41)
        ke, diss, constraint = [an.kinetic_energy(st.U, bg)], [an.dissipation(st.U, bg, mu)], [st.constraint_residual()]
        for t in ts[1:]:
            st, _ = an.advance_to(st, t, compute_pressure=False)
            ke.append(an.kinetic_energy(st.U, bg))
            diss.append(an.dissipation(st.U, bg, mu))
            constraint.append(st.constraint_residual())
        c.le("energy identity residual per unit time", abs(ke[-1] - ke[0] + simpson(diss, x=ts)) / ke[0] / T, 1e-6)
        c.le("constraint", max(constraint), 1e-9)

        s0 = an.make_state(0.5 * random_bandlimited(g, 3, seed=8, components=2), bg, mu)
        span = 16 * an.cfl_dt(s0)

        def run(n):
            s = s0
            for _ in range(n):
                s = an.step(s, span / n, check_cfl=False, compute_pressure=False)
            return s.U

        ref = run(64)
        c.ge("temporal order", float(np.log2(np.max(np.abs(run(8) - ref)) / np.max(np.abs(run(16) - ref)))), 3.8)


def test_criterion_07_kappa_entropy_monitor(acceptance_log):
    with Criterion(acceptance_log, 7, "kappa-entropy monitor", 60.0) as c:
        g = make_grid(2, 64)
        p = PhysParams(epsilon=1.0)
        bg = solve_background(g.zeros(), g, p, "mean", 1.0)
        rho = 1 + 0.2 * random_bandlimited(g, 3, seed=15)
        st = cs.CompressibleState(0.0, rho, rho * 0.5 * random_bandlimited(g, 3, seed=16, components=2), p, bg)
        E = [kappa_entropy(st)]
        for t in np.linspace(0, 0.5, 51)[1:]:
            st, _ = cs.advance_to(st, t)
            E.append(kappa_entropy(st))
        c.le("max increment / E0", float(np.max(np.diff(E))) / E[0], 1e-8)


def test_criterion_08_well_prepared_sweep(acceptance_log):
    with Criterion(acceptance_log, 8, "well-prepared sweep", 600.0) as c:
        rep = run_well_prepared_sweep(default_config())
        vals = [v for _, v in rep.series()]
        c.flag("all members ok", all(r.status == "ok" for r in rep.rows))
        c.flag("sup_E strictly decreasing " + ",".join(f"{v:.4g}" for v in vals), rep.monotone())
        c.le("sup_E(0.05)/sup_E(0.4)", vals[-1] / vals[0], 0.25)


def test_criterion_09_ill_prepared_sweep(acceptance_log):
    with Criterion(acceptance_log, 9, "ill-prepared sweep", 600.0) as c:
        rep = run_ill_prepared_sweep(default_config("ill_prepared", deltas=(0.5,)))
        vals = [v for _, v in rep.series(0.5)]
        c.flag("local L2 strictly decreasing " + ",".join(f"{v:.4g}" for v in vals), rep.monotone(0.5))
        c.flag("positivity at eps=0.1", rep.rows[-1].status == "ok")


def test_criterion_10_oracle_micro_suite(acceptance_log):
    with Criterion(acceptance_log, 10, "oracle equivalence", 10.0) as c:
        g = make_grid(2, 64)
        p = PhysParams(epsilon=0.2)
        bg = solve_background(scalar_template(g, "cosine", 0.2), g, p, "mean", 1.0)
        rho = bg.b + 0.1 * random_bandlimited(g, 4, seed=3)
        u = random_bandlimited(g, 4, seed=4, components=2)
        st = cs.CompressibleState(0.0, rho, rho * u, p, bg)
        test = TestState(bg.b + 0.05 * random_bandlimited(g, 3, seed=10),
                         random_bandlimited(g, 3, seed=11, components=2),
                         random_bandlimited(g, 3, seed=12, components=2))
        # extended-precision pointwise assembly, written out from the definition
        L = np.longdouble
        R, r = rho.astype(L), test.r.astype(L)
        glr = g.gradient(np.log(rho)).astype(L)
        v = st.momentum.astype(L) / R + 2 * L(p.kappa) * L(p.mu) * glr
        w = 2 * np.sqrt(L(p.kappa) * (1 - L(p.kappa))) * L(p.mu) * glr
        a, gam = L(p.a), L(p.gamma)
        P = lambda q: a / (gam - 1) * q**gam  # noqa: E731
        dP = lambda q: a * gam / (gam - 1) * q ** (gam - 1)  # noqa: E731
        dens = 0.5 * R * (np.sum((v - test.V) ** 2, axis=0) + np.sum((w - test.W) ** 2, axis=0)) + (
            P(R) - P(r) - dP(r) * (R - r)) / L(p.epsilon) ** 2
        oracle = float(np.sum(dens) * L(g.cell_volume))
        c.le("relative entropy vs oracle (rel)", abs(relative_entropy(st, test).total - oracle) / oracle, 1e-12)
        tv = cs.two_velocity(st)
        c.le("u - (v - beta w)", float(np.max(np.abs(st.velocity - (tv.v - p.beta * tv.w)))), 1e-12)
        D, A = g.sym_antisym_grad(u)
        c.le("D + A - grad u", float(np.max(np.abs(D + A - g.grad_vector(u)))), 1e-12)

