"""Command line entry point: ``anelastic-lab <subcommand> [--config PATH] [--out DIR]``.

Exit codes: 0 success, 2 acceptance-threshold failure, 1 error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import acoustic as ac
from . import anelastic as an
from .harness.config import ConfigError, RunConfig, default_config
from .harness.invariants import run_invariant_suite
from .harness.output import (emit_csv, emit_field_csv, emit_svg_plot, emit_trajectory_csv, sweep_series,
                             write_rows)
from .harness.sweeps import (anelastic_trajectory, run_ill_prepared_sweep, run_well_prepared_sweep, sample_times,
                             well_prepared_member)

log = logging.getLogger("anelastic_lab")

WELL_GATE = 0.25
EXIT_OK, EXIT_ERROR, EXIT_THRESHOLD = 0, 1, 2


def _say(args, msg):
    if not args.quiet:
        print(msg)


def _load(args, scenario) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else default_config(scenario)
    overrides = {}
    if cfg.scenario != scenario and scenario in ("well_prepared", "ill_prepared", "invariants"):
        overrides["scenario"] = scenario
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["output_dir"] = args.out
    return cfg.replace(**overrides) if overrides else cfg


def _outdir(cfg) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg.save(out / "config.json")
    return out


def cmd_background(args) -> int:
    cfg = _load(args, "single_run")
    out = _outdir(cfg)
    g = cfg.grid()
    bg = cfg.background(g)
    summary = dict(b_min=bg.b_min, b_max=bg.b_max, constant=bg.constant, residual=bg.residual(),
                   normalization=bg.normalization, config_hash=cfg.hash())
    (out / "background.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    emit_field_csv(out / "background.csv", g, {"b": bg.b, "G": bg.G, "grad_log_b": bg.grad_log_b})
    _say(args, f"b in [{bg.b_min:.6g}, {bg.b_max:.6g}], residual {summary['residual']:.3e}")
    return EXIT_OK


def cmd_run_compressible(args) -> int:
    cfg = _load(args, "single_run")
    out = _outdir(cfg)
    g = cfg.grid()
    bg = cfg.background(g)
    chi = cfg.scalar(g, "rho1", seed_offset=1)
    U0 = an.enforce_constraint(cfg.vector(g, "U0", seed_offset=2), bg)
    times = sample_times(cfg)
    states, _ = anelastic_trajectory(cfg, bg, U0, times)
    eps = cfg.epsilons[0]
    row, traj = well_prepared_member(cfg, eps, bg, chi, U0, states, times, keep_final=True)
    emit_trajectory_csv(traj, out / "trajectory.csv")
    if row.final is not None:
        emit_field_csv(out / "snapshot.csv", g, {"rho": row.final.rho, "m": row.final.momentum})
    if row.status != "ok":
        print(f"run failed: {row.reason}", file=sys.stderr)
        return EXIT_ERROR
    _say(args, f"eps={eps:g}: sup_E={row.sup_E:.6e} steps={row.steps}")
    return EXIT_OK


def cmd_run_anelastic(args) -> int:
    cfg = _load(args, "single_run")
    out = _outdir(cfg)
    g = cfg.grid()
    bg = cfg.background(g)
    U0 = an.enforce_constraint(cfg.vector(g, "U0", seed_offset=2), bg)
    states, steps = anelastic_trajectory(cfg, bg, U0, sample_times(cfg))
    rows = [dict(time=s.time, kinetic_energy=an.kinetic_energy(s.U, bg),
                 dissipation=an.dissipation(s.U, bg, cfg.mu), constraint=s.constraint_residual())
            for s in states]
    write_rows(out / "anelastic.csv", ("time", "kinetic_energy", "dissipation", "constraint"), rows)
    emit_field_csv(out / "snapshot.csv", g, {"U": states[-1].U, "Pi": states[-1].Pi})
    meta = dict(time=states[-1].time, pressure_gauge="zero_mean", steps=steps, config_hash=cfg.hash())
    (out / "anelastic.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    _say(args, f"anelastic: {steps} steps, final energy {rows[-1]['kinetic_energy']:.6e}")
    return EXIT_OK


def cmd_run_acoustic(args) -> int:
    cfg = _load(args, "single_run")
    out = _outdir(cfg)
    g = cfg.grid()
    bg = cfg.background(g)
    params = cfg.params(cfg.epsilons[0])
    op = ac.build_operator(bg, params, cfg.acoustic_backend,
                           approximate=cfg.acoustic_backend == "constant_coeff_fourier")
    cut = ac.make_cutoff(g, cfg.deltas[0])
    st0 = ac.acoustic_initial_data(bg, cfg.scalar(g, "phi0", 3), cfg.vector(g, "u0", 4), params, cut, op)
    times = sample_times(cfg)
    rows = []
    for st in ac.sample_trajectory(st0, op, times, params):
        gp = g.gradient(st.Phi)
        rows.append(dict(time=st.time, acoustic_energy=ac.acoustic_energy(st, bg, params),
                         sup_Phi=float(np.max(np.abs(st.Phi))),
                         sup_grad_Phi=float(np.max(np.sqrt(np.sum(gp * gp, axis=0)))),
                         sup_s=float(np.max(np.abs(st.s)))))
    write_rows(out / "acoustic.csv", ("time", "acoustic_energy", "sup_Phi", "sup_grad_Phi", "sup_s"), rows)
    e = [r["acoustic_energy"] for r in rows]
    drift = max(abs(x - e[0]) for x in e) / e[0] if e[0] > 0 else 0.0
    _say(args, f"acoustic: energy drift {drift:.3e} over {len(rows)} samples")
    return EXIT_OK


def _write_sweep(report, cfg, out, title):
    emit_csv(report, out / "sweep.csv")
    for (delta, eps), traj in report.trajectories.items():
        tag = f"eps{eps:g}" if delta is None else f"delta{delta:g}_eps{eps:g}"
        emit_trajectory_csv(traj, out / "trajectories" / f"{tag}.csv")
    emit_svg_plot(sweep_series(report), out / "sweep.svg", title=title, xlabel="epsilon",
                  ylabel=report.metric(), log=True, config_hash=cfg.hash())


def cmd_sweep_well(args) -> int:
    cfg = _load(args, "well_prepared")
    out = _outdir(cfg)
    report = run_well_prepared_sweep(cfg)
    _write_sweep(report, cfg, out, "well-prepared sweep")
    for r in report.rows:
        _say(args, f"eps={r.epsilon:<6g} sup_E={r.sup_E} status={r.status} {r.reason}")
    vals = [v for _, v in report.series()]
    ok = report.monotone()
    if ok and len(vals) > 1:
        ok = vals[-1] <= WELL_GATE * vals[0]
    _say(args, f"ratios {report.ratios()} -> {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_THRESHOLD


def cmd_sweep_ill(args) -> int:
    cfg = _load(args, "ill_prepared")
    out = _outdir(cfg)
    report = run_ill_prepared_sweep(cfg)
    _write_sweep(report, cfg, out, "ill-prepared sweep")
    ok = True
    for d in report.deltas():
        rows = [r for r in report.rows if r.delta == d]
        for r in rows:
            _say(args, f"delta={d:<5g} eps={r.epsilon:<6g} local_L2={r.local_L2} sup_E={r.sup_E} "
                       f"dispersion={r.dispersion} status={r.status} {r.reason}")
        good = report.monotone(d) and rows[-1].status == "ok"
        _say(args, f"delta={d:g}: local_L2 ratios {report.ratios(d)} -> {'PASS' if good else 'FAIL'}")
        ok = ok and good
    return EXIT_OK if ok else EXIT_THRESHOLD


def cmd_invariants(args) -> int:
    cfg = _load(args, "invariants")
    out = _outdir(cfg)
    table = run_invariant_suite(cfg, tol_scale=args.tol_scale)
    write_rows(out / "invariants.csv", ("name", "tolerance", "observed", "status"), table.results)
    for line in table.lines():
        _say(args, line)
    return EXIT_OK if table.ok else EXIT_THRESHOLD


COMMANDS = {
    "background": cmd_background,
    "run-compressible": cmd_run_compressible,
    "run-anelastic": cmd_run_anelastic,
    "run-acoustic": cmd_run_acoustic,
    "sweep-well": cmd_sweep_well,
    "sweep-ill": cmd_sweep_ill,
    "invariants": cmd_invariants,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anelastic-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat JSON run configuration")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help="seed override")
        p.add_argument("--quiet", action="store_true")
        if name == "invariants":
            p.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
