"""Command-line surface: single runs, sweeps, diagram emission, verification.

Every command resolves its configuration fully (config file plus flag
overrides, flags winning) before any computation, and echoes the resolved
configuration into its output metadata so every artifact is reproducible
from its own sidecar.

Exit codes: 0 success, 1 usage/config error, 2 numerical or suite failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .backends import available, get_backend, set_backend
from .classifier import simulate_ode, simulate_pde
from .errors import KgPhaseError, NumericalBlowup, StageDivergence
from .integrator import StepConfig, gauss_scheme
from .model import critical_amplitude, make_params, normalized_amplitude
from .spectral import GridSpec, initial_state
from .sweep import (aggregate_journal, diagram_stats, mu_tag, plan_from_dict,
                    plan_to_dict, read_journal, run_sweep, write_diagram_csv,
                    write_diagram_gnuplot, write_diagram_meta, write_diagram_pgm)
from .verify import run_suite, suite_names

__all__ = ["main"]

SERIES_HEADER = "t,min_u,max_u,mean_u,energy,energy_drift"


class _UsageError(Exception):
    pass


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise _UsageError(f"config file not found: {path}")
    except (OSError, json.JSONDecodeError) as exc:
        raise _UsageError(f"cannot read config {path}: {exc}")


def _resolve(args, cfg: dict, key: str, default):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in cfg and cfg[key] is not None:
        return cfg[key]
    return default


def _resolve_alpha(args, cfg) -> float:
    """Either a negative alpha directly or an exponent e meaning -2**e."""
    if getattr(args, "alpha", None) is not None:
        return float(args.alpha)
    if getattr(args, "alpha_exp", None) is not None:
        return -(2.0 ** float(args.alpha_exp))
    if cfg.get("alpha") is not None and cfg.get("alpha_exp") is not None:
        raise _UsageError("config sets both alpha and alpha_exp")
    if cfg.get("alpha") is not None:
        return float(cfg["alpha"])
    if cfg.get("alpha_exp") is not None:
        return -(2.0 ** float(cfg["alpha_exp"]))
    return -0.25


def _resolve_amplitude(args, cfg, mu: float, default_A: float) -> float:
    """Either raw A or normalized A' (mutually exclusive)."""
    if getattr(args, "A", None) is not None:
        return float(args.A)
    if getattr(args, "A_prime", None) is not None:
        return float(args.A_prime) * critical_amplitude(mu)
    if cfg.get("A") is not None and cfg.get("A_prime") is not None:
        raise _UsageError("config sets both A and A_prime")
    if cfg.get("A") is not None:
        return float(cfg["A"])
    if cfg.get("A_prime") is not None:
        return float(cfg["A_prime"]) * critical_amplitude(mu)
    return default_A


def _write_series(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(SERIES_HEADER + "\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def _write_summary(path, outcome, config: dict, series_path) -> None:
    data = {
        "outcome": {
            "classification": outcome.classification,
            "first_crossing_time": outcome.first_crossing_time,
            "energy_drift": outcome.energy_drift,
            "t_final": outcome.t_final,
            "status": outcome.status,
            "steps": outcome.steps,
        },
        "config": config,
        "series": os.fspath(series_path),
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _scheme_from(args, cfg):
    return gauss_scheme(
        stages=int(_resolve(args, cfg, "stages", 2)),
        stage_tol=float(_resolve(args, cfg, "stage_tol", 1e-12)),
        max_stage_iters=int(_resolve(args, cfg, "max_stage_iters", 100)),
    )


def _cmd_simulate(args) -> int:
    cfg = _load_json(args.config) if args.config else {}
    mu = float(_resolve(args, cfg, "mu", 1.0))
    alpha = _resolve_alpha(args, cfg)
    beta = float(_resolve(args, cfg, "beta", 1.0))
    L = float(_resolve(args, cfg, "L", 1.0))
    A = _resolve_amplitude(args, cfg, mu, default_A=0.1)
    n = int(_resolve(args, cfg, "n", 64))
    factor = int(_resolve(args, cfg, "dealias_factor", 2))
    dt = float(_resolve(args, cfg, "dt", 2.0**-4))
    t_end = float(_resolve(args, cfg, "t_end", 16384.0))
    sample_every = int(_resolve(args, cfg, "sample_every", 16))
    out = str(_resolve(args, cfg, "out", "simulate"))

    params = make_params(alpha=alpha, beta=beta, mu=mu, L=L)
    grid = GridSpec(n=n, dealias_factor=factor)
    scheme = _scheme_from(args, cfg)
    step = StepConfig(dt=dt, scheme=scheme)
    state0 = initial_state(A, mu, grid)

    outcome, rows = simulate_pde(state0, params, step, t_end,
                                 sample_every=sample_every, grid=grid)
    resolved = {
        "command": "simulate", "mu": mu, "alpha": alpha, "beta": beta, "L": L,
        "c_sq": params.c_sq, "A": A, "A_prime": normalized_amplitude(A, mu),
        "n": n, "dealias_factor": factor, "dt": dt, "stages": scheme.stages,
        "stage_tol": scheme.stage_tol, "max_stage_iters": scheme.max_stage_iters,
        "t_end": t_end, "sample_every": sample_every,
        "backend": get_backend().NAME,
    }
    series_path = out + ".csv"
    _write_series(series_path, rows)
    _write_summary(out + ".json", outcome, resolved, series_path)
    print(f"{outcome.classification} ({outcome.status}), t_final {outcome.t_final:g}, "
          f"energy drift {outcome.energy_drift:.3e}; wrote {series_path}, {out}.json")
    return 2 if outcome.failed else 0


def _cmd_ode(args) -> int:
    cfg = _load_json(args.config) if args.config else {}
    mu = float(_resolve(args, cfg, "mu", 1.0))
    A = _resolve_amplitude(args, cfg, mu, default_A=0.1)
    dt = float(_resolve(args, cfg, "dt", 2.0**-4))
    t_end = float(_resolve(args, cfg, "t_end", 16384.0))
    sample_every = int(_resolve(args, cfg, "sample_every", 16))
    out = str(_resolve(args, cfg, "out", "ode"))
    scheme = _scheme_from(args, cfg)

    outcome, rows = simulate_ode(A, mu, dt, t_end, sample_every=sample_every,
                                 scheme=scheme)
    resolved = {
        "command": "ode", "mu": mu, "A": A,
        "A_prime": normalized_amplitude(A, mu),
        "critical_amplitude": critical_amplitude(mu),
        "dt": dt, "stages": scheme.stages, "stage_tol": scheme.stage_tol,
        "max_stage_iters": scheme.max_stage_iters, "t_end": t_end,
        "sample_every": sample_every, "backend": get_backend().NAME,
    }
    series_path = out + ".csv"
    _write_series(series_path, rows)
    _write_summary(out + ".json", outcome, resolved, series_path)
    print(f"critical_amplitude {critical_amplitude(mu):.6g}, "
          f"A' {normalized_amplitude(A, mu):.6g}")
    print(f"{outcome.classification} ({outcome.status}), t_final {outcome.t_final:g}, "
          f"energy drift {outcome.energy_drift:.3e}; wrote {series_path}, {out}.json")
    return 2 if outcome.failed else 0


def _emit_diagrams(diagrams, plan, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for d in diagrams:
        base = os.path.join(out_dir, f"diagram_mu_{mu_tag(d.mu)}")
        write_diagram_csv(d, base + ".csv")
        write_diagram_meta(d, plan, base + ".json",
                           extra={"backend": get_backend().NAME})
        write_diagram_pgm(d, base + ".pgm", mask_path=base + ".mask.pgm")
        write_diagram_gnuplot(d, base + ".gp.dat")


def _print_diagram_summary(diagrams) -> None:
    for d in diagrams:
        stats = diagram_stats(d)
        print(f"mu={d.mu:g}: valid {stats.valid_runs}, failed {stats.failed_runs}, "
              f"mixed pixels {stats.mixed_pixels}")
        for b in stats.boundaries:
            where = (f"A'={b.a_prime:.4g}" if b.a_prime is not None
                     else f"undefined ({b.reason})")
            print(f"  alpha_exp {b.alpha_exp:>4}: boundary {where}")


def _cmd_sweep(args) -> int:
    plan = plan_from_dict(_load_json(args.plan))
    out_dir = args.out_dir
    stem = os.path.splitext(os.path.basename(args.plan))[0]
    journal = args.journal or os.path.join(out_dir, stem + ".journal.csv")
    if os.path.exists(journal) and read_journal(journal) and not args.resume:
        raise _UsageError(
            f"journal {journal} already has records; pass --resume to continue")
    os.makedirs(out_dir, exist_ok=True)
    diagrams = run_sweep(plan, args.parallelism, journal, max_jobs=args.max_jobs)
    _emit_diagrams(diagrams, plan, out_dir)
    total_failed = sum(d.failures for d in diagrams)
    journaled = sum(int(s.valid_runs + s.failed_runs)
                    for s in map(diagram_stats, diagrams))
    remaining = plan.job_count - journaled
    print(f"jobs: {plan.job_count} planned, {journaled} journaled, "
          f"{remaining} remaining; journal {journal}")
    _print_diagram_summary(diagrams)
    return 2 if total_failed > 0 else 0


def _cmd_diagram(args) -> int:
    plan = plan_from_dict(_load_json(args.plan))
    rows = read_journal(args.journal)
    if not rows:
        raise _UsageError(f"journal {args.journal} has no records")
    diagrams = aggregate_journal(plan, rows)
    _emit_diagrams(diagrams, plan, args.out_dir)
    _print_diagram_summary(diagrams)
    return 0


def _cmd_verify(args) -> int:
    passed, checks = run_suite(args.suite)
    for c in checks:
        print(c.line())
    return 0 if passed else 2


def _add_amplitude_flags(p):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--A", type=float, help="initial amplitude A")
    group.add_argument("--A-prime", dest="A_prime", type=float,
                       help="amplitude in units of the confinement threshold")


def _add_scheme_flags(p):
    p.add_argument("--dt", type=float, help="time step (default 2**-4)")
    p.add_argument("--stages", type=int, choices=(2, 3),
                   help="Gauss stages: 2 (order 4) or 3 (order 6)")
    p.add_argument("--stage-tol", dest="stage_tol", type=float,
                   help="relative stage-iteration tolerance")
    p.add_argument("--max-stage-iters", dest="max_stage_iters", type=int,
                   help="stage-iteration budget per step")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgphase",
        description="Spectral field solver and phase-diagram sweeps for the "
                    "cubic wave model with sign-confinement classification.")
    parser.add_argument("--backend", choices=available(),
                        help="force an integration backend (default: compiled "
                             "when built, else pure)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one field trajectory")
    p.add_argument("--config", help="JSON config; flags override its keys")
    p.add_argument("--mu", type=float, help="potential parameter mu > 0")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--alpha", type=float, help="coupling alpha < 0")
    group.add_argument("--alpha-exp", dest="alpha_exp", type=float,
                       help="exponent e meaning alpha = -2**e")
    p.add_argument("--beta", type=float, help="beta > 0 (default 1)")
    p.add_argument("--L", type=float, help="domain scale L > 0 (default 1)")
    _add_amplitude_flags(p)
    p.add_argument("--n", type=int, help="grid points (power of two, default 64)")
    p.add_argument("--dealias-factor", dest="dealias_factor", type=int,
                   help="zero-padding factor for the cubic term (default 2)")
    _add_scheme_flags(p)
    p.add_argument("--t-end", dest="t_end", type=float,
                   help="end time (default 16384)")
    p.add_argument("--sample-every", dest="sample_every", type=int,
                   help="sample the series every k-th step (default 16)")
    p.add_argument("--out", help="output prefix (default 'simulate')")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("ode", help="integrate the reduced point model")
    p.add_argument("--config", help="JSON config; flags override its keys")
    p.add_argument("--mu", type=float, help="potential parameter mu > 0")
    _add_amplitude_flags(p)
    _add_scheme_flags(p)
    p.add_argument("--t-end", dest="t_end", type=float,
                   help="end time (default 16384)")
    p.add_argument("--sample-every", dest="sample_every", type=int,
                   help="sample the series every k-th step (default 16)")
    p.add_argument("--out", help="output prefix (default 'ode')")
    p.set_defaults(func=_cmd_ode)

    p = sub.add_parser("sweep", help="run a sweep plan and emit phase diagrams")
    p.add_argument("plan", help="JSON sweep plan")
    p.add_argument("--parallelism", type=int, default=1,
                   help="worker processes (default 1)")
    p.add_argument("--journal", help="journal CSV path "
                                     "(default <out-dir>/<plan>.journal.csv)")
    p.add_argument("--resume", action="store_true",
                   help="continue an existing journal instead of refusing")
    p.add_argument("--out-dir", dest="out_dir", default=".",
                   help="directory for diagrams (default .)")
    p.add_argument("--max-jobs", dest="max_jobs", type=int,
                   help="run at most this many pending jobs, then aggregate "
                        "(operational/testing knob)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("diagram", help="re-aggregate a journal into diagrams")
    p.add_argument("plan", help="JSON sweep plan the journal belongs to")
    p.add_argument("--journal", required=True, help="journal CSV to aggregate")
    p.add_argument("--out-dir", dest="out_dir", default=".",
                   help="directory for diagrams (default .)")
    p.set_defaults(func=_cmd_diagram)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("suite", choices=suite_names())
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; this CLI reserves 2 for numerical
        # failures and reports usage problems as 1 (0 stays 0, e.g. --help).
        code = exc.code if isinstance(exc.code, int) else 1
        return 1 if code == 2 else code
    try:
        if args.backend:
            set_backend(args.backend)
        return args.func(args)
    except (StageDivergence, NumericalBlowup) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (_UsageError, KgPhaseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
