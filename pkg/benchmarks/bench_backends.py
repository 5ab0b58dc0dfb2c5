"""Per-step timing of the field and oscillator kernels, per backend.

Usage::

    python benchmarks/bench_backends.py [--steps N] [--n GRID] [--stages S]

Times ``PdePlan.run`` / ``OdePlan.run`` for every available backend on the
canonical workload (mu=2^-6, c^2=2^-2, A'=1.2, dt=2^-4) and prints
microseconds per step plus the speedup of each backend over the slowest.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from kgphase.backends import available, set_backend
from kgphase.integrator import StepConfig, blowup_limit, gauss_scheme, state_to_spectra
from kgphase.model import critical_amplitude, make_params
from kgphase.spectral import GridSpec, initial_state


def bench_pde(backend, n, stages, steps):
    mu = 2.0**-6
    grid = GridSpec(n=n)
    scheme = gauss_scheme(stages=stages)
    cfg = StepConfig(dt=2.0**-4, scheme=scheme)
    params = make_params(alpha=-(2.0**-2), beta=1.0, mu=mu, L=1.0)
    state = initial_state(1.2 * critical_amplitude(mu), mu, grid)
    plan = backend.PdePlan(
        n=grid.n, factor=grid.dealias_factor, dt=cfg.dt,
        a=np.asarray(scheme.a), b=np.asarray(scheme.b),
        c_sq=params.c_sq, mu=mu, stage_tol=scheme.stage_tol,
        max_stage_iters=scheme.max_stage_iters, blowup_limit=blowup_limit(mu))
    uh, vh = state_to_spectra(state)
    plan.run(uh.copy(), vh.copy(), 0.0, 64)        # warm up
    t0 = time.perf_counter()
    out = plan.run(uh.copy(), vh.copy(), 0.0, steps)
    elapsed = time.perf_counter() - t0
    assert out[3] == 0, "benchmark run must complete"
    return elapsed / steps


def bench_ode(backend, stages, steps):
    mu = 1.0
    scheme = gauss_scheme(stages=stages)
    plan = backend.OdePlan(
        dt=2.0**-4, a=np.asarray(scheme.a), b=np.asarray(scheme.b),
        mu=mu, stage_tol=scheme.stage_tol,
        max_stage_iters=scheme.max_stage_iters, blowup_limit=blowup_limit(mu))
    u0 = 0.2 + mu**0.5
    plan.run(u0, 0.0, 0.0, 64)                     # warm up
    t0 = time.perf_counter()
    out = plan.run(u0, 0.0, 0.0, steps)
    elapsed = time.perf_counter() - t0
    assert out[3] == 0, "benchmark run must complete"
    return elapsed / steps


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=4096)
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--stages", type=int, default=2, choices=(2, 3))
    args = ap.parse_args(argv)

    names = available()
    rows = []
    for name in names:
        backend = set_backend(name)
        pde = bench_pde(backend, args.n, args.stages, args.steps)
        ode = bench_ode(backend, args.stages, args.steps * 8)
        rows.append((name, pde, ode))

    pde_ref = max(r[1] for r in rows)
    ode_ref = max(r[2] for r in rows)
    print(f"kernel step timings (n={args.n}, stages={args.stages}, "
          f"{args.steps} steps)")
    print(f"{'backend':<10} {'pde us/step':>12} {'speedup':>8} "
          f"{'ode us/step':>12} {'speedup':>8}")
    for name, pde, ode in rows:
        print(f"{name:<10} {pde * 1e6:>12.2f} {pde_ref / pde:>7.1f}x "
              f"{ode * 1e6:>12.2f} {ode_ref / ode:>7.1f}x")


if __name__ == "__main__":
    main()
