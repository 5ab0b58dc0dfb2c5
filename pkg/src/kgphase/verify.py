"""Named verification suites: measured quantities against required bounds.

Each suite returns a list of checks with the measured value, the bound, and
a pass flag; the CLI prints them one per line and the test suite asserts
them.  The suites are deliberately independent of each other's machinery:
the threshold suite leans on the closed-form energy criterion, the spectral
suite on grid refinement, the order suite on step-halving, and the
agreement suite on the scalar model as the small-coupling limit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classifier import classify_ode, classify_pde
from .integrator import StepConfig, gauss_scheme, integrate
from .model import critical_amplitude, make_params
from .ode import ode_integrate
from .spectral import GridSpec, initial_state

__all__ = ["Check", "SUITES", "run_suite", "suite_names"]


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    required: float
    comparison: str  # "<=" or ">="
    passed: bool
    detail: str = ""

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        extra = f"  [{self.detail}]" if self.detail else ""
        return (f"{self.name}: measured {self.measured:.6g} "
                f"(required {self.comparison} {self.required:g}) {verdict}{extra}")


def _check(name, measured, required, comparison, detail=""):
    ok = measured <= required if comparison == "<=" else measured >= required
    return Check(name=name, measured=float(measured), required=float(required),
                 comparison=comparison, passed=bool(ok), detail=detail)


def suite_energy() -> list:
    """Relative energy drift of a long field run stays within 1e-7."""
    params = make_params(alpha=-0.25, beta=1.0, mu=1.0, L=1.0)
    grid = GridSpec(n=64)
    state0 = initial_state(0.1, 1.0, grid)
    out = classify_pde(state0, params, StepConfig(dt=2.0**-4), 1000.0, grid=grid)
    detail = f"status {out.status}, t_final {out.t_final:g}"
    return [_check("energy drift (t <= 1000)", out.energy_drift, 1e-7, "<=", detail)]


def _order_estimate(stages: int, dts) -> float:
    """Self-convergence order from three step sizes on the scalar model."""
    ends = [ode_integrate(0.2, 1.0, 10.0, dt, scheme=gauss_scheme(stages)).u
            for dt in dts]
    e01 = abs(ends[0] - ends[1])
    e12 = abs(ends[1] - ends[2])
    return math.log2(e01 / e12)


def suite_order() -> list:
    """Observed temporal order of the 2- and 3-stage schemes."""
    checks = []
    p2 = _order_estimate(2, (2.0**-2, 2.0**-3, 2.0**-4))
    checks.append(_check("2-stage observed order", p2, 3.7, ">=",
                         "step-halving on the scalar model, t=10"))
    p3 = _order_estimate(3, (2.0**-1, 2.0**-2, 2.0**-3))
    checks.append(_check("3-stage observed order", p3, 5.5, ">=",
                         "step-halving on the scalar model, t=10"))
    return checks


def suite_spectral() -> list:
    """Grid refinement 64 -> 256 leaves the t=1 end state unchanged to 1e-9."""
    params = make_params(alpha=-0.25, beta=1.0, mu=1.0, L=1.0)
    cfg = StepConfig(dt=2.0**-6)
    ends = {}
    for n in (64, 256):
        grid = GridSpec(n=n)
        state = integrate(initial_state(0.1, 1.0, grid), 1.0, cfg, params, grid=grid)
        ends[n] = state
    stride = 256 // 64
    err = max(
        float(np.max(np.abs(ends[64].u - ends[256].u[::stride]))),
        float(np.max(np.abs(ends[64].v - ends[256].v[::stride]))),
    )
    return [_check("end-state difference n=64 vs n=256", err, 1e-9, "<=",
                   "max-norm on the shared grid points, t=1")]


def threshold_estimate(mu: float, t_end: float = 4096.0, dt: float = 2.0**-4,
                       iters: int = 13) -> float:
    """Bisection on A between confined and crossing scalar runs."""
    lo, hi = 0.0, math.sqrt(mu)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if classify_ode(mid, mu, dt, t_end).crossed:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def suite_ode_threshold() -> list:
    """The classified confinement boundary matches (sqrt(2)-1) sqrt(mu)."""
    checks = []
    for mu in (2.0**-6, 2.0**-2, 1.0, 2.0):
        est = threshold_estimate(mu)
        crit = critical_amplitude(mu)
        rel = abs(est - crit) / crit
        checks.append(_check(f"threshold relative error, mu={mu:g}", rel,
                             1e-3, "<=", f"estimate {est:.6g}, exact {crit:.6g}"))
    return checks


def suite_pde_ode_agreement() -> list:
    """With -alpha = 2**-20 the field classification equals the scalar one."""
    checks = []
    alpha = -(2.0**-20)
    grid = GridSpec(n=64)
    cfg = StepConfig(dt=2.0**-4)
    t_end = 2048.0
    for mu in (2.0**-6, 2.0**-2, 1.0, 2.0):
        for a_prime in (0.5, 2.0):
            A = a_prime * critical_amplitude(mu)
            params = make_params(alpha=alpha, beta=1.0, mu=mu, L=1.0)
            pde = classify_pde(initial_state(A, mu, grid), params, cfg, t_end,
                               grid=grid)
            ode = classify_ode(A, mu, cfg.dt, t_end)
            agree = (not pde.failed and not ode.failed
                     and pde.classification == ode.classification)
            checks.append(Check(
                name=f"classification agreement, mu={mu:g}, A'={a_prime:g}",
                measured=1.0 if agree else 0.0, required=1.0, comparison=">=",
                passed=agree,
                detail=f"field {pde.classification}/{pde.status}, "
                       f"scalar {ode.classification}/{ode.status}"))
    return checks


SUITES = {
    "energy": suite_energy,
    "order": suite_order,
    "spectral": suite_spectral,
    "ode-threshold": suite_ode_threshold,
    "pde-ode-agreement": suite_pde_ode_agreement,
}


def suite_names() -> list:
    return sorted(SUITES)


def run_suite(name: str):
    """Run one named suite; returns (all_passed, checks)."""
    try:
        fn = SUITES[name]
    except KeyError:
        raise KeyError(f"unknown suite {name!r}; choose from {suite_names()}")
    checks = fn()
    return all(c.passed for c in checks), checks
