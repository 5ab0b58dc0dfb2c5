"""Trajectory classification: sign-confined oscillation versus zero crossing.

A run starts strictly positive (u(x,0) = A sin(2 pi x) + sqrt(mu) with
A < sqrt(mu)).  It is *confined* if the grid minimum of u stays nonnegative
up to t_end, and *crossing* as soon as the minimum dips below zero; the
crossing check runs after every accepted step and stops the run early.
Numerical health is monitored alongside: the maximum relative energy drift
is recorded, and a run that trips the blow-up guard or fails the stage
iteration is reported as failed rather than classified.

The phase-diagram pixels downstream encode crossing as 1 and confined as 0;
failed runs are excluded from pixel statistics and surfaced separately.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backends import BLEW_UP, COMPLETED, CROSSED, STAGE_DIVERGED
from .errors import DomainError
from .integrator import StepConfig, gauss_scheme, ode_plan, pde_plan, state_to_spectra
from .spectral import FieldState, GridSpec

__all__ = [
    "CONFINED",
    "CROSSING",
    "STATUS_COMPLETED",
    "STATUS_EARLY_STOPPED",
    "STATUS_FAILED_BLOWUP",
    "STATUS_FAILED_DOMAIN",
    "STATUS_FAILED_STAGES",
    "RunOutcome",
    "classify_pde",
    "classify_ode",
    "simulate_pde",
    "simulate_ode",
]

CONFINED = "confined"
CROSSING = "crossing"

STATUS_COMPLETED = "completed"
STATUS_EARLY_STOPPED = "early-stopped"
STATUS_FAILED_BLOWUP = "failed:blowup"
STATUS_FAILED_STAGES = "failed:stage-divergence"
STATUS_FAILED_DOMAIN = "failed:domain"

_FAILED_PREFIX = "failed:"


@dataclass(frozen=True)
class RunOutcome:
    """Result of one classified trajectory.

    ``classification`` is meaningful only when the run did not fail; a failed
    run reports whatever was observed before failure (never a crossing, since
    a crossing stops the run first) together with a ``failed:`` status.
    """

    classification: str
    first_crossing_time: float | None
    energy_drift: float
    t_final: float
    status: str
    steps: int = 0

    def __post_init__(self):
        if self.classification not in (CONFINED, CROSSING):
            raise DomainError(f"unknown classification {self.classification!r}")
        crossing = self.classification == CROSSING
        has_time = self.first_crossing_time is not None
        if crossing != has_time:
            raise DomainError(
                "crossing classification and first_crossing_time must appear together")
        if has_time and self.first_crossing_time > self.t_final:
            raise DomainError("first_crossing_time must not exceed t_final")
        if not (self.energy_drift >= 0.0):
            raise DomainError("energy_drift must be >= 0")

    @property
    def failed(self) -> bool:
        return self.status.startswith(_FAILED_PREFIX)

    @property
    def crossed(self) -> bool:
        return self.classification == CROSSING


def _outcome(status_code, t0, dt, steps, t_cross, drift, t_end) -> RunOutcome:
    if status_code == COMPLETED:
        return RunOutcome(CONFINED, None, drift, t_end, STATUS_COMPLETED, steps)
    if status_code == CROSSED:
        return RunOutcome(CROSSING, t_cross, drift, t_cross,
                          STATUS_EARLY_STOPPED, steps)
    status = STATUS_FAILED_STAGES if status_code == STAGE_DIVERGED else STATUS_FAILED_BLOWUP
    return RunOutcome(CONFINED, None, drift, t0 + steps * dt, status, steps)


def _split_steps(t0: float, t_end: float, dt: float):
    """Number of full steps and the remainder step landing exactly on t_end."""
    span = t_end - t0
    if span < 0:
        raise DomainError(f"t_end={t_end:g} is before t={t0:g}")
    n_full = int(math.floor(span / dt * (1.0 + 1e-15)))
    dt_rem = t_end - (t0 + n_full * dt)
    if abs(dt_rem) <= 1e-12 * max(1.0, abs(t_end)):
        dt_rem = 0.0
    return n_full, dt_rem


def _run_classified(plan_main, plan_rem, run_args, t0, dt, dt_rem, t_end,
                    sample_every):
    """Drive the kernel(s) over [t0, t_end] with crossing checks; returns
    (outcome, e0, samples)."""
    state, n_full = run_args
    out = plan_main.run(*state, t0, n_full, check_crossing=True,
                        sample_every=sample_every)
    *_, steps, status_code, t_cross, drift, e0, samples = out
    state = out[: len(state)]
    total_steps = steps
    if status_code == COMPLETED and dt_rem != 0.0:
        t_mid = t0 + steps * dt
        out = plan_rem.run(*state, t_mid, 1, check_crossing=True,
                           sample_every=1 if sample_every else 0,
                           e0=e0, drift0=drift)
        *_, steps2, status_code, t_cross, drift, e0, samples2 = out
        state = out[: len(state)]
        total_steps += steps2
        samples = samples + samples2
    outcome = _outcome(status_code, t0, dt, total_steps, t_cross, drift, t_end)
    return state, outcome, e0, samples


def classify_pde(state0: FieldState, params, cfg: StepConfig, t_end: float,
                 grid: GridSpec | None = None) -> RunOutcome:
    """Classify one field trajectory from ``state0`` up to ``t_end``."""
    if grid is None:
        grid = GridSpec(n=state0.u.shape[-1])
    if not (float(np.min(state0.u)) > 0.0):
        raise DomainError("initial field must be strictly positive "
                          "(requires A < sqrt(mu))")
    n_full, dt_rem = _split_steps(state0.t, t_end, cfg.dt)
    plan = pde_plan(grid, cfg, params)
    plan_rem = None
    if dt_rem != 0.0:
        plan_rem = pde_plan(grid, StepConfig(dt=dt_rem, scheme=cfg.scheme), params)
    uh, vh = state_to_spectra(state0)
    _, outcome, _, _ = _run_classified(plan, plan_rem, ((uh, vh), n_full),
                                       state0.t, cfg.dt, dt_rem, t_end, 0)
    return outcome


def classify_ode(A: float, mu: float, dt: float, t_end: float,
                 scheme=None) -> RunOutcome:
    """Classify one scalar trajectory from (A + sqrt(mu), 0) up to ``t_end``."""
    if not (mu > 0):
        raise DomainError(f"mu must be > 0, got {mu}")
    if not (A >= 0):
        raise DomainError(f"A must be >= 0, got {A}")
    if not (dt > 0):
        raise DomainError(f"dt must be > 0, got {dt}")
    if scheme is None:
        scheme = gauss_scheme()
    cfg = StepConfig(dt=dt, scheme=scheme)
    n_full, dt_rem = _split_steps(0.0, t_end, dt)
    plan = ode_plan(cfg, mu)
    plan_rem = None
    if dt_rem != 0.0:
        plan_rem = ode_plan(StepConfig(dt=dt_rem, scheme=scheme), mu)
    u0 = A + math.sqrt(mu)
    _, outcome, _, _ = _run_classified(plan, plan_rem, ((u0, 0.0), n_full),
                                       0.0, dt, dt_rem, t_end, 0)
    return outcome


def simulate_pde(state0: FieldState, params, cfg: StepConfig, t_end: float,
                 sample_every: int = 16, grid: GridSpec | None = None):
    """Classify while recording a time series.

    Returns ``(outcome, rows)`` where rows are
    ``(t, min_u, max_u, mean_u, energy, energy_drift)`` at t0, after every
    ``sample_every``-th step, at a crossing, and at t_end.
    """
    if grid is None:
        grid = GridSpec(n=state0.u.shape[-1])
    if sample_every < 1:
        raise DomainError(f"sample_every must be >= 1, got {sample_every}")
    if not (float(np.min(state0.u)) > 0.0):
        raise DomainError("initial field must be strictly positive "
                          "(requires A < sqrt(mu))")
    n_full, dt_rem = _split_steps(state0.t, t_end, cfg.dt)
    plan = pde_plan(grid, cfg, params)
    plan_rem = None
    if dt_rem != 0.0:
        plan_rem = pde_plan(grid, StepConfig(dt=dt_rem, scheme=cfg.scheme), params)
    uh, vh = state_to_spectra(state0)
    state, outcome, e0, samples = _run_classified(
        plan, plan_rem, ((uh, vh), n_full), state0.t, cfg.dt, dt_rem, t_end,
        sample_every)
    u0 = state0.u
    first = (state0.t, float(np.min(u0)), float(np.max(u0)),
             float(np.mean(u0)), e0, 0.0)
    rows = [first] + list(samples)
    if outcome.status == STATUS_COMPLETED and (not rows or rows[-1][0] != t_end):
        uh_f, vh_f = state
        u_f = np.fft.irfft(uh_f, grid.n)
        e_f = plan.energy(uh_f, u_f, np.asarray(vh_f))
        denom = max(abs(e0), 1e-300)
        rows.append((t_end, float(np.min(u_f)), float(np.max(u_f)),
                     float(np.mean(u_f)), e_f, abs(e_f - e0) / denom))
    return outcome, rows


def simulate_ode(A: float, mu: float, dt: float, t_end: float,
                 sample_every: int = 16, scheme=None):
    """Scalar counterpart of :func:`simulate_pde` (min = max = mean = u)."""
    if not (mu > 0):
        raise DomainError(f"mu must be > 0, got {mu}")
    if not (A >= 0):
        raise DomainError(f"A must be >= 0, got {A}")
    if not (dt > 0):
        raise DomainError(f"dt must be > 0, got {dt}")
    if sample_every < 1:
        raise DomainError(f"sample_every must be >= 1, got {sample_every}")
    if scheme is None:
        scheme = gauss_scheme()
    cfg = StepConfig(dt=dt, scheme=scheme)
    n_full, dt_rem = _split_steps(0.0, t_end, dt)
    plan = ode_plan(cfg, mu)
    plan_rem = None
    if dt_rem != 0.0:
        plan_rem = ode_plan(StepConfig(dt=dt_rem, scheme=scheme), mu)
    u0 = A + math.sqrt(mu)
    state, outcome, e0, samples = _run_classified(
        plan, plan_rem, ((u0, 0.0), n_full), 0.0, dt, dt_rem, t_end,
        sample_every)
    rows = [(0.0, u0, u0, u0, e0, 0.0)] + list(samples)
    if outcome.status == STATUS_COMPLETED and (not rows or rows[-1][0] != t_end):
        u_f, v_f = state
        e_f = plan.energy(u_f, v_f)
        denom = max(abs(e0), 1e-300)
        rows.append((t_end, u_f, u_f, u_f, e_f, abs(e_f - e0) / denom))
    return outcome, rows
