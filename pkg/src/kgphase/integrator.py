"""Fixed-step Gauss-Legendre implicit Runge-Kutta time advancement.

The 2-stage scheme (order 4) is the default; the 3-stage scheme (order 6) is
available by flag.  Both are A-stable and symplectic, which is what keeps the
energy drift bounded over the very long classification runs.  A classical
explicit 4-stage step (:func:`rk4_reference_step`) serves as an independent
oracle for cross-validation; it shares nothing with the implicit path but the
right-hand side.

Stage equations are solved by fixed-point iteration with the stiff linear
part preconditioned exactly per Fourier mode (see
:mod:`kgphase.backends.pure`); failure to converge raises
:class:`~kgphase.errors.StageDivergence` so that a too-large dt is always
visible, never silently patched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .backends import BLEW_UP, COMPLETED, CROSSED, STAGE_DIVERGED, get_backend
from .errors import DomainError, NumericalBlowup, StageDivergence
from .spectral import FieldState, GridSpec, rhs

__all__ = [
    "IRKScheme",
    "StepConfig",
    "gauss_scheme",
    "irk_step",
    "integrate",
    "rk4_reference_step",
    "blowup_limit",
]

_TABLEAU_TOL = 1e-15


def _gauss_tableau(stages: int):
    if stages == 2:
        r = math.sqrt(3.0) / 6.0
        a = ((0.25, 0.25 - r), (0.25 + r, 0.25))
        b = (0.5, 0.5)
        c = (0.5 - r, 0.5 + r)
    elif stages == 3:
        r = math.sqrt(15.0)
        a = (
            (5 / 36, 2 / 9 - r / 15, 5 / 36 - r / 30),
            (5 / 36 + r / 24, 2 / 9, 5 / 36 - r / 24),
            (5 / 36 + r / 30, 2 / 9 + r / 15, 5 / 36),
        )
        b = (5 / 18, 4 / 9, 5 / 18)
        c = (0.5 - r / 10, 0.5, 0.5 + r / 10)
    else:
        raise DomainError(f"stages must be 2 or 3, got {stages}")
    return a, b, c


@dataclass(frozen=True)
class IRKScheme:
    """Butcher tableau plus stage-solver tolerances.

    Attributes
    ----------
    stages : int
        2 or 3 (Gauss-Legendre, order 2*stages).
    a, b, c : nested tuples
        The tableau; row sums of ``a`` must equal ``c`` and ``b`` must sum
        to 1, both to 1e-15.
    stage_tol : float
        Relative stage-increment tolerance (max-norm of the increment
        relative to the max-norm of the state, absolute floor 1e-300).
    max_stage_iters : int
        Iteration budget before declaring StageDivergence.
    """

    stages: int
    a: tuple
    b: tuple
    c: tuple
    stage_tol: float = 1e-12
    max_stage_iters: int = 100

    def __post_init__(self):
        if abs(sum(self.b) - 1.0) > _TABLEAU_TOL:
            raise DomainError("tableau weights b must sum to 1")
        for row, ci in zip(self.a, self.c):
            if abs(sum(row) - ci) > _TABLEAU_TOL:
                raise DomainError("tableau row sums must equal the nodes c")
        if not (self.stage_tol > 0):
            raise DomainError(f"stage_tol must be > 0, got {self.stage_tol}")
        if self.max_stage_iters < 1:
            raise DomainError("max_stage_iters must be >= 1")


def gauss_scheme(stages: int = 2, stage_tol: float = 1e-12,
                 max_stage_iters: int = 100) -> IRKScheme:
    """The Gauss-Legendre scheme with the given stage count (2 or 3)."""
    a, b, c = _gauss_tableau(stages)
    return IRKScheme(stages=stages, a=a, b=b, c=c, stage_tol=stage_tol,
                     max_stage_iters=max_stage_iters)


@dataclass(frozen=True)
class StepConfig:
    """Time step and scheme.  dt may be negative to run time-reversed."""

    dt: float
    scheme: IRKScheme = field(default_factory=gauss_scheme)

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt != 0.0):
            raise DomainError(f"dt must be finite and nonzero, got {self.dt}")


def blowup_limit(mu: float) -> float:
    """Guard threshold 10*max(sqrt(2*mu), 1): far above any bounded orbit."""
    return 10.0 * max(math.sqrt(2.0 * mu), 1.0)


# ---------------------------------------------------------------------------
# plan cache (per backend; plans are immutable once built)

_PLAN_CACHE: dict = {}


def pde_plan(grid: GridSpec, cfg: StepConfig, params):
    backend = get_backend()
    key = ("pde", backend.NAME, grid.n, grid.dealias_factor, cfg.dt, cfg.scheme,
           params.c_sq, params.mu)
    plan = _PLAN_CACHE.get(key)
    if plan is None:
        sch = cfg.scheme
        plan = backend.PdePlan(
            grid.n, grid.dealias_factor, cfg.dt,
            np.array(sch.a), np.array(sch.b),
            params.c_sq, params.mu, sch.stage_tol, sch.max_stage_iters,
            blowup_limit(params.mu),
        )
        _PLAN_CACHE[key] = plan
    return plan


def ode_plan(cfg: StepConfig, mu: float):
    backend = get_backend()
    key = ("ode", backend.NAME, cfg.dt, cfg.scheme, mu)
    plan = _PLAN_CACHE.get(key)
    if plan is None:
        sch = cfg.scheme
        plan = backend.OdePlan(
            cfg.dt, np.array(sch.a), np.array(sch.b),
            mu, sch.stage_tol, sch.max_stage_iters, blowup_limit(mu),
        )
        _PLAN_CACHE[key] = plan
    return plan


# ---------------------------------------------------------------------------
# state <-> spectra

def state_to_spectra(state: FieldState):
    """rfft spectra of (u, v) with the Nyquist bin zeroed (band closure)."""
    n = state.u.shape[-1]
    uh = np.fft.rfft(state.u)
    vh = np.fft.rfft(state.v)
    uh[n // 2] = 0.0
    vh[n // 2] = 0.0
    return uh, vh


def spectra_to_state(t: float, uh: np.ndarray, vh: np.ndarray, n: int) -> FieldState:
    return FieldState(t=t, u=np.fft.irfft(uh, n), v=np.fft.irfft(vh, n))


def _raise_for_status(status, t):
    if status == STAGE_DIVERGED:
        raise StageDivergence(
            f"stage iteration failed to converge during the step to t={t:g} "
            f"(dt too large for the current state)", t=t)
    if status == BLEW_UP:
        raise NumericalBlowup(f"field exceeded the blow-up guard at t={t:g}", t=t)


# ---------------------------------------------------------------------------
# public stepping API

def irk_step(state: FieldState, cfg: StepConfig, params,
             grid: GridSpec | None = None) -> FieldState:
    """One implicit step of size cfg.dt.

    Raises
    ------
    StageDivergence
        If the stage iteration does not reach ``stage_tol`` within
        ``max_stage_iters`` sweeps.
    NumericalBlowup
        If a stage or the updated field exceeds the blow-up guard.
    """
    if grid is None:
        grid = GridSpec(n=state.u.shape[-1])
    plan = pde_plan(grid, cfg, params)
    uh, vh = state_to_spectra(state)
    uh, vh, done, status, _, _, _, _ = plan.run(uh, vh, state.t, 1)
    _raise_for_status(status, state.t + (done + 1) * cfg.dt)
    return spectra_to_state(state.t + cfg.dt, uh, vh, grid.n)


def integrate(state: FieldState, t_end: float, cfg: StepConfig, params,
              observer=None, grid: GridSpec | None = None) -> FieldState:
    """Advance to exactly t_end with fixed steps (plus one final partial step).

    ``observer(state)`` is invoked after every accepted step; a truthy return
    stops the run early.  Without an observer the whole run executes inside
    the backend kernel.
    """
    if grid is None:
        grid = GridSpec(n=state.u.shape[-1])
    dt = cfg.dt
    remaining = t_end - state.t
    if remaining == 0.0:
        return state.copy()
    if remaining * dt < 0:
        raise DomainError(
            f"t_end={t_end:g} is behind t={state.t:g} for dt={dt:g}")
    n_full = int(math.floor(remaining / dt * (1.0 + 1e-15)))
    t_last = state.t + n_full * dt
    dt_rem = t_end - t_last
    if abs(dt_rem) <= 1e-12 * max(1.0, abs(t_end)):
        dt_rem = 0.0

    plan = pde_plan(grid, cfg, params)
    uh, vh = state_to_spectra(state)
    t = state.t
    if observer is None:
        uh, vh, done, status, _, _, _, _ = plan.run(uh, vh, t, n_full)
        _raise_for_status(status, t + (done + 1) * dt)
        t = t + done * dt
    else:
        for step in range(n_full):
            uh, vh, done, status, _, _, _, _ = plan.run(uh, vh, t, 1)
            _raise_for_status(status, t + dt)
            t = state.t + (step + 1) * dt
            snap = spectra_to_state(t, uh, vh, grid.n)
            if observer(snap):
                return snap
    if dt_rem != 0.0:
        rem_cfg = StepConfig(dt=dt_rem, scheme=cfg.scheme)
        rem_plan = pde_plan(grid, rem_cfg, params)
        uh, vh, done, status, _, _, _, _ = rem_plan.run(uh, vh, t, 1)
        _raise_for_status(status, t_end)
        t = t_end
        final = spectra_to_state(t, uh, vh, grid.n)
        if observer is not None:
            observer(final)
        return final
    return spectra_to_state(t, uh, vh, grid.n)


def rk4_reference_step(state: FieldState, dt: float, params,
                       grid: GridSpec | None = None) -> FieldState:
    """Classical explicit 4-stage step; independent oracle for the implicit path.

    Raises NumericalBlowup under the same guard as :func:`irk_step` (explicit
    steps far above the stability limit blow up instead of diverging slowly).
    """
    if grid is None:
        grid = GridSpec(n=state.u.shape[-1])
    factor = grid.dealias_factor
    limit = blowup_limit(params.mu)
    u, v, t = state.u, state.v, state.t

    def f(uu, vv):
        return rhs(FieldState(t, uu, vv), params, factor)

    def guard(uu, t_at):
        if not (float(np.max(np.abs(uu))) <= limit):
            raise NumericalBlowup(
                f"field exceeded the blow-up guard at t={t_at:g}", t=t_at)

    k1u, k1v = f(u, v)
    guard(u + 0.5 * dt * k1u, t)
    k2u, k2v = f(u + 0.5 * dt * k1u, v + 0.5 * dt * k1v)
    guard(u + 0.5 * dt * k2u, t)
    k3u, k3v = f(u + 0.5 * dt * k2u, v + 0.5 * dt * k2v)
    guard(u + dt * k3u, t)
    k4u, k4v = f(u + dt * k3u, v + dt * k3v)
    u_new = u + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    v_new = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    guard(u_new, t + dt)
    return FieldState(t=t + dt, u=u_new, v=v_new)
