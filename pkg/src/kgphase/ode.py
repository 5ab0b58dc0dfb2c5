"""Reduced point dynamics: the field equation with the spatial term removed.

With the coupling turned off, every grid point obeys the same scalar law
d2u/dt2 = -u (u^2 - mu).  Starting from u(0) = A + sqrt(mu), v(0) = 0, the
scalar energy v^2/2 + V(u) decides confinement exactly: the trajectory stays
on the initial side of u = 0 iff V(A + sqrt(mu)) < 0, i.e. iff
A < critical_amplitude(mu).  This closed-form criterion is the analytic
oracle behind the classifier tests and the boundary line in the phase
diagrams; the integrator here uses the same implicit scheme as the field
solver, specialized to the scalar system, so that scheme-level properties
can be checked cheaply.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .integrator import StepConfig, _raise_for_status, gauss_scheme, ode_plan
from .model import potential

__all__ = ["OdeState", "ode_integrate", "ode_confined_predicate"]


@dataclass
class OdeState:
    """Scalar trajectory point: time, displacement, velocity."""

    t: float
    u: float
    v: float

    def __post_init__(self):
        for name in ("t", "u", "v"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    def copy(self) -> "OdeState":
        return OdeState(t=self.t, u=self.u, v=self.v)


def _check_A_mu(A: float, mu: float) -> None:
    if not (mu > 0):
        raise DomainError(f"mu must be > 0, got {mu}")
    if not (A >= 0):
        raise DomainError(f"A must be >= 0, got {A}")


def ode_integrate(A: float, mu: float, t_end: float, dt: float,
                  observer=None, scheme=None) -> OdeState:
    """Advance the scalar model from (A + sqrt(mu), 0) at t=0 to exactly t_end.

    Same stepping and observer contract as :func:`kgphase.integrator.integrate`
    (observer called after every accepted step, truthy return stops early),
    with the scheme defaulting to the 2-stage Gauss method.
    """
    _check_A_mu(A, mu)
    if not (dt > 0 and math.isfinite(dt)):
        raise DomainError(f"dt must be finite and > 0, got {dt}")
    if not (t_end >= 0):
        raise DomainError(f"t_end must be >= 0, got {t_end}")
    if scheme is None:
        scheme = gauss_scheme()
    u = A + math.sqrt(mu)
    v = 0.0
    if t_end == 0.0:
        return OdeState(t=0.0, u=u, v=v)

    cfg = StepConfig(dt=dt, scheme=scheme)
    plan = ode_plan(cfg, mu)
    n_full = int(math.floor(t_end / dt * (1.0 + 1e-15)))
    dt_rem = t_end - n_full * dt
    if abs(dt_rem) <= 1e-12 * max(1.0, abs(t_end)):
        dt_rem = 0.0

    t = 0.0
    if observer is None:
        u, v, done, status, _, _, _, _ = plan.run(u, v, t, n_full)
        _raise_for_status(status, (done + 1) * dt)
        t = done * dt
    else:
        for step in range(n_full):
            u, v, done, status, _, _, _, _ = plan.run(u, v, t, 1)
            _raise_for_status(status, t + dt)
            t = (step + 1) * dt
            snap = OdeState(t=t, u=u, v=v)
            if observer(snap):
                return snap
    if dt_rem != 0.0:
        rem_plan = ode_plan(StepConfig(dt=dt_rem, scheme=scheme), mu)
        u, v, done, status, _, _, _, _ = rem_plan.run(u, v, t, 1)
        _raise_for_status(status, t_end)
        final = OdeState(t=t_end, u=u, v=v)
        if observer is not None:
            observer(final)
        return final
    return OdeState(t=t, u=u, v=v)


def ode_confined_predicate(A: float, mu: float) -> bool:
    """Exact confinement criterion of the reduced model.

    True iff the initial energy lies below the barrier at u = 0, i.e.
    potential(A + sqrt(mu), mu) < 0, which is equivalent to
    A < critical_amplitude(mu).
    """
    _check_A_mu(A, mu)
    return potential(A + math.sqrt(mu), mu) < 0.0
