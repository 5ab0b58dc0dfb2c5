"""Reduced scalar dynamics: oracle comparison and the exact threshold law."""

import math
import random

import numpy as np
import pytest

from kgphase.classifier import CONFINED, CROSSING, classify_ode
from kgphase.errors import DomainError
from kgphase.integrator import gauss_scheme
from kgphase.model import critical_amplitude, potential
from kgphase.ode import OdeState, ode_confined_predicate, ode_integrate


def test_trajectory_matches_adaptive_reference_solver():
    from scipy.integrate import solve_ivp

    A, mu = 0.3, 1.0
    sol = solve_ivp(lambda t, y: [y[1], -y[0] * (y[0] ** 2 - mu)],
                    (0.0, 20.0), [A + math.sqrt(mu), 0.0],
                    method="DOP853", rtol=1e-12, atol=1e-14, t_eval=[20.0])
    end = ode_integrate(A, mu, 20.0, 2.0**-6)
    assert end.t == pytest.approx(20.0)
    assert end.u == pytest.approx(sol.y[0, -1], abs=1e-8)
    assert end.v == pytest.approx(sol.y[1, -1], abs=1e-8)


def test_three_stage_scheme_holds_energy_to_1e10_over_16384():
    out = classify_ode(0.3, 1.0, 2.0**-4, 16384.0,
                       scheme=gauss_scheme(stages=3, stage_tol=1e-13))
    assert out.status == "completed"
    assert out.classification is CONFINED
    assert out.energy_drift <= 1e-10


def test_confinement_threshold_matches_energy_criterion():
    # the scalar model has an exact barrier criterion; the integrator-based
    # classifier must reproduce it everywhere outside a 2% band
    rng = random.Random(1234)
    for _ in range(200):
        mu = 2.0 ** rng.uniform(-10.0, 2.0)
        a_prime = rng.uniform(0.3, 1.7)
        if 0.98 <= a_prime <= 1.02:
            continue
        A = a_prime * critical_amplitude(mu)
        out = classify_ode(A, mu, 2.0**-4, 4096.0)
        expected = CONFINED if a_prime < 1.0 else CROSSING
        assert out.classification is expected, (mu, a_prime, out)
        assert (out.classification is CONFINED) == ode_confined_predicate(A, mu)


def test_predicate_is_strict_barrier_inequality():
    mu = 1.0
    crit = critical_amplitude(mu)
    assert ode_confined_predicate(0.999999 * crit, mu)
    assert not ode_confined_predicate(crit, mu)   # V == 0 escapes (boundary)
    assert potential(crit + math.sqrt(mu), mu) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DomainError):
        ode_confined_predicate(0.1, 0.0)
    with pytest.raises(DomainError):
        ode_confined_predicate(-0.1, 1.0)


def test_zero_amplitude_rests_at_the_well_bottom():
    end = ode_integrate(0.0, 1.0, 50.0, 2.0**-4)
    assert end.u == pytest.approx(1.0, abs=1e-12)
    assert end.v == pytest.approx(0.0, abs=1e-12)


def test_integrate_validation_and_endpoint():
    with pytest.raises(DomainError):
        ode_integrate(0.1, -1.0, 1.0, 0.1)
    with pytest.raises(DomainError):
        ode_integrate(-0.1, 1.0, 1.0, 0.1)
    with pytest.raises(DomainError):
        ode_integrate(0.1, 1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        ode_integrate(0.1, 1.0, -1.0, 0.1)

    start = ode_integrate(0.1, 1.0, 0.0, 0.1)
    assert (start.t, start.u, start.v) == (0.0, 1.1, 0.0)

    # t_end off the step lattice is still hit exactly
    end = ode_integrate(0.1, 1.0, 0.3, 2.0**-4)
    assert end.t == pytest.approx(0.3)
    finer = ode_integrate(0.1, 1.0, 0.3, 2.0**-8)
    assert end.u == pytest.approx(finer.u, abs=1e-8)


def test_observer_sees_each_step_and_stops_early():
    times = []
    ode_integrate(0.2, 1.0, 0.5, 2.0**-4, observer=lambda s: times.append(s.t))
    np.testing.assert_allclose(times, np.arange(1, 9) * 2.0**-4, atol=1e-14)

    stopped = ode_integrate(0.2, 1.0, 100.0, 2.0**-4,
                            observer=lambda s: s.t >= 1.0)
    assert stopped.t == pytest.approx(1.0)


def test_state_validation_rejects_nonfinite_values():
    OdeState(t=0.0, u=1.0, v=0.0)
    for bad in (float("nan"), float("inf")):
        with pytest.raises(DomainError):
            OdeState(t=bad, u=1.0, v=0.0)
        with pytest.raises(DomainError):
            OdeState(t=0.0, u=bad, v=0.0)
        with pytest.raises(DomainError):
            OdeState(t=0.0, u=1.0, v=bad)
