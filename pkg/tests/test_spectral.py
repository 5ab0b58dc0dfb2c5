"""Grid, spectral derivatives, and the dealiased cubic against a convolution oracle."""

import math

import numpy as np
import pytest

from kgphase.errors import DomainError
from kgphase.spectral import (
    FieldState,
    GridSpec,
    cubic_dealiased,
    first_derivative,
    initial_state,
    rhs,
    second_derivative,
)
from kgphase.model import make_params


def grid_x(n):
    return np.arange(n) / n


def test_gridspec_validation():
    GridSpec(n=16)
    GridSpec(n=64, dealias_factor=3)
    for bad in (8, 15, 48, 63, 0, -16):
        with pytest.raises(DomainError):
            GridSpec(n=bad)
    with pytest.raises(DomainError):
        GridSpec(n=64, dealias_factor=1)


@pytest.mark.parametrize("n", [16, 64])
def test_derivatives_exact_on_resolved_modes(n):
    x = grid_x(n)
    for k in (1, 2, n // 4, n // 2 - 1):
        u = np.sin(2 * np.pi * k * x)
        np.testing.assert_allclose(
            first_derivative(u), 2 * np.pi * k * np.cos(2 * np.pi * k * x),
            atol=1e-9 * k * k, rtol=0)
        np.testing.assert_allclose(
            second_derivative(u), -(2 * np.pi * k) ** 2 * u,
            atol=1e-7 * k * k, rtol=0)


def test_derivatives_zero_nyquist():
    # The alternating-sign grid vector is the Nyquist mode; the closed band
    # treats it as absent, so both derivatives must vanish identically.
    n = 32
    u = np.cos(np.pi * np.arange(n))
    assert np.all(first_derivative(u) == 0.0)
    assert np.all(second_derivative(u) == 0.0)


def _band_limited_field(rng, n):
    """Random real field supported on |k| <= n/2 - 1 (closed band)."""
    kmax = n // 2 - 1
    coeffs = np.zeros(n // 2 + 1, dtype=complex)
    coeffs[0] = rng.normal()
    coeffs[1 : kmax + 1] = rng.normal(size=kmax) + 1j * rng.normal(size=kmax)
    return np.fft.irfft(coeffs, n), coeffs


def _cubic_by_convolution(coeffs, n):
    """Exact spectral cubic of a band-limited field: triple convolution.

    Works on full two-sided rfft-scale coefficients; the 1/n**2 factor
    converts the plain coefficient convolution back to rfft scaling.
    O(n^3); for oracle use at small n only.
    """
    kmax = n // 2 - 1
    full = np.zeros(n, dtype=complex)
    full[: kmax + 1] = coeffs[: kmax + 1]
    for k in range(1, kmax + 1):
        full[-k] = np.conj(coeffs[k])
    out = np.zeros(n // 2 + 1, dtype=complex)
    ks = [k for k in range(-kmax, kmax + 1)]
    for j in range(kmax + 1):
        acc = 0.0 + 0.0j
        for p in ks:
            for q in ks:
                r = j - p - q
                if -kmax <= r <= kmax:
                    acc += full[p % n] * full[q % n] * full[r % n]
        out[j] = acc / n**2
    return out


@pytest.mark.parametrize("n,factor", [(16, 2), (16, 3), (32, 2)])
def test_cubic_dealiased_matches_convolution_oracle(n, factor):
    rng = np.random.default_rng(1234 + n + factor)
    for _ in range(3):
        u, coeffs = _band_limited_field(rng, n)
        expected = _cubic_by_convolution(coeffs, n)
        got = np.fft.rfft(cubic_dealiased(u, factor=factor))
        scale = np.max(np.abs(expected)) or 1.0
        np.testing.assert_allclose(got[: n // 2], expected[: n // 2],
                                   atol=2e-13 * scale, rtol=0)
        # closed band: the Nyquist bin of the product is identically zero
        assert abs(got[n // 2]) <= 1e-13 * scale


def test_cubic_dealiased_differs_from_aliased_cube():
    # A mode at k = 5 on n = 16 cubes to k = 15, which folds back to k = 1
    # on the unpadded grid; the dealiased product must not contain it.
    n = 16
    x = grid_x(n)
    u = np.sin(2 * np.pi * 5 * x)
    aliased = np.fft.rfft(u**3)
    clean = np.fft.rfft(cubic_dealiased(u))
    assert abs(aliased[1]) > 1e-2          # aliasing pollutes k=1 ...
    assert abs(clean[1]) < 1e-13           # ... and dealiasing removes it
    assert abs(clean[5]) == pytest.approx(abs(aliased[5]), rel=1e-12)


def test_initial_state_values_and_validation():
    grid = GridSpec(n=32)
    mu = 0.25
    A = 0.1
    state = initial_state(A, mu, grid)
    x = grid_x(32)
    np.testing.assert_allclose(state.u, A * np.sin(2 * np.pi * x) + math.sqrt(mu),
                               rtol=0, atol=1e-15)
    assert np.all(state.v == 0.0)
    assert state.t == 0.0
    with pytest.raises(DomainError):
        initial_state(-0.1, mu, grid)
    with pytest.raises(DomainError):
        initial_state(A, 0.0, grid)


def test_rhs_stationary_state_is_fixed_point():
    grid = GridSpec(n=32)
    params = make_params(alpha=-0.25, beta=1.0, mu=0.5, L=1.0)
    state = initial_state(0.0, 0.5, grid)
    du, dv = rhs(state, params)
    assert np.all(du == 0.0)
    np.testing.assert_allclose(dv, 0.0, atol=1e-14)


def test_rhs_matches_component_evaluation():
    grid = GridSpec(n=32)
    params = make_params(alpha=-(2.0**-3), beta=1.0, mu=0.3, L=1.0)
    rng = np.random.default_rng(5)
    u, _ = _band_limited_field(rng, 32)
    v, _ = _band_limited_field(rng, 32)
    state = FieldState(t=0.0, u=u, v=v)
    du, dv = rhs(state, params)
    np.testing.assert_allclose(du, v, rtol=0, atol=0)
    expected = (params.c_sq * second_derivative(u)
                - cubic_dealiased(u) + params.mu * u)
    np.testing.assert_allclose(dv, expected, rtol=1e-12, atol=1e-13)


def test_field_state_validation():
    n = 16
    u = np.zeros(n)
    FieldState(t=0.0, u=u, v=u.copy())
    with pytest.raises(DomainError):
        FieldState(t=0.0, u=np.full(n, np.nan), v=u.copy())
    with pytest.raises(DomainError):
        FieldState(t=float("inf"), u=u, v=u.copy())
    with pytest.raises(DomainError):
        FieldState(t=0.0, u=u, v=np.zeros(n + 1))
