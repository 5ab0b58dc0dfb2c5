"""Physical parameters, initial data, and the analytic confinement threshold.

The wave equation solved by this package is

    d2u/dt2 = c_sq * d2u/dx2 - u*(u**2 - mu),   x in [0, 1) periodic,

with ``c_sq = -alpha/(beta*L**2)`` derived from the physical coefficients
(alpha < 0, beta > 0, L > 0).  Dropping the spatial term gives the reduced
point model

    d2u/dt2 = -u*(u**2 - mu),   u(0) = A + sqrt(mu),  du/dt(0) = 0,

whose orbits stay on one side of u = 0 exactly when the conserved energy at
the turning point is negative: V(A + sqrt(mu)) < 0, i.e.
A < (sqrt(2) - 1)*sqrt(mu).  That threshold is the analytic oracle the rest
of the package is validated against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "ModelParams",
    "InitialCondition",
    "make_params",
    "potential",
    "pde_energy",
    "linearized_frequency",
    "critical_amplitude",
    "normalized_amplitude",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical coefficients and the derived squared phase speed.

    Attributes
    ----------
    alpha : float
        Spatial-coupling coefficient, strictly negative.
    beta : float
        Nonlinearity coefficient, strictly positive.
    mu : float
        Potential-well parameter, strictly positive.
    L : float
        Domain length before rescaling to the unit interval, strictly positive.
    c_sq : float
        Squared phase speed ``-alpha/(beta*L**2)``; always derived, never set
        independently.
    """

    alpha: float
    beta: float
    mu: float
    L: float
    c_sq: float = field(init=False)

    def __post_init__(self):
        if not (self.alpha < 0):
            raise DomainError(f"alpha must be < 0, got {self.alpha}")
        if not (self.beta > 0):
            raise DomainError(f"beta must be > 0, got {self.beta}")
        if not (self.mu > 0):
            raise DomainError(f"mu must be > 0, got {self.mu}")
        if not (self.L > 0):
            raise DomainError(f"L must be > 0, got {self.L}")
        object.__setattr__(self, "c_sq", -self.alpha / (self.beta * self.L**2))


@dataclass(frozen=True)
class InitialCondition:
    """Amplitude of the seeded sine mode on top of the uniform state sqrt(mu).

    The generated field is ``A*sin(2*pi*x) + sqrt(mu)`` with zero initial
    time derivative.
    """

    A: float
    mu: float

    def __post_init__(self):
        if not (self.A >= 0):
            raise DomainError(f"A must be >= 0, got {self.A}")
        if not (self.mu > 0):
            raise DomainError(f"mu must be > 0, got {self.mu}")


def make_params(alpha: float, beta: float, mu: float, L: float) -> ModelParams:
    """Build :class:`ModelParams`, deriving ``c_sq = -alpha/(beta*L**2)``.

    Raises
    ------
    DomainError
        If any sign constraint (alpha < 0; beta, mu, L > 0) is violated.
    """
    return ModelParams(alpha=alpha, beta=beta, mu=mu, L=L)


def potential(u, mu: float):
    """Double-well potential ``V(u) = u**4/4 - mu*u**2/2`` with ``V(0) = 0``.

    ``V'(u) = u*(u**2 - mu)`` is the restoring force; the wells sit at
    ``u = +/-sqrt(mu)`` with depth ``-mu**2/4``.  Accepts scalars or arrays.
    """
    u2 = u * u
    return 0.25 * u2 * u2 - 0.5 * mu * u2


def pde_energy(state, params: ModelParams) -> float:
    """Conserved energy of a field state on the uniform periodic grid.

    ``E = mean(v**2/2 + c_sq*u_x**2/2 + V(u))`` with the x-derivative
    evaluated spectrally and the integral by the uniform-grid mean (exact for
    trigonometric polynomials below Nyquist).

    Parameters
    ----------
    state : FieldState
        Grid samples ``(u, v)``; see :mod:`kgphase.spectral`.
    params : ModelParams
        Supplies ``c_sq`` and ``mu``.
    """
    from .spectral import first_derivative

    u = np.asarray(state.u, dtype=float)
    v = np.asarray(state.v, dtype=float)
    ux = first_derivative(u)
    return float(
        np.mean(0.5 * v * v + 0.5 * params.c_sq * ux * ux + potential(u, params.mu))
    )


def linearized_frequency(params: ModelParams, k: int) -> float:
    """Small-oscillation angular frequency of mode ``k`` about ``u = sqrt(mu)``.

    ``omega_k = sqrt(4*pi**2*k**2*c_sq + 2*mu)``; ``k = 0`` gives the reduced
    point model's frequency ``sqrt(2*mu)``.
    """
    if k < 0:
        raise DomainError(f"wavenumber must be >= 0, got {k}")
    return math.sqrt(4.0 * math.pi**2 * k * k * params.c_sq + 2.0 * params.mu)


def critical_amplitude(mu: float) -> float:
    """Largest seed amplitude whose point-model orbit stays sign-confined.

    Returns ``(sqrt(2) - 1)*sqrt(mu)``, the unique A > 0 with
    ``potential(A + sqrt(mu), mu) = 0``: above it the orbit's energy clears
    the barrier at u = 0 and the sign alternates.
    """
    if not (mu > 0):
        raise DomainError(f"mu must be > 0, got {mu}")
    return (math.sqrt(2.0) - 1.0) * math.sqrt(mu)


def normalized_amplitude(A: float, mu: float) -> float:
    """Amplitude in units of the confinement threshold: ``A' = A / ((sqrt(2)-1)*sqrt(mu))``.

    ``A' = 1`` is the point-model confinement boundary.
    """
    if not (A >= 0):
        raise DomainError(f"A must be >= 0, got {A}")
    return A / critical_amplitude(mu)
