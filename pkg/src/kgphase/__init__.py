"""Spectral solver and sweep harness for a cubic wave model on a periodic
line, classifying each trajectory as sign-confined or zero-crossing and
aggregating sweeps into phase diagrams over (amplitude, coupling).

Hot kernels run in a compiled extension when it is built, with a pure-numpy
fallback selected automatically at import; see :mod:`kgphase.backends`.
"""

from .backends import available, get_backend, set_backend
from .classifier import (
    CONFINED,
    CROSSING,
    RunOutcome,
    classify_ode,
    classify_pde,
    simulate_ode,
    simulate_pde,
)
from .errors import (
    DomainError,
    IoError,
    KgPhaseError,
    NumericalBlowup,
    PlanError,
    StageDivergence,
)
from .integrator import (
    IRKScheme,
    StepConfig,
    blowup_limit,
    gauss_scheme,
    integrate,
    irk_step,
    rk4_reference_step,
)
from .model import (
    InitialCondition,
    ModelParams,
    critical_amplitude,
    linearized_frequency,
    make_params,
    normalized_amplitude,
    pde_energy,
    potential,
)
from .ode import OdeState, ode_confined_predicate, ode_integrate
from .spectral import (
    FieldState,
    GridSpec,
    cubic_dealiased,
    first_derivative,
    initial_state,
    rhs,
    second_derivative,
)
from .sweep import (
    ColumnBoundary,
    DiagramStats,
    PhaseDiagram,
    SweepJob,
    SweepPlan,
    aggregate_journal,
    diagram_stats,
    expand,
    plan_from_dict,
    plan_to_dict,
    read_journal,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "available",
    "get_backend",
    "set_backend",
    "CONFINED",
    "CROSSING",
    "RunOutcome",
    "classify_ode",
    "classify_pde",
    "simulate_ode",
    "simulate_pde",
    "DomainError",
    "IoError",
    "KgPhaseError",
    "NumericalBlowup",
    "PlanError",
    "StageDivergence",
    "IRKScheme",
    "StepConfig",
    "blowup_limit",
    "gauss_scheme",
    "integrate",
    "irk_step",
    "rk4_reference_step",
    "InitialCondition",
    "ModelParams",
    "critical_amplitude",
    "linearized_frequency",
    "make_params",
    "normalized_amplitude",
    "pde_energy",
    "potential",
    "OdeState",
    "ode_confined_predicate",
    "ode_integrate",
    "FieldState",
    "GridSpec",
    "cubic_dealiased",
    "first_derivative",
    "initial_state",
    "rhs",
    "second_derivative",
    "ColumnBoundary",
    "DiagramStats",
    "PhaseDiagram",
    "SweepJob",
    "SweepPlan",
    "aggregate_journal",
    "diagram_stats",
    "expand",
    "plan_from_dict",
    "plan_to_dict",
    "read_journal",
    "run_sweep",
    "__version__",
]
