"""Generalized Douglas-Rachford projection methods."""

from .catalog import ProblemInstance, get_instance, list_instances
from .cyclic import (
    CyclicSchedule,
    NumericalAbort,
    cyclic_run,
    is_connected,
    is_fully_connected,
    shadow_consensus,
    z_sets,
)
from .diagnostics import (
    audit_per_cycle_contraction,
    audit_quasi_coercive,
    audit_quasi_fejer,
    fit_linear_rate,
)
from .geometry import AffineSubspace
from .operators import GdrOperator, compute_gap, fixed_point_check, gdr_step, named_operator
from .regularity import (
    check_eps_delta_regular,
    estimate_cq_number,
    estimate_linreg_modulus,
    predict_schedule,
    predicted_rate,
)
from .sets import (
    AffineSet,
    Ball,
    Box,
    EpiAbs,
    FinitePoints,
    Halfspace,
    Hyperplane,
    Polyhedron,
    RelaxedProjector,
    Sphere,
)

__version__ = "0.1.0"
