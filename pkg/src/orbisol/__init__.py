"""Cohomogeneity-one gradient Ricci solitons near a singular orbit.

Singular-point power-series jets, adaptive continuation, conservation
certificates, and kernel/indeterminacy reports for diagonal invariant
metrics given by homogeneous-space bracket data.
"""

from .errors import (
    ConsistencyViolated,
    DataError,
    GeometryError,
    InitialConditionViolated,
    LeadTooSingular,
    NonDiagonalRicci,
    NonScalarCasimir,
    OrbisolError,
    ParityViolated,
    SingularMetric,
    StabilizationNotReached,
    StepSizeUnderflow,
    ZeroLeadingCoefficient,
)
from .geometry import (
    Block,
    DiagonalTensor,
    GeometrySpec,
    SummandSpec,
    casimir_endo_matrix,
    casimir_spectrum,
    ricci_endomorphism,
    ricci_endomorphism_at,
    validate_geometry,
)
from .series import (
    ScalarSeries,
    TensorSeries,
    dr_sing_matrix,
    laurent_split,
    r_sing_of,
    ricci_series,
    series_add,
    series_invert,
    series_mul,
    series_scale,
)
from .recursion import (
    InitialData,
    OperatorMatrix,
    SeriesSolution,
    build_Lm,
    build_Lm_model,
    build_Ltilde,
    check_initial_conditions,
    compute_D,
    jet_residual,
    kernel_basis,
    solve_series,
)
from .flow import (
    SolitonState,
    Trajectory,
    conserved_drift,
    first_integral_residual,
    integrate,
    orbit_constraint_residual,
    rhs,
    soliton_residual,
    soliton_residual_along,
)
from .indeterminacy import IndeterminacyReport, indeterminacy_total, kernel_scan
from .skeletons import (
    abelian_skeleton,
    circle_skeleton,
    example1_counts_skeleton,
    planted_root_skeleton,
    resolve_geometry,
    sphere_skeleton,
    stiefel_codim2_counts_skeleton,
    stiefel_skeleton,
)

__version__ = "0.1.0"
