"""Vacuum-capable 1D heat-conductive compressible Navier-Stokes solver in
Lagrangian flow-map coordinates, paired with an audit engine for the exact
identities and explicit a-priori bounds the solution must satisfy.
"""

from .audit import (
    AuditReport,
    AuditThresholds,
    KSFields,
    audit_trajectory,
    conservation_check,
    embedding_check,
    flux_checks,
    j_bounds_check,
    ks_fields,
    ks_identity_residual,
)
from .config import RunConfig, build_initial_data, load_config, parse_config
from .errors import (
    ConfigError,
    DegenerateDataError,
    DegenerateJacobianError,
    DegenerateMapError,
    InvalidInitialDataError,
    LagflowError,
    NumericalError,
    QueryRangeError,
    RunAbortedError,
    StepRejected,
    StructuralError,
)
from .euler import EulerFrame, flow_map, to_euler
from .grid1d import (
    Grid,
    ThetaBC,
    cell_div_flux,
    cell_gradient,
    cumulative_integral,
    integrate,
    node_div_flux,
)
from .model import (
    AprioriConstants,
    InitialData,
    PhysicalParams,
    ValidationReport,
    apriori_constants,
    effective_viscous_flux,
    pressure,
    specific_energy,
    validate_initial_data,
)
from .stepper import (
    SchemeConfig,
    State,
    Trajectory,
    adaptive_dt,
    initial_state,
    run,
    step,
)
from .studies import (
    ContinuationReport,
    ManufacturedSolution,
    OrderReport,
    eps_continuation,
    manufactured_dirichlet,
    manufactured_neumann,
    mms_run,
    refinement_study,
)

__version__ = "0.1.0"
