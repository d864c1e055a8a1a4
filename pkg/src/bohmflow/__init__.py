"""Bohmian trajectory transport of quantum probability densities."""

from .dynamics import (
    DEFAULT_OPTIONS,
    FlowResult,
    SolverOptions,
    Trajectory,
    flow_map,
    implicit_constant,
    integrate_forward,
    inverse_map,
    solve_implicit,
    velocity,
    velocity_gradient,
)
from .errors import (
    BohmFlowError,
    BoundaryMassError,
    BracketError,
    ConfigError,
    DomainError,
    GridMismatchError,
    IntegrationError,
    InvalidModelError,
    NodeProximityError,
    QuadratureError,
    SamplingError,
)
from .reconstruct import (
    DensityField,
    EnsembleSpec,
    both_densities,
    cumulative,
    ensemble_transport,
    exact_density,
    reconstruct_density,
    sample_initial,
    transported_density_no_jacobian,
)
from .states import (
    Coherent,
    FreeGaussian,
    Numeric,
    Superposition,
    WaveModel,
    density,
    evaluate_psi,
    polar,
    total_probability,
)
from .tdse import GridState, evolve_history, init_from_model, numeric_model, propagate
from .verify import (
    VerificationReport,
    compare_densities,
    continuity_residual,
    figure1_dataset,
    normalization_identity,
    run_suite,
)

__version__ = "0.1.0"
