"""Pseudo-spectral simulator for a stochastic chemotaxis-fluid system on the
2D torus (with an optional wall-bounded scalar mode), built around exact
per-mode diffusion semigroups, conservative dealiased transport, and
divergence-free multiplicative velocity noise.

Quick start::

    from ctns import make_grid, default_initial, CoefficientSet
    from ctns import make_noise_model, StepperConfig, run

    grid = make_grid(64, 64)
    cfg = StepperConfig(dt=1e-3, t_final=1.0, coeffs=CoefficientSet(),
                        noise=make_noise_model(grid, m=8, seed=7))
    traj = run(cfg, default_initial(grid))
    print(traj["mass"][-1], traj["sup_c"].max())
"""

from ._kernels import backend as kernel_backend
from .coefficients import (
    CoefficientFunction,
    CoefficientSet,
    Potential,
    ValidationReport,
    chi_preset,
    k_preset,
    phi_preset,
    validate_coefficients,
)
from .config import RunConfig, load_config, parse_config
from .diagnostics import (
    EntropyReport,
    StabilityReport,
    calibrate_dissipation_constant,
    cell_entropy,
    dissipation_residual,
    entropy_report_from_record,
    entropy_total_series,
    fisher_information,
    gn_l2_bound,
    increment_residual,
    initial_budget,
    log_entropy_bound,
    mass,
    max_principle_check,
    stability_functionals,
)
from .errors import (
    ConfigurationError,
    ContractViolationError,
    CtnsError,
    DivergenceError,
    InvariantBreachError,
    StepSizeError,
)
from .experiments import (
    EnsembleResult,
    GalerkinResult,
    RefinementResult,
    TwinResult,
    ensemble_run,
    galerkin_sweep,
    refinement_study_dt,
    refinement_study_grid,
    twin_run,
)
from .fields import (
    SQUARE_NEUMANN,
    TORUS,
    DissipationAccumulators,
    Grid,
    ScalarField,
    State,
    VectorField,
    h1_seminorm,
    inner,
    integrate,
    l2_norm,
    make_grid,
    min_value,
    sup_norm,
)
from .noise import (
    NoiseModel,
    StokesEigenbasis,
    WienerPath,
    make_noise_model,
    member_seed,
    wiener_path,
)
from .operators import (
    advect_conservative,
    chemotaxis_flux,
    divergence,
    divergence_sup,
    gradient,
    heat_semigroup,
    hessian,
    laplacian,
    leray_project,
    stokes_semigroup,
)
from .snapshots import read_ndjson, read_snapshot, write_ndjson, write_snapshot
from .stepper import (
    Simulation,
    StepperConfig,
    Trajectory,
    band_limited_density,
    default_initial,
    run,
    step,
    wrapped_gaussian,
)

__version__ = "0.1.0"

__all__ = [
    "CoefficientFunction", "CoefficientSet", "ConfigurationError",
    "ContractViolationError", "CtnsError", "DissipationAccumulators",
    "DivergenceError", "EnsembleResult", "EntropyReport", "GalerkinResult",
    "Grid", "InvariantBreachError", "NoiseModel", "Potential",
    "RefinementResult", "RunConfig", "SQUARE_NEUMANN", "ScalarField",
    "Simulation", "StabilityReport", "State", "StepSizeError",
    "StepperConfig", "StokesEigenbasis", "TORUS", "Trajectory", "TwinResult",
    "ValidationReport", "VectorField", "WienerPath", "advect_conservative",
    "band_limited_density",
    "calibrate_dissipation_constant", "cell_entropy", "chemotaxis_flux",
    "chi_preset", "default_initial", "dissipation_residual", "divergence",
    "divergence_sup", "ensemble_run", "entropy_report_from_record",
    "entropy_total_series", "fisher_information", "galerkin_sweep",
    "gn_l2_bound", "gradient", "h1_seminorm", "heat_semigroup", "hessian",
    "increment_residual", "initial_budget", "inner", "integrate",
    "k_preset", "kernel_backend", "l2_norm", "laplacian", "leray_project",
    "load_config", "log_entropy_bound", "make_grid", "make_noise_model",
    "mass", "max_principle_check", "member_seed", "min_value", "parse_config",
    "phi_preset", "read_ndjson", "read_snapshot", "refinement_study_dt",
    "refinement_study_grid", "run", "stability_functionals", "step",
    "stokes_semigroup", "sup_norm", "twin_run", "validate_coefficients",
    "wiener_path", "wrapped_gaussian", "write_ndjson", "write_snapshot",
]
