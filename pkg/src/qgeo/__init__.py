"""Fubini-Study geometry, the parameter-based uncertainty relation and its intelligent states."""

from .core import (
    DEFAULT_TOL,
    DegenerateSpectrumError,
    DimensionError,
    HermiticityError,
    HermitianGenerator,
    NormalizationError,
    NumericalInconsistencyError,
    ParameterRangeError,
    QGeoError,
    QuantumState,
    Spectrum,
    SplitParts,
    ToleranceConfig,
    Units,
    eigendecompose,
    expectation,
    inner_product,
    random_hermitian,
    random_state,
    random_unitary,
    uncertainty,
)
from .evolution import (
    EvolutionPath,
    ParameterGrid,
    StepSizeError,
    evolve_exact,
    evolve_ode,
    sample_path,
)
from .geometry import (
    GeometryReport,
    analyze_path,
    bargmann_angle,
    fubini_study_length,
    geodesic_curve,
    geodesic_residual,
    integrate_uniform,
    parallel_transport,
    subspace_rank,
    transported_length,
)
from .intelligent import (
    CounterexampleReport,
    IntelligentFamily,
    SplitGeneratorSpec,
    TheoremReport,
    block_leakage,
    build_split_generator,
    counterexample_three_level,
    horesh_mann_family,
    nonorthogonal_family,
    verify_theorem,
)
from .pbur import PburReport, averaged_uncertainty, evaluate_pbur, parameter_uncertainty

__version__ = "0.1.0"
