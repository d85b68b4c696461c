"""Differentially private Fréchet means on SPD matrices (log-Euclidean metric)."""

from .errors import (
    DimensionError,
    DomainError,
    NumericalError,
    SpdPrivacyError,
)
from .geometry import (
    EigenDecomposition,
    SpdMatrix,
    SymMatrix,
    TangentVector,
    ball_radius,
    expm,
    frechet_mean_le,
    identity,
    invvecd,
    le_add,
    le_distance,
    le_scale,
    le_sub,
    logm,
    sym_eigen,
    vecd,
)
from .mechanisms import (
    CalibrationKind,
    LaplaceDraw,
    MechanismConfig,
    PrivacyBudget,
    Sensitivity,
    SensitivityKind,
    calibrate_analytic,
    calibrate_classical,
    extrinsic_gaussian,
    privacy_loss,
    riemannian_laplace,
    sensitivity_extrinsic,
    sensitivity_frechet_le,
    tangent_gaussian,
)
from .sampling import (
    LogGaussianParams,
    RngState,
    gaussian_vector,
    haar_orthogonal,
    log_gaussian_logdensity,
    sample_log_gaussian,
    sample_synthetic_spd,
)
from .descriptors import (
    DescriptorParams,
    FeatureField,
    RasterImage,
    covariance_descriptor,
    descriptor_radius_bound,
    extract_features,
    load_pnm,
    save_pnm,
)
from .harness import ExperimentSpec, TrialRecord, emit_csv, run_image, run_synthetic
from .plotting import emit_plot

__version__ = "0.1.0"

__all__ = [
    "SpdPrivacyError",
    "DomainError",
    "DimensionError",
    "NumericalError",
    "SymMatrix",
    "SpdMatrix",
    "TangentVector",
    "EigenDecomposition",
    "sym_eigen",
    "logm",
    "expm",
    "vecd",
    "invvecd",
    "le_distance",
    "le_add",
    "le_sub",
    "le_scale",
    "frechet_mean_le",
    "ball_radius",
    "identity",
    "RngState",
    "LogGaussianParams",
    "gaussian_vector",
    "haar_orthogonal",
    "sample_log_gaussian",
    "log_gaussian_logdensity",
    "sample_synthetic_spd",
    "PrivacyBudget",
    "Sensitivity",
    "SensitivityKind",
    "CalibrationKind",
    "MechanismConfig",
    "LaplaceDraw",
    "sensitivity_frechet_le",
    "sensitivity_extrinsic",
    "calibrate_classical",
    "calibrate_analytic",
    "tangent_gaussian",
    "extrinsic_gaussian",
    "riemannian_laplace",
    "privacy_loss",
    "RasterImage",
    "FeatureField",
    "DescriptorParams",
    "extract_features",
    "covariance_descriptor",
    "descriptor_radius_bound",
    "load_pnm",
    "save_pnm",
    "ExperimentSpec",
    "TrialRecord",
    "run_synthetic",
    "run_image",
    "emit_csv",
    "emit_plot",
    "__version__",
]
