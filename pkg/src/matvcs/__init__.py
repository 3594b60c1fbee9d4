"""Vector coherent states built from matrix moment problems."""

from .audit import QuadratureConfig, RadialMeasure, audit_moment, audit_moments, audit_resolution, moment_matrix
from .errors import (
    AccuracyError,
    AlgebraError,
    ConfigError,
    ConvergenceError,
    DimensionError,
    DomainError,
    ParameterError,
    PoleError,
    PreconditionError,
    SingularityError,
    TruncationError,
    VCSError,
)
from .families import VCSModel
from .jaynes_cummings import JCObservables, JCParams
from .mathcore import gamma_fn, hermitian_modulus, kummer_1f1, kummer_1f1_derivative, log_gamma, pochhammer
from .oscillator import LadderContext
from .susy import RhoParams, SU2Element
from .vcs import (
    FockTruncation,
    MatrixVariable,
    MomentFamily,
    VcsState,
    build_scalar_cs,
    build_vcs_rz,
    build_vcs_zr,
    inner_product,
    total_norm,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "AlgebraError",
    "ConfigError",
    "ConvergenceError",
    "DimensionError",
    "DomainError",
    "FockTruncation",
    "JCObservables",
    "JCParams",
    "LadderContext",
    "MatrixVariable",
    "MomentFamily",
    "ParameterError",
    "PoleError",
    "PreconditionError",
    "QuadratureConfig",
    "RadialMeasure",
    "RhoParams",
    "SU2Element",
    "SingularityError",
    "TruncationError",
    "VCSError",
    "VCSModel",
    "VcsState",
    "audit_moment",
    "audit_moments",
    "audit_resolution",
    "build_scalar_cs",
    "build_vcs_rz",
    "build_vcs_zr",
    "gamma_fn",
    "hermitian_modulus",
    "inner_product",
    "kummer_1f1",
    "kummer_1f1_derivative",
    "log_gamma",
    "moment_matrix",
    "pochhammer",
    "total_norm",
]
