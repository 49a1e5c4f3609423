"""Numerical toolkit for the flat fractional conformal Laplacian (-Delta)^gamma on periodic grids."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DomainError,
    FitError,
    FraclapError,
    OracleError,
    PoleError,
    SolverAccuracyError,
    StructuralError,
    ZeroModeError,
)
from .grid import FracParams, PeriodicField, forward_transform, inverse_transform, load_field, save_field  # noqa: E402
from .spectral import MultiplierSpec, apply_pv, apply_spectral, compose_inverse_check  # noqa: E402
from .extension import MeshSpec, apply_via_extension, calibrate_dtn, solve_mode  # noqa: E402
from .gamma import admissible, lambda_factor, signed_log_gamma  # noqa: E402

__all__ = [
    "__version__",
    "FraclapError", "StructuralError", "DomainError", "PoleError", "ZeroModeError",
    "SolverAccuracyError", "OracleError", "FitError",
    "PeriodicField", "FracParams", "forward_transform", "inverse_transform", "load_field", "save_field",
    "MultiplierSpec", "apply_spectral", "apply_pv", "compose_inverse_check",
    "MeshSpec", "solve_mode", "calibrate_dtn", "apply_via_extension",
    "admissible", "lambda_factor", "signed_log_gamma",
]
