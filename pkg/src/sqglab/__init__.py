"""Pseudo-spectral SQG simulation and inequality-verification toolkit."""

from .spectral import (
    Field,
    GridSpec,
    SpectralField,
    apply_lambda,
    dealias,
    gradient,
    inverse,
    make_grid,
    riesz_velocity,
    transform,
)
from .initial_data import DataRecipe, TruncationParams, build_truncated_data, generate_w0
from .solver import SimState, Trajectory, run_simulation
from .config import RunConfig, parse_config

__version__ = "0.1.0"

__all__ = [
    "Field",
    "GridSpec",
    "SpectralField",
    "apply_lambda",
    "dealias",
    "gradient",
    "inverse",
    "make_grid",
    "riesz_velocity",
    "transform",
    "DataRecipe",
    "TruncationParams",
    "build_truncated_data",
    "generate_w0",
    "SimState",
    "Trajectory",
    "run_simulation",
    "RunConfig",
    "parse_config",
    "__version__",
]
