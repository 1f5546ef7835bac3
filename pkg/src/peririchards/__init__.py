"""Chebyshev spectral solver for a peridynamic form of the 1-D Richards equation."""

__version__ = "0.1.0"

from .chebyshev import SpectralGrid, make_grid, forward_transform, inverse_transform, series_product  # noqa: E402
from .soil import SoilParams  # noqa: E402
from .kernel import KernelSpec, make_kernel  # noqa: E402
from .operator import StepFailure, build_workspace, rhs_spectral, rhs_quadrature_oracle  # noqa: E402
from .stepper import BoundaryConditions, Ramp, SimState, init_state, step, run  # noqa: E402
from .config import SimConfig, ConfigError, load_config, preset, dumps, loads  # noqa: E402

__all__ = [
    "SpectralGrid",
    "make_grid",
    "forward_transform",
    "inverse_transform",
    "series_product",
    "SoilParams",
    "KernelSpec",
    "make_kernel",
    "StepFailure",
    "build_workspace",
    "rhs_spectral",
    "rhs_quadrature_oracle",
    "BoundaryConditions",
    "Ramp",
    "SimState",
    "init_state",
    "step",
    "run",
    "SimConfig",
    "ConfigError",
    "load_config",
    "preset",
    "dumps",
    "loads",
]
