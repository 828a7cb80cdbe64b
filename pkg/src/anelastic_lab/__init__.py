"""Pseudo-spectral laboratory for the low-Mach anelastic limit of degenerate
compressible Navier-Stokes flows."""

from .grid import Grid, GridError, make_grid
from .background import BackgroundError, BackgroundState, PhysParams, limit_fields, solve_background
from .helmholtz import HelmholtzError, HelmholtzResult, decompose, project_b
from .compressible import CFLError, CompressibleState, VacuumError, two_velocity
from .anelastic import AnelasticState
from .acoustic import AcousticError, AcousticOperator, AcousticState, build_operator
from .entropy import EntropyError, EntropyReport, TestState, kappa_entropy, relative_entropy
from .harness.config import ConfigError, RunConfig, default_config

__version__ = "0.1.0"
