"""Probe absorption and atom localization in a loop-driven four-level atom."""
from .errors import *  # noqa: F401,F403
from .model import (LevelScheme, ModelParams, ProbeContext, Susceptibility,  # noqa: F401
                    apply_level_scheme, chi_grid, compute_chi, compute_chi_gamma2zero,
                    compute_denominator, map_level_scheme)

__version__ = "0.1.0"
