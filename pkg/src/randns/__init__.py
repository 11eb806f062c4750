"""Spectral simulation and verification toolkit for periodic Navier-Stokes
with randomized rough initial data."""

__version__ = "0.1.0"

from .fields import (SpectralField, abc_flow, field_from_modes, load_snsf,
                     random_field, save_snsf, single_pair_field,
                     supercritical_profile, taylor_green, zero_field)
from .grid import GridSpec
from .randomize import MultiplierLaw, SeedSpec, randomize, sample_multipliers
from .spectral import (fractional_laplacian, leray_project, lp_norm,
                       nonlinear_term, sobolev_norm)

__all__ = [
    "GridSpec", "SpectralField", "MultiplierLaw", "SeedSpec",
    "zero_field", "field_from_modes", "single_pair_field", "taylor_green",
    "abc_flow", "supercritical_profile", "random_field",
    "save_snsf", "load_snsf",
    "leray_project", "sobolev_norm", "lp_norm", "fractional_laplacian",
    "nonlinear_term", "randomize", "sample_multipliers",
]
