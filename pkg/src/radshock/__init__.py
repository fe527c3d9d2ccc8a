"""Traveling-wave shock profiles of a gas coupled to stationary radiative diffusion."""

from .baby import BabySystem, baby_energy_check, baby_reduced
from .errors import RadShockError
from .gas import (GasConstants, GasState, ShockData, lax_check, shock_from_amplitude,
                  small_shock_limits, thermo)
from .glue import Profile, glue, reconstruct, resample, xi_of_eta
from .manifold import ManifoldOptions, Trajectory, integrate_manifold
from .pipeline import PipelineOptions, baby_profile, gas_profile, summary
from .reduced import (ReducedSystem, build_reduced, equilibria, f_derivatives, nullclines,
                      vector_field)
from .verify import (convolution_n, convolution_q, ell1_measured, expansion_coeffs, expansion_fit,
                     gamma_condition, integral_residual, ode_residual, regularity_order)

__all__ = [
    "BabySystem", "GasConstants", "GasState", "ManifoldOptions", "PipelineOptions", "Profile",
    "RadShockError", "ReducedSystem", "ShockData", "Trajectory", "baby_energy_check",
    "baby_profile", "baby_reduced", "build_reduced", "convolution_n", "convolution_q",
    "ell1_measured", "equilibria", "expansion_coeffs", "expansion_fit", "f_derivatives", "gamma_condition",
    "gas_profile", "glue", "integral_residual", "integrate_manifold", "lax_check",
    "nullclines", "ode_residual", "reconstruct", "regularity_order", "resample",
    "shock_from_amplitude", "small_shock_limits", "summary", "thermo", "vector_field",
    "xi_of_eta",
]
