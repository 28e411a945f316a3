"""Spectral gaps, Lyapunov-Schmidt coefficients and Riesz-basis diagnostics for 1D periodic Dirac operators."""

from .errors import NumericalFailure, PotentialParseError
from .potentials import (FourierPotential, Weight, classify_symmetry, example_c15, load_potential,
                         potential_from_coeffs, xt_potential, zero_potential)

__version__ = "0.1.0"

__all__ = [
    "FourierPotential", "Weight", "NumericalFailure", "PotentialParseError", "classify_symmetry",
    "example_c15", "load_potential", "potential_from_coeffs", "xt_potential", "zero_potential",
]
