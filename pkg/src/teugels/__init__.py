"""Kendall polynomials, additive processes and their polynomial martingales."""
from .cumulant_poly import (
    cumulants_from_moments,
    gamma,
    gamma_partial,
    gamma_partition_oracle,
    gamma_shift_expand,
    gamma_x1_coefficients,
    moments_from_cumulants,
)
from .kernels import BACKEND
from .polynomial import ExactPolynomial
from .martingale_lab import compensator_test, decomposition_residual, martingale_path, martingale_test
from .process_model import JumpAtom, ProcessSpec, cumulant_fn, harmonic_coefficients, load_spec, validate
from .simulator import simulate_batch, simulate_path, teugels, uniform_grid, variations

__version__ = "0.1.0"
