"""Spatial locality of optimal estimators for spatially invariant systems.

Fourier symbols of the plant go in; out come the gain symbol, its branch
points and decay rate, the physical-space kernel and the steady-state
error variance.
"""

from .casestudies import (CASES, CaseStudy, diffusion_correlated, diffusion_white, make_case,
                          nondimensionalize, swift_hohenberg)
from .errors import (AssumptionViolation, DivergenceError, GridError, InputError, KFLocalError,
                     NumericalError, PreconditionError, SingularityError)
from .kernel import (KernelSamples, covariance_kernel, default_grid, delta_strength,
                     evaluate_kernel, fit_decay_rate, heisenberg_check, inverse_transform,
                     normalized_variance, truncate)
from .laurent import Laurent
from .locus import bpl_sweep, branch_points, build_radicand, decay_rate
from .perf import (closed_form_diffusion, error_variance, monomial_scaling_exponents,
                   monomial_variance, monotonicity_sweep)
from .plantfile import load_plant, parse_plant
from .riccati import (FrequencyGrid, SpectralSolution, are_residual, gain_symbol, matching_test,
                      psd_error, solve_grid)
from .symbols import (PlantSpec, Polynomial, RationalSymbol, evaluate, extend, half_plane_sup,
                      monomial_form, real_part_poly, squared_magnitude, validate_plant)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
