"""Simulation of ruin probabilities for Cramer-Lundberg models whose claims
mix a light-tailed phase-type law with a heavy-tailed Pareto law."""

from .dists import GeometricLaw, MixtureExcess, PhaseType, ShiftedPareto
from .estimator import RuinProbabilityEstimator, check_capitals
from .estimators import (ALL_KINDS, EstimatorKind, EstimatorResult, SampleBatch, ak,
                         crude, cv_combine, cv_max, estimate_psi, estimate_remainder, simulate)
from .analysis import (error_bounds, explicit_term, heavy_tail_approx, psi_bounds,
                       tail_factor, variance_constants, z_n)
from .exceptions import (ConfigError, ConvergenceError, DomainError, InsufficientSampleError,
                         NetProfitError, RuinSimError, ValidationError)
from .model import DerivedRates, ModelParams, ccdf_d, derive_rates, g1, psi_d_exact
from .numerics import QuadratureSpec, expi, mat_exp, tail_of_sum
from .rng import rng_substream

__version__ = "0.1.0"
