"""Free deconvolution of spectra from noisy observations."""
__version__ = "0.1.0"

from .additive_solver import CauchyEstimate, additive_cauchy_estimator, solve_subordination_additive
from .bounds import BoundInputs, BoundReport, bound
from .cauchy_deconv import (
    AtomicEstimate,
    DensityEstimate,
    choose_cutoff,
    fourier_deconvolve,
    sparse_deconvolve,
    wasserstein1,
)
from .errors import DeconvError
from .moments import (
    MomentSet,
    NoiseModel,
    finite_n_mixed_moment,
    free_cumulants_to_moments,
    moment_set,
    moments_to_free_cumulants,
)
from .multiplicative_solver import (
    StabilityProfile,
    compute_profile,
    multiplicative_cauchy_estimator,
    reduce_model,
)
from .randmat import ModelSpec, preset, run_experiment, sample_model
from .transforms import (
    Atomic,
    Empirical,
    GridDensity,
    MarchenkoPastur,
    Semicircle,
    cauchy_density,
    cauchy_smooth,
    stieltjes,
)

__all__ = [
    "Atomic", "AtomicEstimate", "BoundInputs", "BoundReport", "CauchyEstimate", "DeconvError",
    "DensityEstimate", "Empirical", "GridDensity", "MarchenkoPastur", "ModelSpec", "MomentSet",
    "NoiseModel", "Semicircle", "StabilityProfile", "additive_cauchy_estimator", "bound",
    "cauchy_density", "cauchy_smooth", "choose_cutoff", "compute_profile",
    "finite_n_mixed_moment", "fourier_deconvolve", "free_cumulants_to_moments", "moment_set",
    "moments_to_free_cumulants", "multiplicative_cauchy_estimator", "preset", "reduce_model",
    "run_experiment", "sample_model", "solve_subordination_additive", "sparse_deconvolve",
    "stieltjes", "wasserstein1",
]
