"""
BUGS Regression Package

Bayesian univariate-guided sparse regression: a guided regularized-horseshoe
Gibbs/slice sampler for high-dimensional Gaussian linear models, the BUGS-Active
active-set approximation for ultra-high dimensions, synthetic benchmarks,
selection metrics and convergence diagnostics.
"""

from .active_set import ActiveSetConfig, build_active_set, run_mcmc_active
from .analysis import (
    Metrics,
    SelectionReport,
    compute_metrics,
    effective_sample_size,
    gelman_rubin,
    predict,
    summarize,
)
from .data import SyntheticTruth, generate_scenario, read_dataset, standardize
from .errors import BugsError, ConfigError, DataFormatError, NotPositiveDefiniteError, SamplerAbort
from .model import (
    Dataset,
    GuidanceConfig,
    GuidanceVector,
    Hyperparameters,
    ModelState,
    compute_guidance,
    effective_variance,
)
from .samplers import ChainStore, McmcConfig, SliceConfig, run_mcmc

__version__ = "1.0.0"

__all__ = [
    "ActiveSetConfig",
    "BugsError",
    "ChainStore",
    "ConfigError",
    "DataFormatError",
    "Dataset",
    "GuidanceConfig",
    "GuidanceVector",
    "Hyperparameters",
    "McmcConfig",
    "Metrics",
    "ModelState",
    "NotPositiveDefiniteError",
    "SamplerAbort",
    "SelectionReport",
    "SliceConfig",
    "SyntheticTruth",
    "build_active_set",
    "compute_guidance",
    "compute_metrics",
    "effective_sample_size",
    "effective_variance",
    "gelman_rubin",
    "generate_scenario",
    "predict",
    "read_dataset",
    "run_mcmc",
    "run_mcmc_active",
    "standardize",
    "summarize",
]
