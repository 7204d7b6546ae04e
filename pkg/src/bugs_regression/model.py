#!/usr/bin/env python3
"""
Model core for Bayesian univariate-guided sparse regression

Holds the domain records shared by every other module, the guidance-statistic
pipeline (absolute marginal correlations -> stabilized, standardized and clipped
log scores) and the guided effective-variance map

    kappa^2(z; lambda, tau, c^2, eta) = c^2 A / (c^2 + A),  A = tau^2 lambda^2 exp(eta z)

which is evaluated in the log domain so that exp(eta z) tau^2 lambda^2 never overflows.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

MEAN_TOLERANCE = 1e-10
SD_TOLERANCE = 1e-8
DEGENERATE_SD = 1e-12


@dataclass(frozen=True)
class StandardizationStats:
    """Column and response location/scale needed to move between raw and standardized scales"""

    col_means: np.ndarray
    col_sds: np.ndarray
    y_mean: float
    y_sd: float
    column_names: Optional[Tuple[str, ...]] = None

    @property
    def p(self) -> int:
        return int(self.col_means.shape[0])


def apply_standardization(X_raw: np.ndarray, stats: StandardizationStats) -> np.ndarray:
    """Standardize new rows with statistics fitted elsewhere (e.g. on a training split)"""
    X_raw = np.atleast_2d(np.asarray(X_raw, dtype=float))
    if X_raw.shape[1] != stats.p:
        raise ValueError(f"expected {stats.p} predictor columns, got {X_raw.shape[1]}")
    return (X_raw - stats.col_means) / stats.col_sds


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix and response, with the statistics used to standardize them"""

    X: np.ndarray
    y: np.ndarray
    col_means: np.ndarray
    col_sds: np.ndarray
    y_mean: float
    y_sd: float
    standardized: bool
    column_names: Optional[Tuple[str, ...]] = None
    response_name: str = "y"

    def __post_init__(self) -> None:
        if self.X.ndim != 2:
            raise ValueError(f"X must be a matrix, got {self.X.ndim} dimensions")
        n, p = self.X.shape
        if n < 2 or p < 1:
            raise ValueError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if self.y.shape != (n,):
            raise ValueError(f"y must have length {n}, got shape {self.y.shape}")
        if self.col_means.shape != (p,) or self.col_sds.shape != (p,):
            raise ValueError("col_means and col_sds must have one entry per column")
        if self.column_names is not None and len(self.column_names) != p:
            raise ValueError("column_names must have one entry per column")
        if not (np.isfinite(self.X).all() and np.isfinite(self.y).all()):
            raise ValueError("X and y must not contain non-finite entries")
        if self.standardized:
            self._check_standardized()

    def _check_standardized(self) -> None:
        n = self.n
        means = self.X.mean(axis=0)
        sds = self.X.std(axis=0, ddof=1)
        worst_mean = int(np.argmax(np.abs(means)))
        if abs(means[worst_mean]) > MEAN_TOLERANCE:
            raise ValueError(
                f"column {worst_mean} has mean {means[worst_mean]:.3g}, expected 0"
            )
        worst_sd = int(np.argmax(np.abs(sds - 1.0)))
        if abs(sds[worst_sd] - 1.0) > SD_TOLERANCE:
            raise ValueError(f"column {worst_sd} has sd {sds[worst_sd]:.12g}, expected 1")
        if abs(self.y.sum() / n) > MEAN_TOLERANCE or abs(self.y.std(ddof=1) - 1.0) > SD_TOLERANCE:
            raise ValueError("response is flagged standardized but is not")

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def p(self) -> int:
        return int(self.X.shape[1])

    @property
    def stats(self) -> StandardizationStats:
        return StandardizationStats(
            col_means=self.col_means,
            col_sds=self.col_sds,
            y_mean=self.y_mean,
            y_sd=self.y_sd,
            column_names=self.column_names,
        )


@dataclass(frozen=True)
class GuidanceConfig:
    """Stabilizer added inside the log and the symmetric clipping bound"""

    epsilon_stabilizer: float = 1e-8
    clip_bound: float = 3.0

    def __post_init__(self) -> None:
        if not self.epsilon_stabilizer > 0:
            raise ValueError("epsilon_stabilizer must be > 0")
        if not self.clip_bound > 0:
            raise ValueError("clip_bound must be > 0")


@dataclass(frozen=True, eq=False)
class GuidanceVector:
    """Clipped standardized guidance statistic per predictor"""

    z_star: np.ndarray
    config: GuidanceConfig = field(default_factory=GuidanceConfig)

    def __post_init__(self) -> None:
        if self.z_star.ndim != 1:
            raise ValueError("z_star must be a vector")
        if not np.isfinite(self.z_star).all():
            raise ValueError("z_star must be finite")
        if self.z_star.size and np.max(np.abs(self.z_star)) > self.config.clip_bound:
            raise ValueError("z_star exceeds the clip bound")

    @property
    def p(self) -> int:
        return int(self.z_star.shape[0])

    @classmethod
    def uninformative(cls, p: int, config: Optional[GuidanceConfig] = None) -> "GuidanceVector":
        """All-zeros guidance; the prior then reduces to the regularized horseshoe"""
        return cls(np.zeros(p), config or GuidanceConfig())


@dataclass(frozen=True)
class Hyperparameters:
    """Prior hyperparameters: tau ~ C+(0, tau0), c^2 ~ IG(a_c, b_c), eta ~ N+(0, sigma_eta_sq),
    sigma^2 ~ IG(a_sigma, b_sigma)"""

    tau0: float = 1.0
    a_c: float = 2.0
    b_c: float = 8.0
    sigma_eta_sq: float = 1.0
    a_sigma: float = 1.0
    b_sigma: float = 1.0

    def __post_init__(self) -> None:
        for name in ("tau0", "a_c", "b_c", "sigma_eta_sq", "a_sigma", "b_sigma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value}")


@dataclass(frozen=True, eq=False)
class ModelState:
    """One MCMC state (beta, lambda_1..lambda_p, tau, c^2, eta, sigma^2)"""

    beta: np.ndarray
    lam: np.ndarray
    tau: float
    c_sq: float
    eta: float
    sigma_sq: float

    def __post_init__(self) -> None:
        if self.beta.shape != self.lam.shape:
            raise ValueError("beta and lam must have the same length")
        if not (np.isfinite(self.beta).all() and np.isfinite(self.lam).all()):
            raise ValueError("beta and lam must be finite")
        if self.lam.size and self.lam.min() <= 0:
            raise ValueError("every lambda must be > 0")
        for name in ("tau", "c_sq", "sigma_sq"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be > 0, got {value}")
        if not (math.isfinite(self.eta) and self.eta >= 0):
            raise ValueError(f"eta must be >= 0, got {self.eta}")

    @property
    def p(self) -> int:
        return int(self.beta.shape[0])

    @classmethod
    def initial(cls, p: int, fix_eta_zero: bool = False) -> "ModelState":
        """Neutral starting point: beta=0, lambda=1, tau=0.1, c^2=4, eta=0.1 (or 0), sigma^2=1"""
        return cls(
            beta=np.zeros(p),
            lam=np.ones(p),
            tau=0.1,
            c_sq=4.0,
            eta=0.0 if fix_eta_zero else 0.1,
            sigma_sq=1.0,
        )


def guidance_scores(data: Dataset) -> np.ndarray:
    """Absolute marginal correlations s_j = |x_j^T y| / n on standardized data"""
    if not data.standardized:
        raise ValueError("guidance scores need standardized data; call standardize() first")
    return np.abs(data.X.T @ data.y) / data.n


def guidance_statistics(s: np.ndarray, cfg: Optional[GuidanceConfig] = None) -> GuidanceVector:
    """Stabilize, standardize and clip the scores into a GuidanceVector

    Uses the sample sd (n-1 denominator) over the p log-scores. If that sd falls
    below 1e-12 the scores carry no ranking information and the all-zeros vector
    is returned.
    """
    cfg = cfg or GuidanceConfig()
    s = np.asarray(s, dtype=float)
    if s.ndim != 1 or s.shape[0] < 2:
        raise ValueError("need a vector of at least 2 scores")
    if not np.isfinite(s).all() or s.min() < 0:
        raise ValueError("scores must be finite and non-negative")

    log_scores = np.log(s + cfg.epsilon_stabilizer)
    sd = float(np.std(log_scores, ddof=1))
    if sd < DEGENERATE_SD:
        logger.info("Guidance scores are all equal; using uninformative guidance")
        return GuidanceVector(np.zeros_like(s), cfg)

    z = (log_scores - log_scores.mean()) / sd
    return GuidanceVector(np.clip(z, -cfg.clip_bound, cfg.clip_bound), cfg)


def compute_guidance(data: Dataset, cfg: Optional[GuidanceConfig] = None) -> GuidanceVector:
    """Scores followed by the clipped standardization, for a standardized dataset"""
    return guidance_statistics(guidance_scores(data), cfg)


def log_effective_variance(
    z: ArrayLike, lam: ArrayLike, tau: ArrayLike, c_sq: ArrayLike, eta: ArrayLike
) -> ArrayLike:
    """log kappa^2 = log c^2 + log A - logaddexp(log c^2, log A), log A = 2 log tau + 2 log lam + eta z"""
    log_a = 2.0 * np.log(tau) + 2.0 * np.log(lam) + np.multiply(eta, z)
    log_c_sq = np.log(c_sq)
    return log_c_sq + log_a - np.logaddexp(log_c_sq, log_a)


def effective_variance(
    z: ArrayLike, lam: ArrayLike, tau: ArrayLike, c_sq: ArrayLike, eta: ArrayLike
) -> ArrayLike:
    """Guided effective variance kappa^2 = c^2 A / (c^2 + A), broadcasting over arrays

    Always in (0, c^2). With eta = 0 it is the regularized-horseshoe variance
    c^2 tau^2 lambda^2 / (c^2 + tau^2 lambda^2).
    """
    result = np.exp(log_effective_variance(z, lam, tau, c_sq, eta))
    if np.ndim(result) == 0:
        return float(result)
    return result


def log_effective_variance_scalar(
    z: float, lam: float, tau: float, c_sq: float, eta: float
) -> float:
    """Scalar twin of log_effective_variance for the per-coordinate slice updates"""
    log_a = 2.0 * math.log(tau) + 2.0 * math.log(lam) + eta * z
    log_c_sq = math.log(c_sq)
    hi, lo = (log_a, log_c_sq) if log_a > log_c_sq else (log_c_sq, log_a)
    return log_c_sq + log_a - (hi + math.log1p(math.exp(lo - hi)))
