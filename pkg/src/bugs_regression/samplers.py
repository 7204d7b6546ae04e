#!/usr/bin/env python3
"""
MCMC samplers for the guided regularized-horseshoe model

Univariate slice sampler (stepping-out and shrinkage), the full conditionals of
every parameter, and the sweep shared by the full sampler and the active-set
approximation. Each sweep updates, in order:

    beta (fast Gaussian draw) -> sigma^2 (conjugate inverse gamma)
    -> lambda_j (slice on log lambda_j) -> tau (slice on log tau)
    -> c^2 (slice on log c^2) -> eta (slice on [0, inf), or held at 0)
"""

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Tuple

import numpy as np
from numpy.random import Generator, default_rng
from tqdm import tqdm

from .active_set import ActiveSetConfig, build_active_set, guidance_top_indices
from .errors import SamplerAbort
from .linalg import sample_beta
from .model import (
    Dataset,
    GuidanceVector,
    Hyperparameters,
    ModelState,
    effective_variance,
    log_effective_variance,
    log_effective_variance_scalar,
)

logger = logging.getLogger(__name__)

LogDensity = Callable[[float], float]
ActiveMonitor = Callable[[int, np.ndarray], None]

# Above this many predictors the active sampler keeps beta draws only for
# coordinates that were ever active (or crossed the storage threshold).
FULL_STORAGE_MAX_P = 10_000
# Sparse rows store every |beta_j| above min(t_n, this floor), so zero-filled
# entries never hide an exceedance of a selection threshold delta >= 0.01.
SPARSE_STORAGE_FLOOR = 1e-2


@dataclass(frozen=True)
class SliceConfig:
    """Stepping-out slice sampler tuning"""

    width: float = 1.0
    max_stepout: int = 50
    max_shrink: int = 100

    def __post_init__(self) -> None:
        if not self.width > 0:
            raise ValueError("slice width must be > 0")
        if self.max_stepout < 1 or self.max_shrink < 1:
            raise ValueError("max_stepout and max_shrink must be >= 1")


@dataclass(frozen=True)
class McmcConfig:
    """Chain length, thinning, seed and switches for one chain"""

    n_iter: int = 5000
    n_burnin: int = 1000
    thin: int = 1
    seed: int = 0
    slice: SliceConfig = field(default_factory=SliceConfig)
    fix_eta_zero: bool = False
    store_full_beta: bool = False
    show_progress: bool = False
    log_every: int = 500

    def __post_init__(self) -> None:
        if not self.n_iter > self.n_burnin >= 0:
            raise ValueError(
                f"need n_iter > n_burnin >= 0, got n_iter={self.n_iter}, n_burnin={self.n_burnin}"
            )
        if self.thin < 1:
            raise ValueError("thin must be >= 1")

    @property
    def n_kept(self) -> int:
        return (self.n_iter - self.n_burnin + self.thin - 1) // self.thin


@dataclass(eq=False)
class ChainStore:
    """Thinned post-burn-in draws of one chain

    beta_draws has one column per entry of beta_columns (0-based predictor
    indices). A coordinate that is not stored was inactive with |beta_j| at most
    min(t_n, SPARSE_STORAGE_FLOOR) at every kept iteration and summarizes as an
    exact zero, so exceedance probabilities are exact for any delta at or above
    that bound.
    """

    beta_draws: np.ndarray
    tau_draws: np.ndarray
    c_sq_draws: np.ndarray
    eta_draws: np.ndarray
    sigma_sq_draws: np.ndarray
    lambda_final: np.ndarray
    active_sizes: np.ndarray
    beta_columns: np.ndarray
    p: int
    kept_iterations: np.ndarray
    runtime_sec: float = 0.0
    lambda_update_sec: float = 0.0
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        kept = self.beta_draws.shape[0]
        for name in ("tau_draws", "c_sq_draws", "eta_draws", "sigma_sq_draws", "kept_iterations"):
            if getattr(self, name).shape != (kept,):
                raise ValueError(f"{name} must have {kept} rows")
        if self.beta_draws.shape[1] != self.beta_columns.shape[0]:
            raise ValueError("beta_draws needs one column per stored coordinate")

    @property
    def n_kept(self) -> int:
        return int(self.beta_draws.shape[0])

    def full_beta_draws(self) -> np.ndarray:
        """kept x p matrix with unstored coordinates filled by zeros"""
        full = np.zeros((self.n_kept, self.p))
        full[:, self.beta_columns] = self.beta_draws
        return full

    def scalar_draws(self, name: str) -> np.ndarray:
        """Draws of tau, c_sq, eta, sigma_sq or beta_<j> (1-based j)"""
        if name.startswith("beta_"):
            j = int(name[len("beta_"):]) - 1
            hits = np.flatnonzero(self.beta_columns == j)
            if hits.size == 0:
                return np.zeros(self.n_kept)
            return self.beta_draws[:, hits[0]]
        return getattr(self, f"{name}_draws")


def slice_sample(
    log_density: LogDensity,
    x0: float,
    cfg: SliceConfig,
    rng: Generator,
    lower: Optional[float] = None,
) -> float:
    """One stepping-out and shrinkage slice update that leaves the target invariant

    ``lower`` clamps the left interval edge at a hard support boundary. If no
    acceptable point is found within ``max_shrink`` proposals, x0 (which is
    always inside the slice) is returned.
    """
    log_fx0 = log_density(x0)
    if not math.isfinite(log_fx0):
        raise ValueError(f"log density is not finite at the current point {x0}")
    log_y = log_fx0 - rng.exponential(1.0)

    left = x0 - cfg.width * rng.uniform()
    right = left + cfg.width
    steps_left = int(rng.integers(0, cfg.max_stepout))
    steps_right = cfg.max_stepout - 1 - steps_left
    if lower is not None:
        left = max(left, lower)

    while steps_left > 0 and log_density(left) > log_y:
        if lower is not None and left <= lower:
            break
        left -= cfg.width
        if lower is not None:
            left = max(left, lower)
        steps_left -= 1
    while steps_right > 0 and log_density(right) > log_y:
        right += cfg.width
        steps_right -= 1

    for _ in range(cfg.max_shrink):
        x1 = left + (right - left) * rng.uniform()
        if log_density(x1) > log_y:
            return x1
        if x1 < x0:
            left = x1
        else:
            right = x1
    logger.debug("Slice shrinkage exhausted after %d proposals", cfg.max_shrink)
    return x0


def sigma_sq_posterior_params(
    state: ModelState, data: Dataset, kappa_sq: np.ndarray, hyper: Hyperparameters
) -> Tuple[float, float]:
    """Shape and rate of the conjugate inverse-gamma conditional of sigma^2"""
    residual = data.y - data.X @ state.beta
    shape = hyper.a_sigma + 0.5 * (data.n + data.p)
    rate = (
        hyper.b_sigma
        + 0.5 * float(residual @ residual)
        + 0.5 * float(np.sum(state.beta**2 / kappa_sq))
    )
    return shape, rate


def update_sigma_sq(
    state: ModelState,
    data: Dataset,
    kappa_sq: np.ndarray,
    hyper: Hyperparameters,
    rng: Generator,
) -> float:
    """Draw sigma^2 ~ IG(a + (n+p)/2, b + ||y - X beta||^2 / 2 + sum beta_j^2 / (2 kappa_j^2))"""
    shape, rate = sigma_sq_posterior_params(state, data, kappa_sq, hyper)
    return 1.0 / rng.gamma(shape=shape, scale=1.0 / rate)


def log_cond_lambda_j(
    lambda_j: float,
    state: ModelState,
    data_j: Tuple[float, float],
    hyper: Hyperparameters,
) -> float:
    """-log(kappa_j^2)/2 - beta_j^2 / (2 sigma^2 kappa_j^2) - log(1 + lambda_j^2), up to a constant

    ``data_j`` is (beta_j, z_j). The half-Cauchy(0, 1) prior on lambda_j has no
    hyperparameter; ``hyper`` is accepted for a uniform conditional signature.
    """
    if not lambda_j > 0:
        return -math.inf
    beta_j, z_j = data_j
    log_k = log_effective_variance_scalar(z_j, lambda_j, state.tau, state.c_sq, state.eta)
    return (
        -0.5 * log_k
        - beta_j * beta_j / (2.0 * state.sigma_sq * math.exp(log_k))
        - math.log1p(lambda_j * lambda_j)
    )


def _gaussian_sum(
    state: ModelState, guidance: GuidanceVector, tau: float, c_sq: float, eta: float
) -> float:
    log_k = log_effective_variance(guidance.z_star, state.lam, tau, c_sq, eta)
    return float(
        np.sum(-0.5 * log_k - state.beta**2 / (2.0 * state.sigma_sq) * np.exp(-log_k))
    )


def log_cond_tau(
    tau: float, state: ModelState, guidance: GuidanceVector, hyper: Hyperparameters
) -> float:
    """Gaussian factors over all p coordinates plus the half-Cauchy(0, tau0) log prior"""
    if not tau > 0:
        return -math.inf
    prior = -math.log1p((tau / hyper.tau0) ** 2)
    return _gaussian_sum(state, guidance, tau, state.c_sq, state.eta) + prior


def log_cond_c_sq(
    c_sq: float, state: ModelState, guidance: GuidanceVector, hyper: Hyperparameters
) -> float:
    """Gaussian factors plus the IG(a_c, b_c) log prior"""
    if not c_sq > 0:
        return -math.inf
    prior = -(hyper.a_c + 1.0) * math.log(c_sq) - hyper.b_c / c_sq
    return _gaussian_sum(state, guidance, state.tau, c_sq, state.eta) + prior


def log_cond_eta(
    eta: float, state: ModelState, guidance: GuidanceVector, hyper: Hyperparameters
) -> float:
    """Gaussian factors plus the half-normal(0, sigma_eta_sq) log prior on eta >= 0"""
    if not eta >= 0:
        return -math.inf
    prior = -(eta * eta) / (2.0 * hyper.sigma_eta_sq)
    return _gaussian_sum(state, guidance, state.tau, state.c_sq, eta) + prior


def _check_scalar(iteration: int, name: str, value: float, allow_zero: bool = False) -> None:
    ok = math.isfinite(value) and (value >= 0 if allow_zero else value > 0)
    if not ok:
        raise SamplerAbort(iteration, name, f"value {value}")


def _check_vector(iteration: int, name: str, values: np.ndarray, positive: bool) -> None:
    if not np.isfinite(values).all() or (positive and values.min() <= 0):
        raise SamplerAbort(iteration, name, "non-finite or out-of-support entry")


def run_mcmc(
    data: Dataset,
    guidance: GuidanceVector,
    hyper: Hyperparameters,
    cfg: McmcConfig,
) -> ChainStore:
    """Full BUGS sampler: every local scale is updated at every iteration"""
    return _run_chain(data, guidance, hyper, cfg, active_cfg=None, monitor=None)


def _run_chain(
    data: Dataset,
    guidance: GuidanceVector,
    hyper: Hyperparameters,
    cfg: McmcConfig,
    active_cfg: Optional[ActiveSetConfig],
    monitor: Optional[ActiveMonitor],
) -> ChainStore:
    if not data.standardized:
        raise ValueError("the sampler needs standardized data")
    if guidance.p != data.p:
        raise ValueError(f"guidance has {guidance.p} entries, data has {data.p} columns")

    n, p = data.n, data.p
    z = guidance.z_star
    rng = default_rng(cfg.seed)
    state = ModelState.initial(p, cfg.fix_eta_zero)
    beta, lam = state.beta.copy(), state.lam.copy()
    tau, c_sq, eta, sigma_sq = state.tau, state.c_sq, state.eta, state.sigma_sq

    top_indices = np.arange(p)
    sparse_storage = False
    if active_cfg is not None:
        top_indices = guidance_top_indices(guidance, active_cfg.guidance_budget)
        sparse_storage = p > FULL_STORAGE_MAX_P and not cfg.store_full_beta
        # start outside the guidance budget at the inactive baseline
        lam = np.full(p, active_cfg.lambda_baseline)
        lam[top_indices] = state.lam[top_indices]
    mode = "active-set" if active_cfg is not None else "full"

    n_kept = cfg.n_kept
    tau_draws = np.empty(n_kept)
    c_sq_draws = np.empty(n_kept)
    eta_draws = np.empty(n_kept)
    sigma_sq_draws = np.empty(n_kept)
    kept_iterations = np.empty(n_kept, dtype=int)
    beta_dense = None if sparse_storage else np.empty((n_kept, p))
    sparse_rows: List[Tuple[np.ndarray, np.ndarray]] = []
    storage_threshold = (
        min(active_cfg.coef_threshold, SPARSE_STORAGE_FLOOR) if active_cfg is not None else 0.0
    )
    active_sizes: List[int] = []
    lambda_seconds = 0.0

    logger.info(
        "Starting %s chain: n=%d, p=%d, iterations=%d, burn-in=%d, thin=%d, seed=%d",
        mode, n, p, cfg.n_iter, cfg.n_burnin, cfg.thin, cfg.seed,
    )
    started = time.perf_counter()
    keep_i = 0
    iterations = tqdm(
        range(cfg.n_iter), desc=f"BUGS ({mode})", disable=not cfg.show_progress
    )
    for it in iterations:
        # 1) beta
        kappa_sq = effective_variance(z, lam, tau, c_sq, eta)
        beta = sample_beta(data, kappa_sq, sigma_sq, rng)
        _check_vector(it, "beta", beta, positive=False)

        # 2) sigma^2
        state = ModelState(beta, lam, tau, c_sq, eta, sigma_sq)
        sigma_sq = update_sigma_sq(state, data, kappa_sq, hyper, rng)
        _check_scalar(it, "sigma_sq", sigma_sq)

        # 3) local scales
        lambda_started = time.perf_counter()
        state = ModelState(beta, lam, tau, c_sq, eta, sigma_sq)
        if active_cfg is None:
            update_indices = top_indices
            lam = state.lam.copy()
        else:
            update_indices = build_active_set(state, guidance, active_cfg, top_indices)
            active_sizes.append(int(update_indices.size))
            if monitor is not None:
                monitor(it, update_indices)
            lam = np.full(p, active_cfg.lambda_baseline)
            lam[update_indices] = state.lam[update_indices]
        for j in update_indices:
            data_j = (float(beta[j]), float(z[j]))

            def log_target(u: float, data_j: Tuple[float, float] = data_j) -> float:
                return log_cond_lambda_j(math.exp(u), state, data_j, hyper) + u

            lam[j] = math.exp(slice_sample(log_target, math.log(lam[j]), cfg.slice, rng))
        lambda_seconds += time.perf_counter() - lambda_started
        _check_vector(it, "lambda", lam, positive=True)

        # 4) global scale
        state = ModelState(beta, lam, tau, c_sq, eta, sigma_sq)
        tau = math.exp(
            slice_sample(
                lambda v: log_cond_tau(math.exp(v), state, guidance, hyper) + v,
                math.log(tau), cfg.slice, rng,
            )
        )
        _check_scalar(it, "tau", tau)

        # 5) slab
        state = replace(state, tau=tau)
        c_sq = math.exp(
            slice_sample(
                lambda v: log_cond_c_sq(math.exp(v), state, guidance, hyper) + v,
                math.log(c_sq), cfg.slice, rng,
            )
        )
        _check_scalar(it, "c_sq", c_sq)

        # 6) guidance strength
        if not cfg.fix_eta_zero:
            state = replace(state, c_sq=c_sq)
            eta = slice_sample(
                lambda e: log_cond_eta(e, state, guidance, hyper),
                eta, cfg.slice, rng, lower=0.0,
            )
            _check_scalar(it, "eta", eta, allow_zero=True)

        if cfg.log_every and (it + 1) % cfg.log_every == 0:
            logger.debug(
                "iteration %d: tau=%.4g c_sq=%.4g eta=%.4g sigma_sq=%.4g%s",
                it + 1, tau, c_sq, eta, sigma_sq,
                f" |A|={active_sizes[-1]}" if active_sizes else "",
            )

        if it >= cfg.n_burnin and (it - cfg.n_burnin) % cfg.thin == 0:
            if beta_dense is not None:
                beta_dense[keep_i] = beta
            else:
                assert active_cfg is not None
                stored = np.union1d(
                    update_indices, np.flatnonzero(np.abs(beta) > storage_threshold)
                )
                sparse_rows.append((stored, beta[stored]))
            tau_draws[keep_i] = tau
            c_sq_draws[keep_i] = c_sq
            eta_draws[keep_i] = eta
            sigma_sq_draws[keep_i] = sigma_sq
            kept_iterations[keep_i] = it
            keep_i += 1

    runtime = time.perf_counter() - started
    if beta_dense is not None:
        beta_columns = np.arange(p)
        beta_draws = beta_dense
    else:
        beta_columns, beta_draws = _densify(sparse_rows, n_kept)
    logger.info(
        "Finished %s chain (seed=%d) in %.2fs; local-scale updates took %.2fs",
        mode, cfg.seed, runtime, lambda_seconds,
    )
    return ChainStore(
        beta_draws=beta_draws,
        tau_draws=tau_draws,
        c_sq_draws=c_sq_draws,
        eta_draws=eta_draws,
        sigma_sq_draws=sigma_sq_draws,
        lambda_final=lam.copy(),
        active_sizes=np.asarray(active_sizes, dtype=int),
        beta_columns=beta_columns,
        p=p,
        kept_iterations=kept_iterations,
        runtime_sec=runtime,
        lambda_update_sec=lambda_seconds,
        seed=cfg.seed,
    )


def _densify(
    rows: List[Tuple[np.ndarray, np.ndarray]], n_kept: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Collapse per-iteration (indices, values) rows onto the union of their columns"""
    if not rows:
        return np.arange(0), np.zeros((n_kept, 0))
    columns = np.unique(np.concatenate([idx for idx, _ in rows]))
    draws = np.zeros((n_kept, columns.size))
    for i, (idx, values) in enumerate(rows):
        draws[i, np.searchsorted(columns, idx)] = values
    return columns, draws
