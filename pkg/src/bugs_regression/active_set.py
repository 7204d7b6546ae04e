#!/usr/bin/env python3
"""
BUGS-Active: active-set approximation for ultra-high dimensions

At every iteration the active set A_n is rebuilt as the union of
  1. the guidance budget: the K_g predictors with the largest |z*_j|, and
  2. the coordinates whose current |beta_j| exceeds the threshold t_n,
optionally capped by |beta_j| magnitude (guidance-budget members are never
evicted). Local scales are slice-updated only on A_n; every other lambda_j is
held at a small baseline, while beta and the global parameters are still
updated over all p coordinates.
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

from .model import Dataset, GuidanceVector, Hyperparameters, ModelState

if TYPE_CHECKING:
    from .samplers import ChainStore, McmcConfig

logger = logging.getLogger(__name__)

DEFAULT_BUDGET_FLOOR = 50
DEFAULT_BUDGET_FRACTION = 0.05
DEFAULT_BUDGET_CEILING = 10_000


@dataclass(frozen=True)
class ActiveSetConfig:
    """Guidance budget K_g, coefficient threshold t_n, optional cap and inactive baseline"""

    guidance_budget: int
    coef_threshold: float = 1e-4
    max_active: int = 0
    lambda_baseline: float = 1e-3

    def __post_init__(self) -> None:
        if self.guidance_budget < 0:
            raise ValueError("guidance_budget must be >= 0")
        if not self.coef_threshold > 0:
            raise ValueError("coef_threshold must be > 0")
        if self.max_active < 0:
            raise ValueError("max_active must be >= 0 (0 disables the cap)")
        if not self.lambda_baseline > 0:
            raise ValueError("lambda_baseline must be > 0")

    @staticmethod
    def default_budget(p: int) -> int:
        """max(50, ceil(0.05 p)) capped at 10^4, never more than p"""
        budget = max(DEFAULT_BUDGET_FLOOR, math.ceil(DEFAULT_BUDGET_FRACTION * p))
        return min(budget, DEFAULT_BUDGET_CEILING, p)

    @classmethod
    def for_dimension(
        cls,
        p: int,
        guidance_budget: Optional[int] = None,
        coef_threshold: float = 1e-4,
        max_active: int = 0,
        lambda_baseline: float = 1e-3,
    ) -> "ActiveSetConfig":
        """Config for p predictors, filling in the default guidance budget when none is given"""
        if guidance_budget is None:
            guidance_budget = cls.default_budget(p)
        return cls(guidance_budget, coef_threshold, max_active, lambda_baseline)


def guidance_top_indices(guidance: GuidanceVector, budget: int) -> np.ndarray:
    """Indices of the `budget` largest |z*_j|, ties broken by ascending index"""
    if budget > guidance.p:
        raise ValueError(f"guidance budget {budget} exceeds p={guidance.p}")
    order = np.argsort(-np.abs(guidance.z_star), kind="stable")
    return np.sort(order[:budget])


def build_active_set(
    state: ModelState,
    guidance: GuidanceVector,
    cfg: ActiveSetConfig,
    top_indices: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Sorted active set A_n for the current state

    ``top_indices`` lets a chain pass the guidance budget it computed once.
    """
    if state.p != guidance.p:
        raise ValueError("state and guidance dimensions differ")
    if top_indices is None:
        top_indices = guidance_top_indices(guidance, cfg.guidance_budget)

    magnitude = np.abs(state.beta)
    crossing = np.flatnonzero(magnitude > cfg.coef_threshold)
    active = np.union1d(top_indices, crossing)

    if cfg.max_active > 0 and active.size > cfg.max_active:
        extra = np.setdiff1d(crossing, top_indices, assume_unique=True)
        room = max(cfg.max_active - top_indices.size, 0)
        # largest |beta_j| first, ascending index among equal magnitudes
        order = np.lexsort((extra, -magnitude[extra]))
        active = np.union1d(top_indices, extra[order[:room]])
    return active


def run_mcmc_active(
    data: Dataset,
    guidance: GuidanceVector,
    hyper: Hyperparameters,
    mcmc_cfg: "McmcConfig",
    active_cfg: ActiveSetConfig,
    monitor: Optional[Callable[[int, np.ndarray], None]] = None,
) -> "ChainStore":
    """BUGS-Active sampler; ChainStore.active_sizes records |A_n| per iteration

    ``monitor(iteration, active_indices)`` is called once per iteration with
    the freshly built active set.
    """
    from .samplers import _run_chain

    if active_cfg.guidance_budget > data.p:
        raise ValueError(f"guidance budget {active_cfg.guidance_budget} exceeds p={data.p}")
    return _run_chain(data, guidance, hyper, mcmc_cfg, active_cfg, monitor)

