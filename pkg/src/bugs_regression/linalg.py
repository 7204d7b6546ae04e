#!/usr/bin/env python3
"""
Dense linear-algebra kernels

Symmetric-positive-definite solves through a Cholesky factor, and the exact
fast draw from the Gaussian full conditional of beta that only ever factors an
n x n matrix (I_n + X D X^T), never a p x p one.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.random import Generator
from scipy.linalg import cho_solve, lapack

from .errors import NotPositiveDefiniteError
from .model import Dataset

logger = logging.getLogger(__name__)

SYMMETRY_RTOL = 1e-10
CHOLESKY_JITTER = 1e-10
# Columns of X processed per block when forming X D X^T; bounds the scratch copy.
GRAM_BLOCK_COLUMNS = 8192


@dataclass(frozen=True, eq=False)
class SpdMatrix:
    """Symmetric positive-definite matrix; definiteness is checked when it is factored"""

    entries: np.ndarray

    def __post_init__(self) -> None:
        a = self.entries
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"SPD matrix must be square, got shape {a.shape}")
        scale = max(float(np.max(np.abs(a))), 1.0) if a.size else 1.0
        if not np.allclose(a, a.T, rtol=0.0, atol=SYMMETRY_RTOL * scale):
            raise ValueError("SPD matrix is not symmetric")

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])


def _potrf(a: np.ndarray) -> Tuple[np.ndarray, int]:
    factor, info = lapack.dpotrf(a, lower=True, clean=True)
    return factor, int(info)


def cholesky_factor(a: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor; one retry with +1e-10 on the diagonal, then fail hard"""
    factor, info = _potrf(a)
    if info == 0:
        return factor
    if info < 0:
        raise ValueError(f"invalid argument {-info} passed to the Cholesky routine")

    logger.debug("Cholesky failed at pivot %d, retrying with jitter", info - 1)
    jittered = a.copy()
    jittered.flat[:: a.shape[0] + 1] += CHOLESKY_JITTER
    factor, info = _potrf(jittered)
    if info == 0:
        return factor
    raise NotPositiveDefiniteError(pivot=max(info, 1) - 1)


def solve_spd(M: SpdMatrix, B: np.ndarray) -> np.ndarray:
    """Solve M Z = B by Cholesky factor-then-substitute"""
    B = np.asarray(B, dtype=float)
    if B.shape[0] != M.dim:
        raise ValueError(f"right-hand side has {B.shape[0]} rows, expected {M.dim}")
    factor = cholesky_factor(np.asarray(M.entries, dtype=float))
    return cho_solve((factor, True), B, check_finite=False)


def scaled_gram(X: np.ndarray, d: np.ndarray) -> np.ndarray:
    """X diag(d) X^T built as (X D^1/2)(X D^1/2)^T over column blocks"""
    n, p = X.shape
    gram = np.zeros((n, n))
    root_d = np.sqrt(d)
    for start in range(0, p, GRAM_BLOCK_COLUMNS):
        stop = min(start + GRAM_BLOCK_COLUMNS, p)
        block = X[:, start:stop] * root_d[start:stop]
        gram += block @ block.T
    # symmetric by construction up to summation order
    return 0.5 * (gram + gram.T)


def sample_beta(
    data: Dataset, kappa_sq: np.ndarray, sigma_sq: float, rng: Generator
) -> np.ndarray:
    """One exact draw from N(m_beta, V_beta) with cost O(n^2 p + n^3)

    m_beta = (X^T X + D^-1)^-1 X^T y and V_beta = sigma^2 (X^T X + D^-1)^-1,
    D = diag(kappa_sq):
      u ~ N(0, sigma^2 D), delta ~ N(0, sigma^2 I_n), v = X u + delta,
      solve (X D X^T + I_n) w = y - v, return u + D X^T w.
    """
    X, y = data.X, data.y
    n, p = X.shape
    if kappa_sq.shape != (p,):
        raise ValueError(f"kappa_sq must have length {p}")
    if sigma_sq <= 0:
        raise ValueError("sigma_sq must be > 0")

    sigma = np.sqrt(sigma_sq)
    u = sigma * np.sqrt(kappa_sq) * rng.standard_normal(p)
    delta = sigma * rng.standard_normal(n)
    v = X @ u + delta

    system = scaled_gram(X, kappa_sq)
    system.flat[:: n + 1] += 1.0
    factor = cholesky_factor(system)
    w = cho_solve((factor, True), y - v, check_finite=False)
    return u + kappa_sq * (X.T @ w)
