#!/usr/bin/env python3
"""
Posterior summaries, variable selection, metrics, prediction and convergence diagnostics

Selection follows the posterior exceedance rule: coordinate j is selected when
P(|beta_j| > delta | data), estimated by the fraction of kept draws, is at
least prob_cutoff. All coefficients are on the standardized scale unless a
function says otherwise.
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd

from .model import Dataset, StandardizationStats, apply_standardization
from .samplers import ChainStore

if TYPE_CHECKING:
    from .data import SyntheticTruth

logger = logging.getLogger(__name__)

DEFAULT_DELTA = 0.01
DEFAULT_PROB_CUTOFF = 0.5
CI_LEVEL = 0.95
MIN_DIAGNOSTIC_LENGTH = 10


@dataclass(frozen=True, eq=False)
class SelectionReport:
    """Per-coordinate posterior summaries and the selected set"""

    post_mean: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    sel_prob: np.ndarray
    selected: np.ndarray
    threshold_delta: float
    prob_cutoff: float

    def __post_init__(self) -> None:
        p = self.post_mean.shape[0]
        for name in ("ci_lower", "ci_upper", "sel_prob"):
            if getattr(self, name).shape != (p,):
                raise ValueError(f"{name} must have length {p}")
        if self.sel_prob.size and (self.sel_prob.min() < 0 or self.sel_prob.max() > 1):
            raise ValueError("sel_prob must lie in [0, 1]")
        expected = np.flatnonzero(self.sel_prob >= self.prob_cutoff)
        if not np.array_equal(np.sort(self.selected), expected):
            raise ValueError("selected must be exactly {j : sel_prob[j] >= prob_cutoff}")

    @property
    def p(self) -> int:
        return int(self.post_mean.shape[0])


@dataclass(frozen=True)
class Metrics:
    """Estimation, fit and selection quality of one run against the known truth"""

    rmse_beta: float
    mse_y: float
    tpr: float
    fpr: float
    fdr: float
    mcc: float
    runtime_sec: float = 0.0

    def __post_init__(self) -> None:
        for name in ("tpr", "fpr", "fdr"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not -1.0 <= self.mcc <= 1.0:
            raise ValueError("mcc must lie in [-1, 1]")

    def as_dict(self) -> Dict[str, float]:
        return {
            "rmse_beta": self.rmse_beta,
            "mse_y": self.mse_y,
            "tpr": self.tpr,
            "fpr": self.fpr,
            "fdr": self.fdr,
            "mcc": self.mcc,
            "runtime_sec": self.runtime_sec,
        }


class ConfusionCounts(NamedTuple):
    tp: int
    fp: int
    fn: int
    tn: int


def pool_chains(stores: Sequence[ChainStore]) -> ChainStore:
    """Stack the kept draws of several chains of the same model into one store"""
    if not stores:
        raise ValueError("need at least one chain")
    p = stores[0].p
    if any(s.p != p for s in stores):
        raise ValueError("chains disagree on the number of predictors")
    if len(stores) == 1:
        return stores[0]

    columns = np.unique(np.concatenate([s.beta_columns for s in stores]))
    blocks = []
    for s in stores:
        block = np.zeros((s.n_kept, columns.size))
        block[:, np.searchsorted(columns, s.beta_columns)] = s.beta_draws
        blocks.append(block)
    return ChainStore(
        beta_draws=np.vstack(blocks),
        tau_draws=np.concatenate([s.tau_draws for s in stores]),
        c_sq_draws=np.concatenate([s.c_sq_draws for s in stores]),
        eta_draws=np.concatenate([s.eta_draws for s in stores]),
        sigma_sq_draws=np.concatenate([s.sigma_sq_draws for s in stores]),
        lambda_final=np.empty(0),
        active_sizes=np.concatenate([s.active_sizes for s in stores]),
        beta_columns=columns,
        p=p,
        kept_iterations=np.concatenate([s.kept_iterations for s in stores]),
        runtime_sec=sum(s.runtime_sec for s in stores),
        lambda_update_sec=sum(s.lambda_update_sec for s in stores),
    )


def summarize(
    store: ChainStore,
    delta: float = DEFAULT_DELTA,
    prob_cutoff: float = DEFAULT_PROB_CUTOFF,
) -> SelectionReport:
    """Posterior mean, 95% equal-tailed interval and exceedance probability for every beta_j"""
    if store.n_kept == 0:
        raise ValueError("chain store holds no kept draws")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if not 0.0 <= prob_cutoff <= 1.0:
        raise ValueError("prob_cutoff must lie in [0, 1]")

    p, cols, draws = store.p, store.beta_columns, store.beta_draws
    post_mean = np.zeros(p)
    ci_lower = np.zeros(p)
    ci_upper = np.zeros(p)
    sel_prob = np.zeros(p)
    if cols.size:
        tail = (1.0 - CI_LEVEL) / 2.0
        post_mean[cols] = draws.mean(axis=0)
        lower, upper = np.quantile(draws, [tail, 1.0 - tail], axis=0, method="linear")
        ci_lower[cols] = lower
        ci_upper[cols] = upper
        sel_prob[cols] = (np.abs(draws) > delta).mean(axis=0)

    selected = np.flatnonzero(sel_prob >= prob_cutoff)
    logger.info(
        "Selected %d of %d predictors (delta=%g, cutoff=%g)", selected.size, p, delta, prob_cutoff
    )
    return SelectionReport(
        post_mean=post_mean,
        ci_lower=ci_lower,
        ci_upper=ci_upper,
        sel_prob=sel_prob,
        selected=selected,
        threshold_delta=float(delta),
        prob_cutoff=float(prob_cutoff),
    )


def selection_curve(
    store: ChainStore, deltas: Sequence[float], indices: Optional[Sequence[int]] = None
) -> pd.DataFrame:
    """P(|beta_j| > delta) for each delta (rows) and each requested coordinate (columns)"""
    if indices is None:
        indices = list(range(store.p))
    frame = pd.DataFrame(index=pd.Index(list(deltas), name="delta"))
    for j in indices:
        draws = np.abs(store.scalar_draws(f"beta_{j + 1}"))
        frame[f"beta_{j + 1}"] = [float((draws > d).mean()) for d in deltas]
    return frame


def raw_scale_coefficients(report: SelectionReport, stats: StandardizationStats) -> np.ndarray:
    """beta_raw_j = beta_j * y_sd / col_sd_j"""
    if stats.p != report.p:
        raise ValueError(f"stats describe {stats.p} predictors, report has {report.p}")
    return report.post_mean * stats.y_sd / stats.col_sds


def top_coefficients(
    report: SelectionReport, k: int = 10, stats: Optional[StandardizationStats] = None
) -> pd.DataFrame:
    """The k coordinates with the largest |posterior mean|, ties by ascending index"""
    order = np.argsort(-np.abs(report.post_mean), kind="stable")[:k]
    names = stats.column_names if stats is not None and stats.column_names else None
    frame = pd.DataFrame(
        {
            "index": order + 1,
            "predictor": [names[j] if names else f"x{j + 1}" for j in order],
            "post_mean": report.post_mean[order],
            "ci_lower": report.ci_lower[order],
            "ci_upper": report.ci_upper[order],
            "sel_prob": report.sel_prob[order],
            "selected": np.isin(order, report.selected),
        }
    )
    if stats is not None:
        frame["raw_effect"] = raw_scale_coefficients(report, stats)[order]
    return frame


def confusion_counts(selected: np.ndarray, support: np.ndarray, p: int) -> ConfusionCounts:
    chosen = np.zeros(p, dtype=bool)
    chosen[np.asarray(selected, dtype=int)] = True
    truth = np.zeros(p, dtype=bool)
    truth[np.asarray(support, dtype=int)] = True
    tp = int(np.sum(chosen & truth))
    fp = int(np.sum(chosen & ~truth))
    fn = int(np.sum(~chosen & truth))
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=p - tp - fp - fn)


def matthews_corrcoef(counts: ConfusionCounts) -> float:
    """Standard confusion-matrix MCC; 0 when any marginal is empty"""
    tp, fp, fn, tn = counts
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    mcc = (tp * tn - fp * fn) / math.sqrt(denom)
    return float(min(1.0, max(-1.0, mcc)))


def compute_metrics(
    report: SelectionReport, truth: "SyntheticTruth", store: ChainStore, data: Dataset
) -> Metrics:
    """RMSE of the posterior mean against the standardized-scale truth, in-sample MSE and selection rates"""
    if truth.p != report.p or data.p != report.p:
        raise ValueError("report, truth and data must describe the same predictors")
    p = report.p
    s0 = truth.support.size

    rmse_beta = float(np.sqrt(np.mean((report.post_mean - truth.beta0_std) ** 2)))
    residual = data.y - data.X @ report.post_mean
    mse_y = float(residual @ residual / data.n)

    counts = confusion_counts(report.selected, truth.support, p)
    tpr = counts.tp / s0 if s0 else 0.0
    fpr = counts.fp / (p - s0) if p > s0 else 0.0
    fdr = counts.fp / max(counts.tp + counts.fp, 1)
    return Metrics(
        rmse_beta=rmse_beta,
        mse_y=mse_y,
        tpr=tpr,
        fpr=fpr,
        fdr=fdr,
        mcc=matthews_corrcoef(counts),
        runtime_sec=store.runtime_sec,
    )


def aggregate_metrics(records: Sequence[Metrics]) -> Dict[str, float]:
    """Mean and standard error (sd / sqrt(R)) of every metric over replications"""
    if not records:
        raise ValueError("no replications to aggregate")
    frame = pd.DataFrame([m.as_dict() for m in records])
    out: Dict[str, float] = {}
    for name in frame.columns:
        values = frame[name].to_numpy(dtype=float)
        out[f"{name}_mean"] = float(values.mean())
        out[f"{name}_se"] = (
            float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
        )
    return out


def gelman_rubin(chains: Sequence[np.ndarray]) -> float:
    """Split-R-hat: every chain is halved, then sqrt(var_plus / W) over the 2m half-chains"""
    if len(chains) < 2:
        raise ValueError("Gelman-Rubin needs at least 2 chains")
    lengths = {len(c) for c in chains}
    if len(lengths) != 1:
        raise ValueError("chains must have equal kept length")
    length = lengths.pop()
    if length < MIN_DIAGNOSTIC_LENGTH:
        raise ValueError(f"chains must have at least {MIN_DIAGNOSTIC_LENGTH} kept draws")

    half = length // 2
    halves = []
    for c in chains:
        c = np.asarray(c, dtype=float)
        halves.append(c[:half])
        halves.append(c[length - half :])
    seq = np.vstack(halves)

    within = float(np.mean(np.var(seq, axis=1, ddof=1)))
    if within == 0.0:
        return 1.0
    between = half * float(np.var(seq.mean(axis=1), ddof=1))
    var_plus = (half - 1) / half * within + between / half
    return float(np.sqrt(var_plus / within))


def _autocorrelation(x: np.ndarray) -> np.ndarray:
    n = x.size
    centered = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(centered, size)
    acov = np.fft.irfft(spectrum * np.conj(spectrum), size)[:n]
    return acov / acov[0]


def effective_sample_size(draws: np.ndarray) -> float:
    """N / (1 + 2 sum rho_t), summing autocorrelation pairs until the first negative pair"""
    x = np.asarray(draws, dtype=float)
    n = x.size
    if n < MIN_DIAGNOSTIC_LENGTH:
        raise ValueError(f"need at least {MIN_DIAGNOSTIC_LENGTH} draws")
    if np.ptp(x) == 0.0:
        return float(n)

    rho = _autocorrelation(x)
    pair_sum = 0.0
    for k in range(0, n - 1, 2):
        gamma = rho[k] + rho[k + 1]
        if gamma < 0:
            break
        pair_sum += gamma
    # rho_0 = 1 is counted twice by the pairs
    tau = max(2.0 * pair_sum - 1.0, 1.0 / n)
    return float(n / tau)


def chain_diagnostics(
    stores: Sequence[ChainStore], parameters: Sequence[str]
) -> pd.DataFrame:
    """R-hat across chains (NaN for one chain) and ESS of every chain per parameter"""
    rows: List[Dict[str, object]] = []
    for name in parameters:
        draws = [s.scalar_draws(name) for s in stores]
        row: Dict[str, object] = {"parameter": name}
        row["rhat"] = gelman_rubin(draws) if len(draws) > 1 else float("nan")
        per_chain = [effective_sample_size(d) for d in draws]
        for k, ess in enumerate(per_chain):
            row[f"ess_chain_{k}"] = ess
        row["ess_total"] = float(sum(per_chain))
        rows.append(row)
    return pd.DataFrame(rows)


def predict(
    report: SelectionReport, X_new_raw: np.ndarray, stats: StandardizationStats
) -> np.ndarray:
    """Raw-scale predictions from the posterior mean: y_mean + y_sd * X_std beta_hat"""
    if stats.p != report.p:
        raise ValueError(f"report has {report.p} coefficients, statistics cover {stats.p}")
    X_std = apply_standardization(X_new_raw, stats)
    return stats.y_mean + stats.y_sd * (X_std @ report.post_mean)


def predictive_metrics(y_true: np.ndarray, y_pred: np.ndarray) -> Dict[str, float]:
    """RMSE, MAE, Pearson correlation and R^2 = 1 - SSE/SST"""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape or y_true.size < 2:
        raise ValueError("need matching vectors of at least 2 responses")
    error = y_true - y_pred
    sst = float(np.sum((y_true - y_true.mean()) ** 2))
    if np.ptp(y_pred) == 0.0 or sst == 0.0:
        corr = 0.0
    else:
        corr = float(np.corrcoef(y_true, y_pred)[0, 1])
    return {
        "rmse": float(np.sqrt(np.mean(error**2))),
        "mae": float(np.mean(np.abs(error))),
        "corr": corr,
        "r2": 1.0 - float(error @ error) / sst if sst > 0 else 0.0,
    }
