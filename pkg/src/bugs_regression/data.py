#!/usr/bin/env python3
"""
Datasets: standardization, synthetic benchmarks and delimited-text I/O

Scenario 1 draws independent standard normal predictors; Scenario 2 draws
rows with Toeplitz correlation rho^|i-j| through the AR(1) recursion
x_1 ~ N(0, 1), x_j = rho x_{j-1} + sqrt(1 - rho^2) e_j, which is exact and
needs O(np) memory. The response is y = X beta0 + eps, eps ~ N(0, sigma^2 I),
generated on the raw scale before X and y are standardized.

Files are comma-separated with one header row. Chain files with a ``.gz``
suffix are gzip-compressed transparently.
"""

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .analysis import SelectionReport
from .errors import DataFormatError
from .model import Dataset, StandardizationStats
from .samplers import ChainStore

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
ColumnRef = Union[str, int]

SIGNAL_VALUES = (2.5, -2.0, 1.8, -1.5, 1.2, 1.0, -0.9, 0.8, 0.7, -0.7)
CONSTANT_SD = 1e-12
FLOAT_FORMAT = "%.17g"
SCALAR_CHAIN_COLUMNS = ("tau", "c_sq", "eta", "sigma_sq")


@dataclass(frozen=True, eq=False)
class SyntheticTruth:
    """Generating coefficients (raw scale), their standardized-scale image, support and noise"""

    beta0: np.ndarray
    support: np.ndarray
    sigma_noise: float
    rho: float
    beta0_std: np.ndarray

    def __post_init__(self) -> None:
        if not np.array_equal(self.support, np.flatnonzero(self.beta0)):
            raise ValueError("support must be exactly the nonzero coordinates of beta0")
        if not self.sigma_noise > 0:
            raise ValueError("sigma_noise must be > 0")
        if not 0 <= self.rho < 1:
            raise ValueError("rho must be in [0, 1)")

    @property
    def p(self) -> int:
        return int(self.beta0.shape[0])


def standardize(
    X_raw: np.ndarray,
    y_raw: np.ndarray,
    column_names: Optional[Sequence[str]] = None,
    response_name: str = "y",
    copy: bool = True,
) -> Dataset:
    """Center and scale every column and the response to unit sample sd

    With ``copy=False`` the float64 input X is overwritten.
    """
    X = np.array(X_raw, dtype=float) if copy else np.asarray(X_raw, dtype=float)
    y = np.array(y_raw, dtype=float)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError(f"X must be n x p and y of length n, got {X.shape} and {y.shape}")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 observations")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("X and y must be finite")

    col_means = X.mean(axis=0)
    col_sds = X.std(axis=0, ddof=1)
    constant = np.flatnonzero(col_sds <= CONSTANT_SD)
    if constant.size:
        raise ValueError(f"column {int(constant[0])} is constant and cannot be standardized")
    y_mean = float(y.mean())
    y_sd = float(y.std(ddof=1))
    if y_sd <= CONSTANT_SD:
        raise ValueError("response is constant and cannot be standardized")

    X -= col_means
    X /= col_sds
    # second centering pass removes rounding left by large offsets
    X -= X.mean(axis=0)
    y = (y - y_mean) / y_sd
    y -= y.mean()

    return Dataset(
        X=X,
        y=y,
        col_means=col_means,
        col_sds=col_sds,
        y_mean=y_mean,
        y_sd=y_sd,
        standardized=True,
        column_names=tuple(column_names) if column_names is not None else None,
        response_name=response_name,
    )


def unstandardize(data: Dataset) -> Tuple[np.ndarray, np.ndarray]:
    """Raw-scale (X, y) recovered from a standardized dataset"""
    X_raw = data.X * data.col_sds + data.col_means
    y_raw = data.y * data.y_sd + data.y_mean
    return X_raw, y_raw


def default_column_names(p: int) -> Tuple[str, ...]:
    return tuple(f"x{j + 1}" for j in range(p))


def generate_scenario(
    n: int,
    p: int,
    rho: float,
    seed: int,
    n_signals: int = len(SIGNAL_VALUES),
    sigma_noise: float = 1.0,
) -> Tuple[Dataset, SyntheticTruth]:
    """Simulate a benchmark dataset: rho = 0 is Scenario 1, rho > 0 the Toeplitz Scenario 2"""
    if p < len(SIGNAL_VALUES):
        raise ValueError(f"p must be >= {len(SIGNAL_VALUES)} to place the signal, got {p}")
    if not 0 <= rho < 1:
        raise ValueError(f"rho must be in [0, 1), got {rho}")
    if not 1 <= n_signals <= len(SIGNAL_VALUES):
        raise ValueError(f"n_signals must be between 1 and {len(SIGNAL_VALUES)}")

    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    if rho > 0:
        innovation_scale = np.sqrt(1.0 - rho * rho)
        for j in range(1, p):
            X[:, j] *= innovation_scale
            X[:, j] += rho * X[:, j - 1]

    beta0 = np.zeros(p)
    beta0[:n_signals] = SIGNAL_VALUES[:n_signals]
    y = X[:, :n_signals] @ beta0[:n_signals] + sigma_noise * rng.standard_normal(n)

    data = standardize(X, y, default_column_names(p), copy=False)
    truth = SyntheticTruth(
        beta0=beta0,
        support=np.arange(n_signals),
        sigma_noise=sigma_noise,
        rho=rho,
        beta0_std=beta0 * data.col_sds / data.y_sd,
    )
    logger.info("Generated scenario n=%d p=%d rho=%.3g seed=%d", n, p, rho, seed)
    return data, truth


def train_test_split(
    X_raw: np.ndarray,
    y_raw: np.ndarray,
    test_fraction: float = 0.2,
    seed: int = 0,
    column_names: Optional[Sequence[str]] = None,
    response_name: str = "y",
) -> Tuple[Dataset, np.ndarray, np.ndarray]:
    """Random split; standardization (and hence guidance) is fit on the training rows only"""
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must be in (0, 1)")
    n = X_raw.shape[0]
    n_test = int(round(test_fraction * n))
    if n_test < 1 or n - n_test < 2:
        raise ValueError(f"cannot split {n} rows with test_fraction={test_fraction}")
    order = np.random.default_rng(seed).permutation(n)
    test_rows, train_rows = np.sort(order[:n_test]), np.sort(order[n_test:])
    train = standardize(X_raw[train_rows], y_raw[train_rows], column_names, response_name)
    return train, X_raw[test_rows], y_raw[test_rows]


def _resolve_column(columns: List[str], ref: ColumnRef) -> str:
    if isinstance(ref, int) or (isinstance(ref, str) and ref not in columns and ref.isdigit()):
        index = int(ref)
        if not 0 <= index < len(columns):
            raise DataFormatError(f"response column index {index} out of range")
        return columns[index]
    if ref not in columns:
        raise DataFormatError("missing response column", column=str(ref))
    return str(ref)


def _read_numeric_frame(path: Path) -> pd.DataFrame:
    if not path.exists():
        raise FileNotFoundError(f"Dataset file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError as e:
        raise DataFormatError(f"{path.name} is empty") from e
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        row = int(match.group(1)) if match else None
        raise DataFormatError(f"ragged row in {path.name}", row=row) from e

    columns = [str(c) for c in frame.columns]
    if frame.isna().any().any():
        r, c = np.argwhere(frame.isna().to_numpy())[0]
        raise DataFormatError("row has too few fields", row=int(r) + 2, column=columns[c])

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    invalid = numeric.isna().to_numpy() | ~np.isfinite(numeric.to_numpy(dtype=float))
    if invalid.any():
        r, c = np.argwhere(invalid)[0]
        raise DataFormatError(
            f"non-numeric cell '{frame.iat[r, c]}'", row=int(r) + 2, column=columns[c]
        )
    numeric.columns = columns
    return numeric


def read_raw_table(
    path: PathLike, response_column: ColumnRef = "y"
) -> Tuple[np.ndarray, np.ndarray, Tuple[str, ...], str]:
    """Parse a numeric CSV into raw (X, y, predictor names, response name)

    ``response_column`` is a header name or a 0-based column index. File rows
    in error messages count the header as row 1.
    """
    path = Path(path)
    numeric = _read_numeric_frame(path)
    columns = list(numeric.columns)
    response = _resolve_column(columns, response_column)
    predictors = [c for c in columns if c != response]
    if not predictors:
        raise DataFormatError("no predictor columns besides the response")
    X_raw = numeric[predictors].to_numpy(dtype=float)
    y_raw = numeric[response].to_numpy(dtype=float)
    logger.info("Read %s: n=%d, p=%d, response=%s", path.name, *X_raw.shape, response)
    return X_raw, y_raw, tuple(predictors), response


def read_prediction_table(
    path: PathLike, response_column: str = "y"
) -> Tuple[np.ndarray, Optional[np.ndarray], Tuple[str, ...]]:
    """Predictor rows for scoring; the response is returned only when its column is present"""
    path = Path(path)
    numeric = _read_numeric_frame(path)
    columns = list(numeric.columns)
    if response_column in columns:
        y_raw: Optional[np.ndarray] = numeric[response_column].to_numpy(dtype=float)
        columns.remove(response_column)
    else:
        y_raw = None
    return numeric[columns].to_numpy(dtype=float), y_raw, tuple(columns)


def read_dataset(path: PathLike, response_column: ColumnRef = "y") -> Dataset:
    """Read a CSV and standardize it"""
    X_raw, y_raw, names, response = read_raw_table(path, response_column)
    return standardize(X_raw, y_raw, names, response, copy=False)


def write_dataset(data: Dataset, path: PathLike, raw_scale: bool = True) -> None:
    """Write X and y with the predictor names as header, back on the raw scale by default"""
    names = data.column_names or default_column_names(data.p)
    X, y = unstandardize(data) if raw_scale else (data.X, data.y)
    frame = pd.DataFrame(X, columns=list(names))
    frame[data.response_name] = y
    _ensure_parent(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def write_truth(truth: SyntheticTruth, path: PathLike) -> None:
    """Coefficient table preceded by a '# sigma_noise=..,rho=..' comment line"""
    _ensure_parent(path)
    frame = pd.DataFrame(
        {
            "predictor": default_column_names(truth.p),
            "beta0": truth.beta0,
            "beta0_std": truth.beta0_std,
        }
    )
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# sigma_noise={truth.sigma_noise!r},rho={truth.rho!r}\n")
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT)


def read_truth(path: PathLike) -> SyntheticTruth:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Truth file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().lstrip("#").strip()
    meta: Dict[str, float] = {}
    for item in header.split(","):
        key, _, value = item.partition("=")
        try:
            meta[key.strip()] = float(value)
        except ValueError as e:
            raise DataFormatError(f"bad truth metadata '{item}'", row=1) from e
    frame = pd.read_csv(path, comment="#")
    beta0 = frame["beta0"].to_numpy(dtype=float)
    return SyntheticTruth(
        beta0=beta0,
        support=np.flatnonzero(beta0),
        sigma_noise=meta.get("sigma_noise", 1.0),
        rho=meta.get("rho", 0.0),
        beta0_std=frame["beta0_std"].to_numpy(dtype=float),
    )


def write_chains(store: ChainStore, path: PathLike) -> None:
    """One kept iteration per row: iteration, beta_<j> for stored j, tau, c_sq, eta, sigma_sq"""
    frame = pd.DataFrame(
        store.beta_draws, columns=[f"beta_{j + 1}" for j in store.beta_columns]
    )
    frame.insert(0, "iteration", store.kept_iterations)
    for name in SCALAR_CHAIN_COLUMNS:
        frame[name] = store.scalar_draws(name)
    _ensure_parent(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.debug("Wrote %d kept draws to %s", store.n_kept, path)


def read_chains(path: PathLike, p: Optional[int] = None) -> ChainStore:
    """Read a chain file; ``p`` defaults to the largest stored beta index

    Local scales and active-set sizes are not part of the file and come back empty.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Chain file not found: {path}")
    frame = pd.read_csv(path)
    missing = [c for c in ("iteration",) + SCALAR_CHAIN_COLUMNS if c not in frame.columns]
    if missing:
        raise DataFormatError(f"chain file lacks columns {missing}")
    beta_names = [c for c in frame.columns if c.startswith("beta_")]
    beta_columns = np.array([int(c[len("beta_"):]) - 1 for c in beta_names], dtype=int)
    if p is None:
        p = int(beta_columns.max()) + 1 if beta_columns.size else 0
    return ChainStore(
        beta_draws=frame[beta_names].to_numpy(dtype=float),
        tau_draws=frame["tau"].to_numpy(dtype=float),
        c_sq_draws=frame["c_sq"].to_numpy(dtype=float),
        eta_draws=frame["eta"].to_numpy(dtype=float),
        sigma_sq_draws=frame["sigma_sq"].to_numpy(dtype=float),
        lambda_final=np.empty(0),
        active_sizes=np.empty(0, dtype=int),
        beta_columns=beta_columns,
        p=p,
        kept_iterations=frame["iteration"].to_numpy(dtype=int),
    )


def write_report(
    report: SelectionReport,
    path: PathLike,
    stats: Optional[StandardizationStats] = None,
    metrics: Optional[Dict[str, float]] = None,
) -> None:
    """Key-value report: global block, optional metrics block, one block per selected coordinate"""
    names = (stats.column_names if stats else None) or default_column_names(report.p)
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as f:
        f.write("# BUGS selection report\n")
        f.write(f"threshold_delta: {report.threshold_delta!r}\n")
        f.write(f"prob_cutoff: {report.prob_cutoff!r}\n")
        f.write(f"n_predictors: {report.p}\n")
        f.write(f"n_selected: {report.selected.size}\n")
        f.write(f"selected: {','.join(str(j + 1) for j in report.selected)}\n")
        if stats is not None:
            f.write(f"y_mean: {stats.y_mean!r}\n")
            f.write(f"y_sd: {stats.y_sd!r}\n")
        if metrics:
            f.write("\nmetrics:\n")
            for key, value in metrics.items():
                f.write(f"  {key}: {value!r}\n")
        f.write("\ncoefficients:\n")
        for j in report.selected:
            f.write(f"  - name: {names[j]}\n")
            f.write(f"    index: {j + 1}\n")
            f.write(f"    post_mean: {float(report.post_mean[j])!r}\n")
            f.write(f"    ci_lower: {float(report.ci_lower[j])!r}\n")
            f.write(f"    ci_upper: {float(report.ci_upper[j])!r}\n")
            f.write(f"    sel_prob: {float(report.sel_prob[j])!r}\n")
            if stats is not None:
                raw = report.post_mean[j] * stats.y_sd / stats.col_sds[j]
                f.write(f"    raw_effect: {float(raw)!r}\n")


def read_report(path: PathLike) -> Dict[str, object]:
    """Parse a report written by write_report into its global keys, metrics and coefficient blocks"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Report file not found: {path}")
    result: Dict[str, object] = {}
    metrics: Dict[str, float] = {}
    blocks: List[Dict[str, str]] = []
    section = ""
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, 1):
            if not line.strip() or line.startswith("#"):
                continue
            if not line.startswith(" "):
                key, _, value = line.partition(":")
                if not value.strip() and key.strip() in ("metrics", "coefficients"):
                    section = key.strip()
                    continue
                section = ""
                result[key.strip()] = value.strip()
                continue
            body = line.strip()
            if section == "metrics":
                key, _, value = body.partition(":")
                metrics[key.strip()] = float(value)
            elif section == "coefficients":
                if body.startswith("- "):
                    blocks.append({})
                    body = body[2:]
                if not blocks:
                    raise DataFormatError("coefficient entry without a block", row=line_number)
                key, _, value = body.partition(":")
                blocks[-1][key.strip()] = value.strip()
            else:
                raise DataFormatError(f"unexpected indented line in {path.name}", row=line_number)
    result["metrics"] = metrics
    result["coefficients"] = blocks
    return result


def write_coefficients(
    report: SelectionReport, stats: StandardizationStats, path: PathLike
) -> None:
    """All p coordinates with the standardization statistics needed for prediction"""
    frame = pd.DataFrame(
        {
            "predictor": stats.column_names or default_column_names(report.p),
            "col_mean": stats.col_means,
            "col_sd": stats.col_sds,
            "post_mean": report.post_mean,
            "ci_lower": report.ci_lower,
            "ci_upper": report.ci_upper,
            "sel_prob": report.sel_prob,
            "selected": np.isin(np.arange(report.p), report.selected).astype(int),
        }
    )
    _ensure_parent(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def read_coefficients(
    report_path: PathLike, coefficients_path: PathLike
) -> Tuple[SelectionReport, StandardizationStats]:
    """Rebuild a SelectionReport and the training standardization from a fit's output files"""
    header = read_report(report_path)
    coefficients_path = Path(coefficients_path)
    if not coefficients_path.exists():
        raise FileNotFoundError(f"Coefficient file not found: {coefficients_path}")
    frame = pd.read_csv(coefficients_path)
    try:
        y_mean = float(str(header["y_mean"]))
        y_sd = float(str(header["y_sd"]))
    except KeyError as e:
        raise DataFormatError(f"report lacks {e.args[0]}") from e
    report = SelectionReport(
        post_mean=frame["post_mean"].to_numpy(dtype=float),
        ci_lower=frame["ci_lower"].to_numpy(dtype=float),
        ci_upper=frame["ci_upper"].to_numpy(dtype=float),
        sel_prob=frame["sel_prob"].to_numpy(dtype=float),
        selected=np.flatnonzero(frame["selected"].to_numpy() == 1),
        threshold_delta=float(str(header["threshold_delta"])),
        prob_cutoff=float(str(header["prob_cutoff"])),
    )
    stats = StandardizationStats(
        col_means=frame["col_mean"].to_numpy(dtype=float),
        col_sds=frame["col_sd"].to_numpy(dtype=float),
        y_mean=y_mean,
        y_sd=y_sd,
        column_names=tuple(frame["predictor"].astype(str)),
    )
    return report, stats


def _ensure_parent(path: PathLike) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
