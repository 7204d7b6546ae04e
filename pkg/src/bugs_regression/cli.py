#!/usr/bin/env python3
"""
Command-line interface for BUGS regression

Subcommands:
    simulate     write a Scenario 1/2 dataset and its truth file
    fit          run the full BUGS sampler on a CSV dataset
    fit-active   run the BUGS-Active sampler on a CSV dataset
    benchmark    replicate simulate + fit over a scenario grid and tabulate metrics
    predict      score new rows with a saved fit
    diagnose     R-hat / ESS table (and optional HTML report) for a saved fit

Settings resolve as command-line flag > config file (--config, key=value) >
built-in default, and the effective settings are echoed to <out>/config.txt.
"""

import argparse
import logging
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from . import analysis
from . import data as data_io
from .active_set import ActiveSetConfig, run_mcmc_active
from .errors import ConfigError, DataFormatError, NotPositiveDefiniteError, SamplerAbort
from .model import Dataset, GuidanceConfig, GuidanceVector, Hyperparameters, compute_guidance
from .samplers import ChainStore, McmcConfig, SliceConfig, run_mcmc

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SAMPLER_ABORT = 1
EXIT_INPUT_ERROR = 2
EXIT_UNEXPECTED = 1

# Chains of benchmark replication r use seed + offset + r; data use seed + r.
BENCHMARK_CHAIN_SEED_OFFSET = 100_000
SCALAR_PARAMETERS = ("tau", "c_sq", "eta", "sigma_sq")
METHODS: Dict[str, Tuple[bool, bool]] = {
    # name: (active-set sampler, eta fixed at zero)
    "guided": (False, False),
    "unguided": (False, True),
    "active": (True, False),
    "active-unguided": (True, True),
}
TABLE_FLOAT_FORMAT = "%.6g"
HYPER_SWEEP_KEYS = ("tau0", "a_c", "b_c", "sigma_eta_sq", "a_sigma", "b_sigma")
BASELINE_PRIOR = "baseline"


@dataclass(frozen=True)
class RunConfig:
    """Every setting a subcommand can read, with its built-in default"""

    command: str = ""
    input: str = ""
    out: str = "bugs_output"
    config: str = ""
    seed: int = 0
    # simulation
    n: int = 100
    p: int = 200
    rho: str = "0.0"
    n_signals: int = 10
    sigma_noise: float = 1.0
    replications: int = 10
    methods: str = "guided,unguided"
    hyper_sweep: str = ""
    # chains
    iters: int = 5000
    burnin: int = 1000
    thin: int = 1
    chains: int = 1
    jobs: int = 1
    eta_fixed_zero: bool = False
    full_beta: bool = False
    progress: bool = False
    # prior and guidance
    tau0: float = 1.0
    a_c: float = 2.0
    b_c: float = 8.0
    sigma_eta_sq: float = 1.0
    a_sigma: float = 1.0
    b_sigma: float = 1.0
    epsilon: float = 1e-8
    clip_bound: float = 3.0
    slice_width: float = 1.0
    max_stepout: int = 50
    max_shrink: int = 100
    # active set
    guidance_budget: str = ""
    coef_threshold: float = 1e-4
    lambda_baseline: float = 1e-3
    max_active: int = 0
    # selection and outputs
    delta: float = 0.01
    prob_cutoff: float = 0.5
    response: str = "y"
    truth: str = ""
    test_fraction: float = 0.0
    gzip: bool = False
    omit_runtime: bool = False
    fit_dir: str = ""
    top: int = 10
    plot: bool = False

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.chains < 1:
            raise ConfigError("chains must be >= 1")
        if self.jobs == 0:
            raise ConfigError("jobs must be a positive count or negative (all CPUs)")
        if not 0.0 <= self.test_fraction < 1.0:
            raise ConfigError("test_fraction must be in [0, 1)")
        if self.top < 1:
            raise ConfigError("top must be >= 1")
        unknown = [m for m in self.method_list() if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; choose from {sorted(METHODS)}")
        self.prior_settings()

    def guidance_config(self) -> GuidanceConfig:
        return GuidanceConfig(epsilon_stabilizer=self.epsilon, clip_bound=self.clip_bound)

    def hyperparameters(self) -> Hyperparameters:
        return Hyperparameters(
            tau0=self.tau0,
            a_c=self.a_c,
            b_c=self.b_c,
            sigma_eta_sq=self.sigma_eta_sq,
            a_sigma=self.a_sigma,
            b_sigma=self.b_sigma,
        )

    def mcmc_config(self, seed: int, fix_eta_zero: Optional[bool] = None) -> McmcConfig:
        return McmcConfig(
            n_iter=self.iters,
            n_burnin=self.burnin,
            thin=self.thin,
            seed=seed,
            slice=SliceConfig(self.slice_width, self.max_stepout, self.max_shrink),
            fix_eta_zero=self.eta_fixed_zero if fix_eta_zero is None else fix_eta_zero,
            store_full_beta=self.full_beta,
            show_progress=self.progress,
        )

    def active_config(self, p: int, budget: Optional[int] = None) -> ActiveSetConfig:
        return ActiveSetConfig.for_dimension(
            p,
            guidance_budget=budget,
            coef_threshold=self.coef_threshold,
            max_active=self.max_active,
            lambda_baseline=self.lambda_baseline,
        )

    def rho_values(self) -> List[float]:
        return [float(v) for v in _split_list(self.rho, "rho")]

    def budget_values(self) -> List[Optional[int]]:
        """Guidance budgets to sweep; an empty setting means the p-dependent default"""
        values = _split_list(self.guidance_budget, "guidance_budget")
        return [int(v) for v in values] if values else [None]

    def single_budget(self) -> Optional[int]:
        budgets = self.budget_values()
        if len(budgets) != 1:
            raise ConfigError("this command takes a single guidance budget")
        return budgets[0]

    def prior_settings(self) -> List[Tuple[str, Hyperparameters]]:
        """The baseline prior followed by each ';'-separated perturbation of it

        A perturbation overrides one or more hyperparameters, e.g.
        ``tau0=0.1;a_c=1,b_c=1;sigma_eta_sq=10``. Labels are the override text
        with values in %g form.
        """
        base = self.hyperparameters()
        settings = [(BASELINE_PRIOR, base)]
        for item in self.hyper_sweep.split(";"):
            if not item.strip():
                continue
            overrides: Dict[str, float] = {}
            for pair in item.split(","):
                key, sep, raw = pair.partition("=")
                key = key.strip().replace("-", "_")
                if not sep or key not in HYPER_SWEEP_KEYS:
                    raise ConfigError(
                        f"hyper_sweep: '{pair.strip()}' is not <name>=<value> "
                        f"with a name from {', '.join(HYPER_SWEEP_KEYS)}"
                    )
                try:
                    overrides[key] = float(raw)
                except ValueError as e:
                    raise ConfigError(f"hyper_sweep: '{raw.strip()}' is not a number") from e
            try:
                prior = replace(base, **overrides)
            except ValueError as e:
                raise ConfigError(f"hyper_sweep: {e}") from e
            label = ",".join(f"{k}={v:g}" for k, v in overrides.items())
            settings.append((label, prior))
        return settings

    def method_list(self) -> List[str]:
        return _split_list(self.methods, "methods")

    def echo(self, out_dir: Path) -> Path:
        """Write the effective settings as key=value lines"""
        path = out_dir / "config.txt"
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"# effective settings for '{self.command}'\n")
            for item in fields(self):
                if item.name in NON_CONFIG_KEYS:
                    continue
                value = getattr(self, item.name)
                if isinstance(value, bool):
                    value = "true" if value else "false"
                f.write(f"{item.name}={value}\n")
        return path


NON_CONFIG_KEYS = frozenset({"command", "config"})
FIELD_TYPES: Dict[str, Any] = {f.name: f.type for f in fields(RunConfig)}
DEFAULTS: Dict[str, Any] = {f.name: f.default for f in fields(RunConfig)}


def _split_list(raw: str, key: str) -> List[str]:
    values = [v.strip() for v in str(raw).split(",") if v.strip()]
    for v in values:
        if key == "methods":
            continue
        try:
            float(v)
        except ValueError as e:
            raise ConfigError(f"{key}: '{v}' is not a number") from e
    return values


def _parse_bool(key: str, raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected true/false, got '{raw}'")


def convert_value(key: str, raw: str) -> Any:
    """Type a config-file value by the field it sets"""
    if key not in FIELD_TYPES or key in NON_CONFIG_KEYS:
        raise ConfigError(f"unknown config key '{key}'")
    kind = FIELD_TYPES[key]
    if kind is bool:
        return _parse_bool(key, raw)
    try:
        return kind(raw)
    except ValueError as e:
        raise ConfigError(f"{key}: cannot read '{raw}' as {kind.__name__}") from e


def read_config_file(path: str) -> Dict[str, Any]:
    """Flat key=value file; '#' starts a comment, '-' in keys reads as '_'"""
    config_path = Path(path)
    if not config_path.exists():
        raise FileNotFoundError(f"Config file not found: {config_path}")
    values: Dict[str, Any] = {}
    with open(config_path, "r", encoding="utf-8") as f:
        for number, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, raw = line.partition("=")
            if not sep:
                raise ConfigError(f"{config_path.name} line {number}: expected key=value")
            values[key.strip().replace("-", "_")] = convert_value(
                key.strip().replace("-", "_"), raw.strip()
            )
    logger.debug("Read %d settings from %s", len(values), config_path)
    return values


def resolve_config(command: str, args: argparse.Namespace) -> RunConfig:
    """Built-in defaults, overridden by the config file, overridden by explicit flags"""
    values: Dict[str, Any] = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for key, value in vars(args).items():
        if key in FIELD_TYPES and key != "command" and value is not None:
            values[key] = value
    values["command"] = command
    return RunConfig(**values)


def _prepare_out(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg.echo(out)
    return out


def _run_one_chain(
    dataset: Dataset,
    guidance: GuidanceVector,
    hyper: Hyperparameters,
    mcmc_cfg: McmcConfig,
    active_cfg: Optional[ActiveSetConfig],
) -> ChainStore:
    if active_cfg is None:
        return run_mcmc(dataset, guidance, hyper, mcmc_cfg)
    return run_mcmc_active(dataset, guidance, hyper, mcmc_cfg, active_cfg)


def _n_jobs(cfg: RunConfig, n_tasks: int) -> int:
    return cfg.jobs if cfg.jobs < 0 else min(cfg.jobs, n_tasks)


def run_chains(
    cfg: RunConfig,
    dataset: Dataset,
    guidance: GuidanceVector,
    active_cfg: Optional[ActiveSetConfig] = None,
) -> List[ChainStore]:
    """Independent chains seeded seed, seed+1, ... on a bounded worker pool"""
    hyper = cfg.hyperparameters()
    tasks = [
        delayed(_run_one_chain)(dataset, guidance, hyper, cfg.mcmc_config(cfg.seed + k), active_cfg)
        for k in range(cfg.chains)
    ]
    return list(Parallel(n_jobs=_n_jobs(cfg, len(tasks)))(tasks))


def _truth_for(truth: data_io.SyntheticTruth, dataset: Dataset) -> data_io.SyntheticTruth:
    """Re-express the truth on the scale of this (possibly split) dataset"""
    if truth.p != dataset.p:
        raise ValueError(f"truth has {truth.p} coefficients, dataset has {dataset.p} predictors")
    return replace(truth, beta0_std=truth.beta0 * dataset.col_sds / dataset.y_sd)


def _metrics_dict(metrics: analysis.Metrics, omit_runtime: bool) -> Dict[str, float]:
    values = metrics.as_dict()
    if omit_runtime:
        values.pop("runtime_sec")
    return values


def _write_diagnostics(
    stores: Sequence[ChainStore], parameters: Sequence[str], path: Path
) -> Optional[pd.DataFrame]:
    if stores[0].n_kept < analysis.MIN_DIAGNOSTIC_LENGTH:
        logger.warning("Too few kept draws for diagnostics; skipping %s", path.name)
        print(f"⚠️ Skipped diagnostics: fewer than {analysis.MIN_DIAGNOSTIC_LENGTH} kept draws")
        return None
    table = analysis.chain_diagnostics(stores, parameters)
    table.to_csv(path, index=False, float_format=TABLE_FLOAT_FORMAT)
    return table


def cmd_simulate(cfg: RunConfig) -> Path:
    rhos = cfg.rho_values()
    if len(rhos) != 1:
        raise ConfigError("simulate takes a single rho")
    dataset, truth = data_io.generate_scenario(
        cfg.n, cfg.p, rhos[0], cfg.seed, cfg.n_signals, cfg.sigma_noise
    )
    out = _prepare_out(cfg)
    data_io.write_dataset(dataset, out / "data.csv")
    data_io.write_truth(truth, out / "truth.csv")
    print(f"✅ Simulated n={dataset.n}, p={dataset.p}, rho={rhos[0]} (seed {cfg.seed})")
    print(f"   • {out / 'data.csv'} - predictors x1..x{dataset.p} and response y")
    print(f"   • {out / 'truth.csv'} - generating coefficients")
    return out


def cmd_fit(cfg: RunConfig, active: bool = False) -> Path:
    if not cfg.input:
        raise ConfigError("an input dataset is required")
    holdout: Optional[Tuple[np.ndarray, np.ndarray]] = None
    if cfg.test_fraction > 0:
        X_raw, y_raw, names, response = data_io.read_raw_table(cfg.input, cfg.response)
        dataset, X_test, y_test = data_io.train_test_split(
            X_raw, y_raw, cfg.test_fraction, cfg.seed, names, response
        )
        holdout = (X_test, y_test)
    else:
        dataset = data_io.read_dataset(cfg.input, cfg.response)
    out = _prepare_out(cfg)
    print(f"📊 Loaded {cfg.input}: n={dataset.n}, p={dataset.p}")

    guidance = compute_guidance(dataset, cfg.guidance_config())
    active_cfg = cfg.active_config(dataset.p, cfg.single_budget()) if active else None
    stores = run_chains(cfg, dataset, guidance, active_cfg)

    suffix = ".csv.gz" if cfg.gzip else ".csv"
    for k, store in enumerate(stores):
        data_io.write_chains(store, out / "chains" / f"chain_{k}{suffix}")

    pooled = analysis.pool_chains(stores)
    report = analysis.summarize(pooled, cfg.delta, cfg.prob_cutoff)
    metrics: Optional[Dict[str, float]] = None
    if cfg.truth:
        truth = _truth_for(data_io.read_truth(cfg.truth), dataset)
        metrics = _metrics_dict(
            analysis.compute_metrics(report, truth, pooled, dataset), cfg.omit_runtime
        )
        pd.DataFrame([metrics]).to_csv(
            out / "metrics.csv", index=False, float_format=TABLE_FLOAT_FORMAT
        )
    data_io.write_report(report, out / "report.txt", dataset.stats, metrics)
    data_io.write_coefficients(report, dataset.stats, out / "coefficients.csv")

    parameters = list(SCALAR_PARAMETERS) + [f"beta_{j + 1}" for j in report.selected]
    _write_diagnostics(stores, parameters, out / "diagnostics.csv")

    if holdout is not None:
        y_hat = analysis.predict(report, holdout[0], dataset.stats)
        scores = analysis.predictive_metrics(holdout[1], y_hat)
        pd.DataFrame([scores]).to_csv(
            out / "holdout.csv", index=False, float_format=TABLE_FLOAT_FORMAT
        )
        print(f"📊 Hold-out RMSE={scores['rmse']:.4g}, R²={scores['r2']:.4f}")

    print(f"✅ Selected {report.selected.size} of {report.p} predictors")
    if metrics:
        print(
            f"📊 TPR={metrics['tpr']:.3f} FDR={metrics['fdr']:.3f} "
            f"MCC={metrics['mcc']:.3f} RMSE(beta)={metrics['rmse_beta']:.4g}"
        )
    print(f"💾 Results saved to {out}/")
    return out


def cmd_fit_active(cfg: RunConfig) -> Path:
    return cmd_fit(cfg, active=True)


def _benchmark_task(
    cfg: RunConfig,
    rho: float,
    method: str,
    budget: Optional[int],
    prior: Tuple[str, Hyperparameters],
    replication: int,
) -> Tuple[Dict[str, Any], analysis.Metrics]:
    dataset, truth = data_io.generate_scenario(
        cfg.n, cfg.p, rho, cfg.seed + replication, cfg.n_signals, cfg.sigma_noise
    )
    active, eta_zero = METHODS[method]
    guidance = compute_guidance(dataset, cfg.guidance_config())
    mcmc_cfg = cfg.mcmc_config(
        cfg.seed + BENCHMARK_CHAIN_SEED_OFFSET + replication,
        fix_eta_zero=eta_zero or cfg.eta_fixed_zero,
    )
    active_cfg = cfg.active_config(dataset.p, budget) if active else None
    label, hyper = prior
    store = _run_one_chain(dataset, guidance, hyper, mcmc_cfg, active_cfg)
    report = analysis.summarize(store, cfg.delta, cfg.prob_cutoff)
    key = {
        "scenario": 1 if rho == 0 else 2,
        "rho": rho,
        "n": cfg.n,
        "p": cfg.p,
        "method": method,
        "guidance_budget": str(active_cfg.guidance_budget) if active_cfg else "-",
        "prior": label,
    }
    return key, analysis.compute_metrics(report, truth, store, dataset)


def cmd_benchmark(cfg: RunConfig) -> Path:
    grid: List[Tuple[float, str, Optional[int], Tuple[str, Hyperparameters]]] = []
    for rho in cfg.rho_values():
        for method in cfg.method_list():
            budgets = cfg.budget_values() if METHODS[method][0] else [None]
            grid.extend(
                (rho, method, budget, prior)
                for budget in budgets
                for prior in cfg.prior_settings()
            )
    out = _prepare_out(cfg)
    print(
        f"📊 Benchmark: {len(grid)} settings x {cfg.replications} replications "
        f"(n={cfg.n}, p={cfg.p})"
    )

    tasks = [
        delayed(_benchmark_task)(cfg, rho, method, budget, prior, r)
        for rho, method, budget, prior in grid
        for r in range(cfg.replications)
    ]
    results = list(Parallel(n_jobs=_n_jobs(cfg, len(tasks)))(tasks))

    per_replication = []
    groups: Dict[Tuple[Any, ...], List[analysis.Metrics]] = {}
    for i, (key, metrics) in enumerate(results):
        per_replication.append(
            {**key, "replication": i % cfg.replications, **_metrics_dict(metrics, cfg.omit_runtime)}
        )
        groups.setdefault(tuple(key.items()), []).append(metrics)
    pd.DataFrame(per_replication).to_csv(
        out / "replications.csv", index=False, float_format=TABLE_FLOAT_FORMAT
    )

    rows = []
    for key_items, records in groups.items():
        summary = analysis.aggregate_metrics(records)
        if cfg.omit_runtime:
            summary = {k: v for k, v in summary.items() if not k.startswith("runtime_sec")}
        rows.append({**dict(key_items), "replications": len(records), **summary})
    table = pd.DataFrame(rows)
    table.to_csv(out / "benchmark.csv", index=False, float_format=TABLE_FLOAT_FORMAT)

    for row in rows:
        prior = "" if row["prior"] == BASELINE_PRIOR else f" [{row['prior']}]"
        print(
            f"   • rho={row['rho']} {row['method']:<16} K_g={row['guidance_budget']:<5} "
            f"TPR={row['tpr_mean']:.3f} FDR={row['fdr_mean']:.3f} "
            f"MCC={row['mcc_mean']:.3f} ({row['mcc_se']:.3f}) RMSE={row['rmse_beta_mean']:.4g}"
            f"{prior}"
        )
    print(f"💾 Benchmark table saved to {out / 'benchmark.csv'}")
    return out


def cmd_predict(cfg: RunConfig) -> Path:
    if not cfg.input:
        raise ConfigError("an input dataset is required")
    if not cfg.fit_dir:
        raise ConfigError("predict needs --fit-dir pointing at a fit output directory")
    fit_dir = Path(cfg.fit_dir)
    report, stats = data_io.read_coefficients(fit_dir / "report.txt", fit_dir / "coefficients.csv")
    X_raw, y_raw, names = data_io.read_prediction_table(cfg.input, cfg.response)
    if stats.column_names and names != stats.column_names and len(names) == stats.p:
        logger.warning("Predictor names differ from the fitted ones; matching by position")
    y_hat = analysis.predict(report, X_raw, stats)

    out = _prepare_out(cfg)
    predictions = pd.DataFrame({"y_hat": y_hat})
    if y_raw is not None:
        predictions.insert(0, cfg.response, y_raw)
        scores = analysis.predictive_metrics(y_raw, y_hat)
        pd.DataFrame([scores]).to_csv(
            out / "predict_metrics.csv", index=False, float_format=TABLE_FLOAT_FORMAT
        )
        print(
            f"📊 RMSE={scores['rmse']:.4g} MAE={scores['mae']:.4g} "
            f"Corr={scores['corr']:.4f} R²={scores['r2']:.4f}"
        )
    predictions.to_csv(out / "predictions.csv", index=False, float_format="%.17g")
    print(f"✅ Predicted {y_hat.size} rows; saved to {out / 'predictions.csv'}")
    return out


def _chain_files(fit_dir: Path) -> List[Path]:
    chain_dir = fit_dir / "chains"
    files = [f for f in chain_dir.glob("chain_*.csv*") if f.name.split(".")[0][6:].isdigit()]
    if not files:
        raise FileNotFoundError(f"No chain files found in {chain_dir}")
    return sorted(files, key=lambda f: int(f.name.split(".")[0][len("chain_"):]))


def cmd_diagnose(cfg: RunConfig) -> Path:
    if not cfg.input:
        raise ConfigError("diagnose needs a fit output directory")
    fit_dir = Path(cfg.input)
    coefficients = fit_dir / "coefficients.csv"
    p = len(pd.read_csv(coefficients)) if coefficients.exists() else None
    stores = [data_io.read_chains(f, p) for f in _chain_files(fit_dir)]
    pooled = analysis.pool_chains(stores)
    report = analysis.summarize(pooled, cfg.delta, cfg.prob_cutoff)
    top = analysis.top_coefficients(report, cfg.top)
    top_indices = [int(i) - 1 for i in top["index"]]

    out = _prepare_out(cfg)
    parameters = list(SCALAR_PARAMETERS) + [f"beta_{j + 1}" for j in top_indices]
    table = _write_diagnostics(stores, parameters, out / "diagnostics.csv")
    if table is not None:
        print(f"📊 Diagnostics over {len(stores)} chain(s), {stores[0].n_kept} kept draws each")
        for row in table.itertuples(index=False):
            print(f"   • {row.parameter:<10} R-hat={row.rhat:.3f} ESS={row.ess_total:.0f}")

    if cfg.plot:
        from .plots import write_diagnostics_html

        deltas = np.geomspace(1e-3, 1.0, 31)
        curves = analysis.selection_curve(pooled, deltas, top_indices)
        html = write_diagnostics_html(stores, curves, out / "diagnostics.html")
        print(f"💾 HTML report saved to {html}")
    print(f"✅ Diagnostics saved to {out}/")
    return out


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "fit-active": cmd_fit_active,
    "benchmark": cmd_benchmark,
    "predict": cmd_predict,
    "diagnose": cmd_diagnose,
}


def _help(text: str, key: str) -> str:
    return f"{text} (default: {DEFAULTS[key]})"


def _add_simulation_flags(parser: argparse.ArgumentParser, list_rho: bool) -> None:
    parser.add_argument("--n", type=int, help=_help("Number of observations", "n"))
    parser.add_argument("--p", type=int, help=_help("Number of predictors (>= 10)", "p"))
    parser.add_argument(
        "--rho",
        help=_help("Toeplitz correlation" + (", comma list" if list_rho else ""), "rho"),
    )
    parser.add_argument("--n-signals", type=int, help=_help("Nonzero coefficients", "n_signals"))
    parser.add_argument("--sigma-noise", type=float, help=_help("Noise sd", "sigma_noise"))


def _add_chain_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("sampler")
    group.add_argument("--iters", type=int, help=_help("MCMC iterations", "iters"))
    group.add_argument("--burnin", type=int, help=_help("Burn-in iterations", "burnin"))
    group.add_argument("--thin", type=int, help=_help("Keep every k-th draw", "thin"))
    group.add_argument("--jobs", type=int, help=_help("Worker processes (-1: all CPUs)", "jobs"))
    group.add_argument(
        "--eta-fixed-zero",
        action="store_true",
        default=None,
        help="Hold eta at 0 (unguided regularized horseshoe)",
    )
    group.add_argument("--delta", type=float, help=_help("Selection threshold on |beta|", "delta"))
    group.add_argument(
        "--prob-cutoff", type=float, help=_help("Selection probability cutoff", "prob_cutoff")
    )
    group.add_argument(
        "--progress", action="store_true", default=None, help="Show a progress bar per chain"
    )
    group.add_argument(
        "--omit-runtime",
        action="store_true",
        default=None,
        help="Leave runtimes out of metric tables (bit-reproducible output)",
    )

    model = parser.add_argument_group("prior and slice tuning")
    for flag, kind, text in (
        ("--tau0", float, "Half-Cauchy scale of tau"),
        ("--a-c", float, "IG shape of c^2"),
        ("--b-c", float, "IG scale of c^2"),
        ("--sigma-eta-sq", float, "Half-normal variance of eta"),
        ("--a-sigma", float, "IG shape of sigma^2"),
        ("--b-sigma", float, "IG scale of sigma^2"),
        ("--epsilon", float, "Guidance stabilizer inside the log"),
        ("--clip-bound", float, "Guidance clipping bound"),
        ("--slice-width", float, "Slice sampler initial width"),
        ("--max-stepout", int, "Slice sampler stepping-out budget"),
        ("--max-shrink", int, "Slice sampler shrinkage budget"),
    ):
        model.add_argument(flag, type=kind, help=_help(text, flag[2:].replace("-", "_")))


def _add_active_flags(parser: argparse.ArgumentParser, list_budget: bool) -> None:
    group = parser.add_argument_group("active set")
    group.add_argument(
        "--guidance-budget",
        help="Top-|z| predictors always active"
        + (", comma list for a sweep" if list_budget else "")
        + " (default: min(max(50, ceil(0.05 p)), 10000))",
    )
    group.add_argument(
        "--coef-threshold", type=float, help=_help("Activation threshold t_n", "coef_threshold")
    )
    group.add_argument(
        "--lambda-baseline",
        type=float,
        help=_help("Local scale held by inactive predictors", "lambda_baseline"),
    )
    group.add_argument(
        "--max-active", type=int, help=_help("Cap on |A_n|, 0 for none", "max_active")
    )


def _add_fit_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("input", help="Dataset CSV (one header row, numeric body)")
    parser.add_argument("--response", help=_help("Response column name or 0-based index", "response"))
    parser.add_argument("--chains", type=int, help=_help("Independent chains", "chains"))
    parser.add_argument("--truth", help="Truth file from 'simulate' to score the selection")
    parser.add_argument(
        "--test-fraction",
        type=float,
        help="Hold out this fraction of rows and report predictive metrics",
    )
    parser.add_argument(
        "--gzip", action="store_true", default=None, help="Gzip-compress chain files"
    )
    parser.add_argument(
        "--full-beta",
        action="store_true",
        default=None,
        help="Store every beta coordinate even when p > 10^4",
    )
    _add_chain_flags(parser)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help=_help("Random seed", "seed"))
    common.add_argument("--config", help="key=value settings file (flags override it)")
    common.add_argument("--out", help=_help("Output directory", "out"))
    common.add_argument(
        "--verbose", "-v", action="store_true", default=False, help="Enable debug logging"
    )

    parser = argparse.ArgumentParser(
        prog="bugs-regression",
        description="Bayesian univariate-guided sparse regression (BUGS) and BUGS-Active",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Simulate Scenario 1 at (n, p) = (100, 200)
  bugs-regression simulate --n 100 --p 200 --rho 0 --seed 1 --out sim/

  # Fit with three chains and score against the truth
  bugs-regression fit sim/data.csv --truth sim/truth.csv --chains 3 --out fit/

  # Active-set sampler for a wide dataset
  bugs-regression fit-active wide.csv --guidance-budget 500 --out fit_active/

  # Guided vs unguided over both scenarios, 10 replications
  bugs-regression benchmark --rho 0,0.5 --replications 10 --jobs 4 --out bench/

  # Prior sensitivity: baseline plus two perturbations
  bugs-regression benchmark --hyper-sweep "tau0=0.1;a_c=1,b_c=1" --out sens/

  # Score new rows and check convergence
  bugs-regression predict new.csv --fit-dir fit/ --out pred/
  bugs-regression diagnose fit/ --plot --out fit/
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", parents=[common], help="Write a synthetic dataset")
    _add_simulation_flags(simulate, list_rho=False)

    fit = sub.add_parser("fit", parents=[common], help="Full BUGS sampler")
    _add_fit_flags(fit)

    fit_active = sub.add_parser("fit-active", parents=[common], help="BUGS-Active sampler")
    _add_fit_flags(fit_active)
    _add_active_flags(fit_active, list_budget=False)

    benchmark = sub.add_parser(
        "benchmark", parents=[common], help="Replicated simulation study"
    )
    _add_simulation_flags(benchmark, list_rho=True)
    benchmark.add_argument(
        "--replications", type=int, help=_help("Replications per setting", "replications")
    )
    benchmark.add_argument(
        "--methods",
        help=_help(f"Comma list from {', '.join(METHODS)}", "methods"),
    )
    benchmark.add_argument(
        "--hyper-sweep",
        help="Prior perturbations run next to the baseline, ';'-separated "
        "(e.g. 'tau0=0.1;a_c=1,b_c=1;sigma_eta_sq=10')",
    )
    _add_chain_flags(benchmark)
    _add_active_flags(benchmark, list_budget=True)

    predict = sub.add_parser("predict", parents=[common], help="Score new rows")
    predict.add_argument("input", help="CSV with the fitted predictor columns")
    predict.add_argument("--fit-dir", help="Output directory of a previous fit")
    predict.add_argument(
        "--response", help=_help("Response column, used for metrics when present", "response")
    )

    diagnose = sub.add_parser("diagnose", parents=[common], help="Convergence diagnostics")
    diagnose.add_argument("input", help="Output directory of a previous fit")
    diagnose.add_argument("--top", type=int, help=_help("Top coefficients to include", "top"))
    diagnose.add_argument("--delta", type=float, help=_help("Selection threshold", "delta"))
    diagnose.add_argument(
        "--prob-cutoff", type=float, help=_help("Selection probability cutoff", "prob_cutoff")
    )
    diagnose.add_argument(
        "--plot", action="store_true", default=None, help="Also write an HTML report"
    )
    return parser


def setup_logging(verbose: bool = False) -> None:
    """Setup logging configuration."""
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code"""
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        cfg = resolve_config(args.command, args)
        COMMANDS[args.command](cfg)
    except (SamplerAbort, NotPositiveDefiniteError) as e:
        print(f"❌ Sampler aborted: {e}")
        return EXIT_SAMPLER_ABORT
    except (FileNotFoundError, DataFormatError, ConfigError, OSError, ValueError) as e:
        print(f"❌ Error: {e}")
        return EXIT_INPUT_ERROR
    except Exception as e:
        logger.debug("Unhandled error", exc_info=True)
        print(f"❌ Unexpected error: {e}")
        return EXIT_UNEXPECTED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
