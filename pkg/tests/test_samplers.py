"""
Tests for the slice sampler, the full conditionals and the full BUGS chain
"""

import math

import numpy as np
import pytest
from scipy import stats

from src.bugs_regression.data import generate_scenario
from src.bugs_regression.errors import SamplerAbort
from src.bugs_regression.model import (
    Dataset,
    GuidanceVector,
    Hyperparameters,
    ModelState,
    compute_guidance,
    effective_variance,
)
from src.bugs_regression.samplers import (
    ChainStore,
    McmcConfig,
    SliceConfig,
    _check_scalar,
    log_cond_c_sq,
    log_cond_eta,
    log_cond_lambda_j,
    log_cond_tau,
    run_mcmc,
    sigma_sq_posterior_params,
    slice_sample,
    update_sigma_sq,
)


def _small_dataset(n=3, p=2, X=None, y=None):
    X = np.arange(1.0, n * p + 1).reshape(n, p) if X is None else X
    y = np.linspace(-1.0, 1.0, n) if y is None else y
    return Dataset(
        X=X,
        y=y,
        col_means=np.zeros(X.shape[1]),
        col_sds=np.ones(X.shape[1]),
        y_mean=0.0,
        y_sd=1.0,
        standardized=False,
    )


class TestSliceSample:
    """Test cases for the stepping-out and shrinkage slice sampler"""

    def setup_method(self):
        self.cfg = SliceConfig()
        self.rng = np.random.default_rng(123)

    def _chain(self, log_density, x0, steps, lower=None):
        x = x0
        out = np.empty(steps)
        for i in range(steps):
            x = slice_sample(log_density, x, self.cfg, self.rng, lower=lower)
            out[i] = x
        return out

    def test_standard_normal_moments(self):
        draws = self._chain(lambda x: -0.5 * x * x, 0.0, 50_000)
        assert abs(draws.mean()) < 0.03
        assert 0.94 <= draws.var() <= 1.06

    def test_far_start_reaches_target(self):
        draws = self._chain(lambda x: -0.5 * (x - 10.0) ** 2, 0.0, 1000)
        assert 9.7 <= draws.mean() <= 10.3

    def test_flat_target_stays_finite(self):
        draws = self._chain(lambda x: 0.0, 0.0, 200)
        assert np.all(np.isfinite(draws))

    def test_lower_bound_is_respected(self):
        def half_normal(x):
            return -0.5 * x * x if x >= 0 else -math.inf

        draws = self._chain(half_normal, 0.5, 5000, lower=0.0)
        assert draws.min() >= 0.0
        assert draws.mean() == pytest.approx(math.sqrt(2 / math.pi), abs=0.05)

    def test_rejects_invalid_current_point(self):
        with pytest.raises(ValueError, match="not finite"):
            slice_sample(lambda x: -math.inf, 0.0, self.cfg, self.rng)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SliceConfig(width=0.0)
        with pytest.raises(ValueError):
            SliceConfig(max_stepout=0)


class TestSigmaSq:
    """Test cases for the conjugate inverse-gamma update"""

    def setup_method(self):
        self.hyper = Hyperparameters(a_sigma=2.0, b_sigma=3.0)

    def test_hand_computed_shape_and_rate(self):
        data = _small_dataset()
        beta = np.array([0.5, -1.0])
        kappa_sq = np.array([2.0, 0.5])
        state = ModelState(beta, np.ones(2), 1.0, 4.0, 0.0, 1.0)
        residual = data.y - data.X @ beta
        shape, rate = sigma_sq_posterior_params(state, data, kappa_sq, self.hyper)
        assert shape == pytest.approx(2.0 + (3 + 2) / 2)
        assert rate == pytest.approx(
            3.0 + 0.5 * residual @ residual + 0.5 * (0.25 / 2.0 + 1.0 / 0.5)
        )

    def test_zero_state_mean(self):
        data = _small_dataset(y=np.zeros(3))
        state = ModelState(np.zeros(2), np.ones(2), 1.0, 4.0, 0.0, 1.0)
        rng = np.random.default_rng(0)
        draws = np.array(
            [update_sigma_sq(state, data, np.ones(2), self.hyper, rng) for _ in range(10_000)]
        )
        shape = 2.0 + 5 / 2
        assert np.all(draws > 0)
        assert draws.mean() == pytest.approx(3.0 / (shape - 1.0), rel=0.05)

    def test_matches_inverse_gamma_distribution(self):
        rng = np.random.default_rng(1)
        data = _small_dataset(n=6, p=3, X=rng.standard_normal((6, 3)), y=rng.standard_normal(6))
        state = ModelState(np.array([0.3, -0.2, 0.1]), np.ones(3), 1.0, 4.0, 0.0, 1.0)
        kappa_sq = np.array([1.0, 0.5, 2.0])
        shape, rate = sigma_sq_posterior_params(state, data, kappa_sq, self.hyper)
        draws = np.array(
            [update_sigma_sq(state, data, kappa_sq, self.hyper, rng) for _ in range(50_000)]
        )
        ks = stats.kstest(draws, stats.invgamma(a=shape, scale=rate).cdf).statistic
        assert ks < 0.02


class TestConditionals:
    """Test cases for the log full conditionals"""

    def setup_method(self):
        self.hyper = Hyperparameters()
        self.state = ModelState(np.array([0.4, -1.2]), np.array([0.7, 2.0]), 0.5, 3.0, 0.8, 0.9)
        self.guidance = GuidanceVector(np.array([1.0, -0.5]))

    def test_lambda_hand_value(self):
        state = ModelState(np.zeros(1), np.ones(1), 1.0, 1.0, 0.0, 1.0)
        value = log_cond_lambda_j(1.0, state, (0.0, 0.3), self.hyper)
        assert value == pytest.approx(-0.5 * math.log(0.5) + math.log(0.5), abs=1e-12)

    def test_lambda_vanishing_scale_with_signal(self):
        assert log_cond_lambda_j(1e-100, self.state, (0.5, 0.0), self.hyper) < -1e100
        assert log_cond_lambda_j(0.0, self.state, (0.5, 0.0), self.hyper) == -math.inf

    def test_lambda_finite_over_wide_range(self):
        for lam in np.geomspace(1e-10, 1e10, 41):
            assert math.isfinite(log_cond_lambda_j(lam, self.state, (0.01, 2.0), self.hyper))

    def test_tau_sum_matches_scalar_evaluations(self):
        tau = 0.37
        expected = -math.log1p(tau**2)
        for j in range(2):
            k = effective_variance(
                self.guidance.z_star[j], self.state.lam[j], tau, self.state.c_sq, self.state.eta
            )
            expected += -0.5 * math.log(k) - self.state.beta[j] ** 2 / (
                2 * self.state.sigma_sq * k
            )
        assert log_cond_tau(tau, self.state, self.guidance, self.hyper) == pytest.approx(expected)

    def test_c_sq_prior_and_boundary(self):
        assert log_cond_c_sq(0.0, self.state, self.guidance, self.hyper) == -math.inf
        assert log_cond_c_sq(1e-8, self.state, self.guidance, self.hyper) < -1e6

    def test_eta_support_and_mode(self):
        assert log_cond_eta(-0.1, self.state, self.guidance, self.hyper) == -math.inf
        zero_beta = ModelState(np.zeros(2), self.state.lam, 0.5, 3.0, 0.8, 0.9)
        flat = GuidanceVector(np.zeros(2))
        # with zero guidance only the half-normal prior depends on eta
        at_zero = log_cond_eta(0.0, zero_beta, flat, self.hyper)
        at_one = log_cond_eta(1.0, zero_beta, flat, self.hyper)
        assert at_zero - at_one == pytest.approx(0.5 / self.hyper.sigma_eta_sq)

    def test_tau_rejects_non_positive(self):
        assert log_cond_tau(0.0, self.state, self.guidance, self.hyper) == -math.inf

    def test_check_scalar_raises_sampler_abort(self):
        with pytest.raises(SamplerAbort) as excinfo:
            _check_scalar(17, "tau", float("nan"))
        assert excinfo.value.iteration == 17
        assert excinfo.value.parameter == "tau"


class TestRunMcmc:
    """Test cases for the full BUGS chain"""

    def setup_method(self):
        self.data, self.truth = generate_scenario(60, 25, 0.0, seed=3)
        self.guidance = compute_guidance(self.data)
        self.hyper = Hyperparameters()

    def test_bookkeeping(self):
        store = run_mcmc(self.data, self.guidance, self.hyper, McmcConfig(n_iter=11, n_burnin=1, thin=5))
        assert store.n_kept == 2
        assert store.kept_iterations.tolist() == [1, 6]
        assert store.beta_draws.shape == (2, 25)
        assert store.lambda_final.shape == (25,)
        assert store.active_sizes.size == 0

    def test_supports_preserved(self):
        store = run_mcmc(self.data, self.guidance, self.hyper, McmcConfig(n_iter=80, n_burnin=0, seed=1))
        assert np.all(store.tau_draws > 0)
        assert np.all(store.c_sq_draws > 0)
        assert np.all(store.sigma_sq_draws > 0)
        assert np.all(store.eta_draws >= 0)
        assert np.all(store.lambda_final > 0)
        assert np.all(np.isfinite(store.beta_draws))

    def test_seeded_determinism(self):
        cfg = McmcConfig(n_iter=30, n_burnin=10, seed=9)
        a = run_mcmc(self.data, self.guidance, self.hyper, cfg)
        b = run_mcmc(self.data, self.guidance, self.hyper, cfg)
        assert np.array_equal(a.beta_draws, b.beta_draws)
        assert np.array_equal(a.eta_draws, b.eta_draws)

    def test_fixed_eta_ignores_guidance(self):
        cfg = McmcConfig(n_iter=30, n_burnin=10, seed=4, fix_eta_zero=True)
        guided = run_mcmc(self.data, self.guidance, self.hyper, cfg)
        flat = run_mcmc(self.data, GuidanceVector.uninformative(25), self.hyper, cfg)
        assert np.all(guided.eta_draws == 0.0)
        assert np.array_equal(guided.beta_draws, flat.beta_draws)
        assert np.array_equal(guided.tau_draws, flat.tau_draws)

    def test_strong_signals_recovered(self):
        data, truth = generate_scenario(100, 50, 0.0, seed=12)
        store = run_mcmc(
            data, compute_guidance(data), self.hyper, McmcConfig(n_iter=600, n_burnin=200, seed=2)
        )
        post_mean = store.beta_draws.mean(axis=0)
        np.testing.assert_allclose(post_mean[:3], truth.beta0_std[:3], atol=0.15)

    def test_rejects_unstandardized_data(self):
        data = _small_dataset()
        with pytest.raises(ValueError, match="standardized"):
            run_mcmc(data, GuidanceVector.uninformative(2), self.hyper, McmcConfig(n_iter=5, n_burnin=1))

    def test_config_validation(self):
        with pytest.raises(ValueError, match="n_iter > n_burnin"):
            McmcConfig(n_iter=10, n_burnin=10)
        with pytest.raises(ValueError, match="thin"):
            McmcConfig(thin=0)


class TestChainStore:
    """Test cases for stored draws"""

    def setup_method(self):
        self.store = ChainStore(
            beta_draws=np.array([[1.0, 2.0], [3.0, 4.0]]),
            tau_draws=np.array([0.1, 0.2]),
            c_sq_draws=np.array([1.0, 2.0]),
            eta_draws=np.array([0.0, 0.5]),
            sigma_sq_draws=np.array([0.9, 1.1]),
            lambda_final=np.ones(5),
            active_sizes=np.array([3, 4]),
            beta_columns=np.array([1, 3]),
            p=5,
            kept_iterations=np.array([10, 11]),
        )

    def test_full_beta_fills_zeros(self):
        full = self.store.full_beta_draws()
        assert full.shape == (2, 5)
        assert full[:, 1].tolist() == [1.0, 3.0]
        assert full[:, 0].tolist() == [0.0, 0.0]

    def test_scalar_draws(self):
        assert self.store.scalar_draws("beta_4").tolist() == [2.0, 4.0]
        assert self.store.scalar_draws("beta_1").tolist() == [0.0, 0.0]
        assert self.store.scalar_draws("sigma_sq").tolist() == [0.9, 1.1]

    def test_inconsistent_rows_rejected(self):
        with pytest.raises(ValueError, match="tau_draws"):
            ChainStore(
                beta_draws=np.zeros((2, 1)),
                tau_draws=np.zeros(3),
                c_sq_draws=np.zeros(2),
                eta_draws=np.zeros(2),
                sigma_sq_draws=np.zeros(2),
                lambda_final=np.ones(1),
                active_sizes=np.empty(0, dtype=int),
                beta_columns=np.array([0]),
                p=1,
                kept_iterations=np.arange(2),
            )
