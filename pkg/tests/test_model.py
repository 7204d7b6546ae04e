"""
Tests for the model core: domain records, guidance statistics and the effective-variance map
"""

import math

import numpy as np
import pytest

from src.bugs_regression.data import standardize
from src.bugs_regression.model import (
    Dataset,
    GuidanceConfig,
    GuidanceVector,
    Hyperparameters,
    ModelState,
    compute_guidance,
    effective_variance,
    guidance_scores,
    guidance_statistics,
    log_effective_variance,
    log_effective_variance_scalar,
)


def _log_uniform(rng, low, high, size):
    return np.exp(rng.uniform(math.log(low), math.log(high), size))


class TestDataset:
    """Test cases for Dataset validation"""

    def setup_method(self):
        rng = np.random.default_rng(0)
        self.X = rng.standard_normal((10, 3))
        self.y = rng.standard_normal(10)

    def _raw(self, **overrides):
        values = dict(
            X=self.X,
            y=self.y,
            col_means=np.zeros(3),
            col_sds=np.ones(3),
            y_mean=0.0,
            y_sd=1.0,
            standardized=False,
        )
        values.update(overrides)
        return Dataset(**values)

    def test_shapes(self):
        data = self._raw()
        assert data.n == 10
        assert data.p == 3
        assert data.stats.p == 3

    def test_rejects_single_row(self):
        with pytest.raises(ValueError, match="n >= 2"):
            self._raw(X=self.X[:1], y=self.y[:1])

    def test_rejects_non_finite(self):
        X = self.X.copy()
        X[2, 1] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            self._raw(X=X)

    def test_rejects_wrong_response_length(self):
        with pytest.raises(ValueError, match="y must have length"):
            self._raw(y=self.y[:5])

    def test_standardized_flag_is_checked(self):
        with pytest.raises(ValueError, match="expected 0"):
            self._raw(X=self.X + 5.0, standardized=True)

    def test_standardized_dataset_accepted(self):
        data = standardize(self.X, self.y)
        assert data.standardized
        np.testing.assert_allclose(data.X.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(data.X.std(axis=0, ddof=1), 1.0, atol=1e-10)


class TestRecords:
    """Test cases for configuration and state records"""

    def test_guidance_config_validation(self):
        with pytest.raises(ValueError):
            GuidanceConfig(epsilon_stabilizer=0.0)
        with pytest.raises(ValueError):
            GuidanceConfig(clip_bound=-1.0)

    def test_guidance_vector_respects_clip_bound(self):
        with pytest.raises(ValueError, match="clip bound"):
            GuidanceVector(np.array([0.0, 3.5]))
        assert GuidanceVector.uninformative(4).z_star.tolist() == [0.0] * 4

    def test_hyperparameters_defaults_and_validation(self):
        hyper = Hyperparameters()
        assert (hyper.tau0, hyper.a_c, hyper.b_c) == (1.0, 2.0, 8.0)
        assert (hyper.sigma_eta_sq, hyper.a_sigma, hyper.b_sigma) == (1.0, 1.0, 1.0)
        with pytest.raises(ValueError, match="b_c"):
            Hyperparameters(b_c=0.0)

    def test_initial_state(self):
        state = ModelState.initial(5)
        assert state.beta.tolist() == [0.0] * 5
        assert state.lam.tolist() == [1.0] * 5
        assert (state.tau, state.c_sq, state.eta, state.sigma_sq) == (0.1, 4.0, 0.1, 1.0)
        assert ModelState.initial(5, fix_eta_zero=True).eta == 0.0

    def test_state_rejects_out_of_support_values(self):
        state = ModelState.initial(3)
        with pytest.raises(ValueError, match="lambda"):
            ModelState(state.beta, np.array([1.0, 0.0, 1.0]), 0.1, 4.0, 0.1, 1.0)
        with pytest.raises(ValueError, match="eta"):
            ModelState(state.beta, state.lam, 0.1, 4.0, -0.1, 1.0)
        with pytest.raises(ValueError, match="tau"):
            ModelState(state.beta, state.lam, 0.0, 4.0, 0.1, 1.0)


class TestGuidance:
    """Test cases for guidance scores and statistics"""

    def test_column_equal_to_response_scores_near_one(self):
        rng = np.random.default_rng(1)
        n = 50
        y = rng.standard_normal(n)
        X = np.column_stack([y, rng.standard_normal(n)])
        data = standardize(X, y)
        s = guidance_scores(data)
        assert s[0] == pytest.approx((n - 1) / n, abs=1e-12)

    def test_orthogonal_column_scores_zero(self):
        y = np.array([1.0, -1.0, 1.0, -1.0])
        x = np.array([1.0, 1.0, -1.0, -1.0])
        data = standardize(np.column_stack([x, y]), y)
        assert guidance_scores(data)[0] == pytest.approx(0.0, abs=1e-12)

    def test_hand_evaluated_score(self):
        x = np.array([1.0, -1.0, 1.0, -1.0])
        y = np.array([2.0, 0.0, 2.0, 0.0])
        data = standardize(x[:, None], y)
        x_std = x / x.std(ddof=1)
        y_std = (y - 1.0) / y.std(ddof=1)
        assert guidance_scores(data)[0] == pytest.approx(abs(x_std @ y_std) / 4, abs=1e-12)

    def test_scores_require_standardized_data(self):
        data = Dataset(
            X=np.eye(3),
            y=np.arange(3.0),
            col_means=np.zeros(3),
            col_sds=np.ones(3),
            y_mean=0.0,
            y_sd=1.0,
            standardized=False,
        )
        with pytest.raises(ValueError, match="standardized"):
            guidance_scores(data)

    def test_equal_scores_give_zero_guidance(self):
        g = guidance_statistics(np.full(6, 0.3))
        assert np.all(g.z_star == 0.0)

    def test_hand_oracle(self):
        g = guidance_statistics(np.array([0.9, 0.1, 0.1, 0.1]), GuidanceConfig(1e-8, 3.0))
        np.testing.assert_allclose(g.z_star, [1.5, -0.5, -0.5, -0.5], atol=1e-6)

    def test_outlier_is_clipped(self):
        s = np.concatenate([[1.0], np.full(99, 1e-6)])
        g = guidance_statistics(s)
        assert g.z_star[0] == 3.0
        assert np.max(np.abs(g.z_star)) <= 3.0

    def test_random_scores_are_bounded(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            s = rng.exponential(size=rng.integers(2, 200)) ** 3
            g = guidance_statistics(s, GuidanceConfig(clip_bound=1.5))
            assert np.max(np.abs(g.z_star)) <= 1.5

    def test_rejects_negative_scores(self):
        with pytest.raises(ValueError):
            guidance_statistics(np.array([0.1, -0.2, 0.3]))

    def test_compute_guidance_matches_two_steps(self):
        rng = np.random.default_rng(3)
        data = standardize(rng.standard_normal((30, 8)), rng.standard_normal(30))
        np.testing.assert_array_equal(
            compute_guidance(data).z_star, guidance_statistics(guidance_scores(data)).z_star
        )


class TestEffectiveVariance:
    """Test cases for the guided effective-variance map"""

    def setup_method(self):
        self.rng = np.random.default_rng(2024)
        self.size = 10_000

    def test_unit_parameters_give_one_half(self):
        assert effective_variance(0.7, 1.0, 1.0, 1.0, 0.0) == pytest.approx(0.5, abs=1e-15)

    def test_slab_limit(self):
        assert effective_variance(0.0, 1e12, 1.0, 4.0, 0.0) == pytest.approx(4.0, abs=1e-6)

    def test_returns_float_for_scalars(self):
        assert isinstance(effective_variance(0.0, 1.0, 1.0, 1.0, 0.0), float)

    def test_bounds_over_random_tuples(self):
        n = self.size
        lam = _log_uniform(self.rng, 1e-2, 1e2, n)
        tau = _log_uniform(self.rng, 1e-2, 1e2, n)
        c_sq = self.rng.uniform(0.1, 10.0, n)
        eta = self.rng.uniform(0.0, 3.0, n)
        z = self.rng.uniform(-3.0, 3.0, n)
        kappa = effective_variance(z, lam, tau, c_sq, eta)
        assert np.all(kappa > 0)
        assert np.all(kappa < c_sq)

    def test_strictly_increasing_in_z(self):
        n = self.size
        lam = _log_uniform(self.rng, 0.1, 10.0, n)
        tau = _log_uniform(self.rng, 0.1, 10.0, n)
        c_sq = self.rng.uniform(0.5, 10.0, n)
        eta = self.rng.uniform(0.1, 3.0, n)
        z = self.rng.uniform(-3.0, 2.9, n)
        low = effective_variance(z, lam, tau, c_sq, eta)
        high = effective_variance(z + 0.1, lam, tau, c_sq, eta)
        assert np.all(high > low)

    def test_eta_zero_is_regularized_horseshoe(self):
        n = self.size
        lam = _log_uniform(self.rng, 1e-2, 1e2, n)
        tau = _log_uniform(self.rng, 1e-2, 1e2, n)
        c_sq = self.rng.uniform(0.1, 10.0, n)
        z = self.rng.uniform(-3.0, 3.0, n)
        a = tau**2 * lam**2
        np.testing.assert_allclose(
            effective_variance(z, lam, tau, c_sq, 0.0), c_sq * a / (c_sq + a), rtol=1e-12
        )

    def test_constant_guidance_gives_no_separation(self):
        guidance = guidance_statistics(np.full(50, 0.2))
        kappa = effective_variance(guidance.z_star, np.full(50, 0.8), 0.3, 2.0, 1.7)
        assert np.all(kappa == kappa[0])

    def test_log_domain_is_stable_at_extremes(self):
        for lam in (1e-12, 1e12):
            for tau in (1e-12, 1e12):
                for z in (-3.0, 3.0):
                    value = log_effective_variance(z, lam, tau, 4.0, 50.0)
                    assert np.isfinite(value)
                    assert value < math.log(4.0) or math.isclose(value, math.log(4.0))

    def test_scalar_twin_agrees(self):
        for _ in range(200):
            args = (
                self.rng.uniform(-3, 3),
                float(_log_uniform(self.rng, 1e-3, 1e3, 1)[0]),
                float(_log_uniform(self.rng, 1e-3, 1e3, 1)[0]),
                self.rng.uniform(0.1, 10),
                self.rng.uniform(0, 5),
            )
            assert log_effective_variance_scalar(*args) == pytest.approx(
                float(log_effective_variance(*args)), rel=1e-12, abs=1e-12
            )
