import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose
from scipy import signal

from serialdep import _lagfeatures as LF
from serialdep.distance import MetricSpec, dcor_normal_closed_form, dcov_v
from serialdep.timeseries import (
    acf,
    acf_values,
    adcf,
    adcf_matrix,
    adcf_profile,
    adcv,
    adcv_matrix,
    autocov_matrix,
    default_max_lag,
)


def _cvm_oracle(u, v):
    # direct evaluation of the joint and marginal EDFs at every sample point
    n = u.size
    total = 0.0
    for t in range(n):
        fj = np.mean((u <= u[t]) & (v <= v[t]))
        total += (fj - np.mean(u <= u[t]) * np.mean(v <= v[t])) ** 2
    return total / n


class TestAdcv:
    def test_hand_value(self):
        assert adcv([0.0, 1.0, 0.0, 1.0], 1) == pytest.approx(16 / 81, rel=1e-12)

    def test_lag_zero_is_dcov(self, rng):
        x = rng.standard_normal(30)
        assert adcv(x, 0) == pytest.approx(dcov_v(x, x))

    def test_constant(self):
        assert adcv(np.full(10, 3.0), 2) == 0.0
        assert adcf(np.full(10, 3.0), 2) == 0.0

    def test_negative_lag(self, rng):
        x = rng.standard_normal(25)
        assert adcv(x, -3) == adcv(x, 3)

    def test_lag_bounds(self):
        assert adcv([1.0, 2.0, 4.0], 1) >= 0
        with pytest.raises(ValueError):
            adcv([1.0, 2.0, 4.0], 2)

    def test_shift_invariance_and_scale(self, rng):
        x = rng.standard_normal(40)
        assert adcv(x + 7.0, 2) == pytest.approx(adcv(x, 2), rel=1e-10)
        assert adcf(3.0 * x, 2) == pytest.approx(adcf(x, 2), rel=1e-10)

    def test_other_metric(self, rng):
        x = rng.standard_normal(30)
        m = MetricSpec("alpha-power", alpha=0.5)
        assert adcv(x, 2, m) == pytest.approx(dcov_v(x[:-2], x[2:], m))


class TestAdcf:
    def test_lag_zero_is_one(self, rng):
        assert adcf(rng.standard_normal(20), 0) == pytest.approx(1.0)

    @settings(max_examples=40, deadline=None)
    @given(arrays(np.float64, st.integers(4, 40), elements=st.floats(-10, 10, allow_nan=False)))
    def test_unit_interval(self, x):
        for j in range(0, min(4, x.size - 1)):
            assert 0.0 <= adcf(x, j) <= 1.0

    def test_gaussian_ar1_matches_closed_form(self):
        rng = np.random.default_rng(7)
        vals = []
        for _ in range(12):
            x = signal.lfilter([1.0], [1.0, -0.5], rng.standard_normal(2500))[500:]
            vals.append(adcf(x, 1))
        assert np.mean(np.square(vals)) == pytest.approx(dcor_normal_closed_form(0.5), abs=0.02)
        assert np.mean(vals) <= 0.5


class TestMatrices:
    def test_reduction_d1(self, rng):
        x = rng.standard_normal(30)
        assert adcv_matrix(x[:, None], 2)[0, 0] == pytest.approx(adcv(x, 2))
        assert adcf_matrix(x[:, None], 2)[0, 0] == pytest.approx(adcf(x, 2))

    def test_diagonals_match_components(self, rng):
        x = rng.standard_normal((40, 3))
        for j in range(4):
            m = adcv_matrix(x, j)
            for r in range(3):
                assert m[r, r] == pytest.approx(adcv(x[:, r], j))

    def test_entry_definition(self, rng):
        x = rng.standard_normal((30, 2))
        assert adcv_matrix(x, 3)[0, 1] == pytest.approx(dcov_v(x[:-3, 0], x[3:, 1]))

    def test_negative_lag_transposes(self, rng):
        x = rng.standard_normal((30, 2))
        assert_allclose(adcv_matrix(x, -2), adcv_matrix(x, 2).T)

    def test_identical_components(self, rng):
        z = rng.standard_normal(25)
        assert_allclose(adcf_matrix(np.column_stack([z, z]), 0), np.ones((2, 2)))

    def test_independent_components_small(self, rng):
        r = adcf_matrix(rng.standard_normal((2000, 2)), 1)
        assert np.all(r < 0.12)


class TestAcf:
    def test_lag_zero(self, rng):
        assert acf(rng.standard_normal(10), 0) == pytest.approx(1.0)

    def test_alternating(self):
        assert acf(np.tile([1.0, -1.0], 500), 1) == pytest.approx(-1.0, abs=2e-3)

    def test_divisor_n(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        # gamma(1) = (-1.5*-0.5 + -0.5*0.5 + 0.5*1.5) / 4
        assert acf(x, 1) == pytest.approx((0.75 - 0.25 + 0.75) / 5.0)

    def test_constant_raises(self):
        with pytest.raises(ValueError):
            acf(np.ones(5), 1)

    def test_autocov_matrix(self, rng):
        x = rng.standard_normal((50, 2))
        g1 = autocov_matrix(x, 1)
        c = x - x.mean(axis=0)
        assert g1[1, 0] == pytest.approx(np.sum(c[1:, 1] * c[:-1, 0]) / 50)
        assert_allclose(autocov_matrix(x, -1), g1.T)
        assert autocov_matrix(x[:, :1], 2)[0, 0] / autocov_matrix(x[:, :1], 0)[0, 0] == pytest.approx(acf(x[:, 0], 2))

    def test_whitened_identity(self, rng):
        assert_allclose(autocov_matrix(rng.standard_normal((20000, 2)), 0), np.eye(2), atol=0.05)


class TestProfile:
    def test_matches_per_lag(self, rng):
        x = rng.standard_normal(60)
        prof = adcf_profile(x, 8)
        assert prof.univariate
        assert_allclose(prof.adcv, [adcv(x, j) for j in range(9)], rtol=1e-10, atol=1e-15)
        assert_allclose(prof.adcf, [adcf(x, j) for j in range(9)], rtol=1e-10, atol=1e-15)

    def test_multivariate(self, rng):
        x = rng.standard_normal((50, 2))
        prof = adcf_profile(x, 4)
        assert prof.adcv.shape == (5, 2, 2)
        for j in range(5):
            assert_allclose(prof.adcv[j], adcv_matrix(x, j), rtol=1e-10, atol=1e-15)
            assert_allclose(prof.adcf[j], adcf_matrix(x, j), rtol=1e-10, atol=1e-12)

    def test_non_euclidean_metric(self, rng):
        x = rng.standard_normal(30)
        m = MetricSpec("gaussian-induced", sigma=1.0)
        assert_allclose(adcf_profile(x, 3, m).adcv, [adcv(x, j, m) for j in range(4)])

    def test_default_max_lag(self):
        assert default_max_lag(100) == 20
        assert default_max_lag(2000) == 34
        assert default_max_lag(5) == 3


class TestLagFeatures:
    def test_against_oracles(self, rng):
        x = np.round(rng.standard_normal(40), 1)  # ties exercise the <= convention
        f = LF.series_features(x, 6)
        for j in range(1, 7):
            u, v = x[:-j], x[j:]
            assert f[LF.DCOV, j] == pytest.approx(dcov_v(u, v), rel=1e-10)
            assert f[LF.GAUSS, j] == pytest.approx(dcov_v(u, v, MetricSpec("gaussian-induced", sigma=1.0)), rel=1e-9)
            assert f[LF.CVM, j] == pytest.approx(_cvm_oracle(u, v), rel=1e-10, abs=1e-15)

    def test_constant_exact_zero(self):
        f = LF.series_features(np.full(30, 2.5), 5)
        assert np.all(f[:, 1:] == 0.0)

    def test_batch_equals_single_and_worker_independent(self, rng):
        xs = rng.standard_normal((7, 40))
        one = LF.batch_series_features(xs, 5, workers=1)
        many = LF.batch_series_features(xs, 5, workers=4)
        assert np.array_equal(one, many, equal_nan=True)
        for b in range(7):
            assert np.array_equal(one[b], LF.series_features(xs[b], 5), equal_nan=True)

    def test_multi_cross_entries(self, rng):
        x = rng.standard_normal((30, 2))
        f = LF.multi_features(x, 3)
        assert f[LF.CVM, 2, 1, 0] == pytest.approx(_cvm_oracle(x[:-2, 1], x[2:, 0]), rel=1e-10)
        assert f[LF.DCOV, 2, 0, 1] == pytest.approx(dcov_v(x[:-2, 0], x[2:, 1]), rel=1e-10)
