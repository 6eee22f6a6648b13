import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import special_ortho_group

from levelset_extrapolation.covariance import (
    CovarianceModel,
    ObservationSet,
    SingularCovarianceError,
    Window,
    build_ct,
    build_sigma,
    covariance_matrix,
    evaluate,
    factorize,
)

from conftest import PAPER_MODELS


class TestModel:
    def test_defaults_and_holder(self):
        m = CovarianceModel("exponential")
        assert m.sigma2 == 1.0 and m.length_scale == 1.0
        assert (m.holder_K, m.holder_alpha) == (1.0, 1.0)
        assert CovarianceModel("gaussian").holder_alpha == 2.0
        assert CovarianceModel("bessel_j0").holder_K == 0.25
        assert CovarianceModel("sinc").holder_K == pytest.approx(1 / 6)

    def test_holder_scales_with_variance_and_length(self):
        m = CovarianceModel("gaussian", sigma2=2.0, length_scale=0.5)
        assert m.holder_K == pytest.approx(2.0 / 0.25)

    @pytest.mark.parametrize("kind", PAPER_MODELS)
    def test_value_at_zero(self, kind):
        assert evaluate(CovarianceModel(kind, sigma2=2.5), 0.0) == 2.5

    def test_sinc_origin_exact(self):
        assert evaluate(CovarianceModel("sinc"), [0.0]) == 1.0

    def test_gaussian_at_one(self):
        assert evaluate(CovarianceModel("gaussian"), 1.0) == pytest.approx(math.exp(-0.5), abs=1e-15)

    def test_closed_forms(self):
        r = np.linspace(0.1, 30, 300)
        assert np.allclose(CovarianceModel("exponential").of_distance(r), np.exp(-r), atol=1e-15)
        assert np.allclose(CovarianceModel("sinc").of_distance(r), np.sin(r) / r, atol=1e-14)

    def test_length_scale(self):
        m = CovarianceModel("exponential", sigma2=3.0, length_scale=2.0)
        assert evaluate(m, 4.0) == pytest.approx(3.0 * math.exp(-2.0))

    @pytest.mark.parametrize("kind", PAPER_MODELS)
    @settings(max_examples=50)
    @given(lag=st.floats(-50, 50, allow_nan=False))
    def test_even_and_bounded(self, kind, lag):
        m = CovarianceModel(kind, sigma2=1.7)
        assert evaluate(m, lag) == evaluate(m, -lag)
        assert abs(evaluate(m, lag)) <= m.sigma2

    @pytest.mark.parametrize("d", [2, 3])
    @pytest.mark.parametrize("kind", PAPER_MODELS)
    def test_isotropy(self, d, kind, rng):
        m = CovarianceModel(kind)
        for _ in range(10):
            lag = rng.normal(size=d) * 3
            rot = special_ortho_group.rvs(d, random_state=rng)
            assert evaluate(m, rot @ lag) == pytest.approx(evaluate(m, lag), abs=1e-13)
            assert evaluate(m, lag) == pytest.approx(evaluate(m, [np.linalg.norm(lag)]), abs=1e-15)

    def test_nonfinite_lag(self):
        with pytest.raises(ValueError):
            evaluate(CovarianceModel("gaussian"), [math.nan])

    @pytest.mark.parametrize("kw", [
        {"kind": "matern"},
        {"kind": "gaussian", "sigma2": 0.0},
        {"kind": "gaussian", "length_scale": -1.0},
        {"kind": "gaussian", "holder_alpha": 2.5},
        {"kind": "user_table"},
    ])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            CovarianceModel(**kw)


class TestUserTable:
    TABLE = [[0.0, 2.0], [1.0, 1.0], [3.0, 0.5]]

    def test_interpolation_and_clamp(self):
        m = CovarianceModel("user_table", table=self.TABLE)
        assert m.sigma2 == 2.0
        assert evaluate(m, 0.5) == pytest.approx(1.5)
        assert evaluate(m, -2.0) == pytest.approx(0.75)
        assert evaluate(m, 10.0) == 0.5

    @pytest.mark.parametrize("table", [
        [[0.1, 1.0], [1.0, 0.5]],
        [[0.0, 1.0], [0.0, 0.5]],
        [[0.0, 1.0]],
    ])
    def test_bad_tables(self, table):
        with pytest.raises(ValueError):
            CovarianceModel("user_table", table=table)

    def test_sigma2_must_agree(self):
        with pytest.raises(ValueError):
            CovarianceModel("user_table", sigma2=1.0, table=self.TABLE)


class TestWindowAndObservations:
    def test_window(self):
        w = Window(((0, 2), (1, 4)))
        assert w.dim == 2 and w.volume == 6.0
        assert list(w.contains([[0, 1], [2, 4], [2.1, 3]])) == [True, True, False]

    def test_window_rejects_empty(self):
        with pytest.raises(ValueError):
            Window.interval(1.0, 1.0)

    def test_duplicate_locations(self):
        with pytest.raises(ValueError, match="distinct"):
            ObservationSet([0.0, 1.0, 0.0], [1, 2, 3])

    def test_outside_window(self):
        with pytest.raises(ValueError):
            ObservationSet([0.0, 11.0], [1, 2], window=Window.interval(0, 10))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            ObservationSet([0.0, 1.0], [1.0])


class TestBuildSigma:
    def test_two_point_exponential(self):
        obs = ObservationSet([0.0, math.log(2)], [0, 0])
        s = build_sigma(CovarianceModel("exponential"), obs)
        assert np.allclose(s.sigma_matrix, [[1, 0.5], [0.5, 1]], atol=1e-15)
        assert s.ridge_applied == 0.0

    def test_scalar(self):
        s = build_sigma(CovarianceModel("sinc", sigma2=4.0), ObservationSet([3.0], [1.0]))
        assert s.sigma_matrix.tolist() == [[4.0]]
        assert s.chol.tolist() == [[2.0]]

    def test_far_gaussian_is_identity(self):
        s = build_sigma(CovarianceModel("gaussian"), ObservationSet([0, 10, 20], [0, 0, 0]))
        off = s.sigma_matrix - np.diag(np.diag(s.sigma_matrix))
        assert np.max(np.abs(off)) < 1e-20

    @pytest.mark.parametrize("kind", ["exponential", "gaussian"])
    def test_generic_positions_no_ridge(self, kind, rng):
        m = CovarianceModel(kind)
        for _ in range(20):
            n = rng.integers(2, 51)
            locs = np.sort(rng.uniform(0, 5 * n, n))
            if np.min(np.diff(locs)) < 0.5:
                continue
            s = build_sigma(m, ObservationSet(locs, np.zeros(n)))
            assert s.ridge_applied == 0.0

    @pytest.mark.parametrize("kind", PAPER_MODELS)
    def test_structure_and_factor(self, kind, rng):
        m = CovarianceModel(kind, sigma2=1.3)
        locs = rng.uniform(0, 40, (30, 1))
        s = build_sigma(m, ObservationSet(locs, np.zeros(30)))
        assert np.array_equal(s.sigma_matrix, s.sigma_matrix.T)
        assert np.all(np.diag(s.sigma_matrix) == 1.3)
        rebuilt = s.chol @ s.chol.T
        assert np.max(np.abs(rebuilt - s.sigma_matrix - s.ridge_applied * np.eye(30))) <= 1e-8 * 1.3
        assert s.ridge_applied <= 1e-6 * 1.3

    def test_ridge_reported(self, caplog):
        # near-coincident points under the Gaussian model
        obs = ObservationSet(np.arange(40) * 0.05, np.zeros(40))
        with caplog.at_level("WARNING"):
            s = build_sigma(CovarianceModel("gaussian"), obs)
        assert s.ridge_applied > 0
        assert "ridge" in caplog.text

    def test_singular_error(self):
        with pytest.raises(SingularCovarianceError, match="numerically singular"):
            factorize(np.ones((3, 3)) * -1.0, 1.0)


class TestBuildCt:
    @pytest.mark.parametrize("kind", PAPER_MODELS)
    def test_column_of_sigma(self, kind, rng):
        m = CovarianceModel(kind)
        obs = ObservationSet(rng.uniform(0, 20, (8, 2)), np.zeros(8))
        s = build_sigma(m, obs)
        for j in range(8):
            assert np.array_equal(build_ct(m, obs, obs.locations[j]), s.sigma_matrix[:, j])

    def test_symmetric_midpoint(self):
        obs = ObservationSet([0.0, 2.0], [0, 0])
        ct = build_ct(CovarianceModel("exponential"), obs, 1.0)
        assert np.allclose(ct, [math.exp(-1)] * 2, atol=1e-16)

    def test_far_point(self):
        obs = ObservationSet([0.0, 1.0, 2.0], [0, 0, 0])
        assert np.all(build_ct(CovarianceModel("gaussian"), obs, 17.0) < 1e-40)

    def test_dimension_mismatch(self):
        obs = ObservationSet([[0.0, 0.0], [1.0, 1.0]], [0, 0])
        with pytest.raises(ValueError):
            build_ct(CovarianceModel("gaussian"), obs, [1.0, 2.0, 3.0])

    def test_cross_matrix_matches(self, rng):
        m = CovarianceModel("bessel_j0")
        a, b = rng.uniform(0, 10, (5, 1)), rng.uniform(0, 10, (4, 1))
        obs = ObservationSet(b, np.zeros(4))
        cross = covariance_matrix(m, a, b)
        for i in range(5):
            assert np.allclose(cross[i], build_ct(m, obs, a[i]), atol=0)
