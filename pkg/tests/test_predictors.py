import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from levelset_extrapolation.covariance import CovarianceModel, ObservationSet, build_ct, build_sigma
from levelset_extrapolation.linalg import b_quantities
from levelset_extrapolation.predictors import (
    LEVELSET_KNOWN_MEAN,
    LEVELSET_UNKNOWN_MEAN,
    METHODS,
    ORDINARY_KRIGING,
    SIMPLE_KRIGING,
    PredictorWeights,
    brute_force_objective,
    compute_weights,
    levelset_branches,
    levelset_known_mean,
    levelset_unknown_mean,
    mse,
    ordinary_kriging,
    predict,
    sample_feasible,
    simple_kriging,
)

from conftest import PAPER_MODELS, exact_quadratic, exact_sum, identity_system, random_instance

CT = np.array([0.5, 0.25])
# identities between two float evaluations (closed forms in b0, b1, b2 versus
# the returned weights) carry errors of order cond(Sigma) * eps
WELL_CONDITIONED = 1e10
KNOWN_MEAN_MSE = 0.8819660112501051518  # 2 (1 - sqrt(0.3125))


def sigma_norm(system, lam):
    return exact_quadratic(system.sigma_matrix, lam)


class TestIdentityExamples:
    def test_unknown_mean(self):
        w = levelset_unknown_mean(identity_system(), CT, 1.0)
        assert np.max(np.abs(w.weights - [1.0, 0.0])) <= 1e-12
        assert w.objective == pytest.approx(0.5, abs=1e-12)
        assert not w.degenerate

    def test_unknown_mean_mirrored(self):
        w = levelset_unknown_mean(identity_system(), CT[::-1], 1.0)
        assert np.max(np.abs(w.weights - [0.0, 1.0])) <= 1e-12

    def test_known_mean(self):
        w = levelset_known_mean(identity_system(), CT, 1.0)
        assert np.allclose(w.weights, CT / math.sqrt(0.3125), atol=1e-15)
        assert w.weights == pytest.approx([0.894427, 0.447214], abs=1e-6)

    def test_simple_kriging(self):
        assert np.array_equal(simple_kriging(identity_system(), CT).weights, CT)
        assert np.array_equal(simple_kriging(identity_system(), [0.0, 0.0]).weights, [0.0, 0.0])

    def test_ordinary_kriging(self):
        assert np.allclose(ordinary_kriging(identity_system(), CT).weights, [0.625, 0.375], atol=1e-15)
        assert np.allclose(ordinary_kriging(identity_system(), [0.0, 0.0]).weights, [0.5, 0.5], atol=1e-15)

    def test_mse_values(self):
        bq = b_quantities(identity_system(), CT)
        assert mse(LEVELSET_UNKNOWN_MEAN, bq, 1.0) == pytest.approx(1.0, abs=1e-12)
        assert mse(LEVELSET_KNOWN_MEAN, bq, 1.0) == pytest.approx(KNOWN_MEAN_MSE, abs=1e-15)
        assert mse(SIMPLE_KRIGING, bq, 1.0) == pytest.approx(1 - 0.3125)
        assert mse(ORDINARY_KRIGING, bq, 1.0) == pytest.approx(1 - 0.3125 + 0.125 ** 2 * 2)

    @settings(max_examples=100, deadline=None)
    @given(kind=st.sampled_from(PAPER_MODELS), gap=st.floats(0.3, 8.0), t=st.floats(-5.0, 13.0))
    def test_two_points_any_design(self, kind, gap, t):
        # with n = 2 the feasible set is {e_1, e_2}; the larger covariance wins
        model = CovarianceModel(kind)
        obs = ObservationSet([0.0, gap], [0, 0])
        ct = build_ct(model, obs, t)
        if abs(ct[0] - ct[1]) < 1e-6:
            return
        w = levelset_unknown_mean(build_sigma(model, obs), ct, t=[t])
        expect = [1.0, 0.0] if ct[0] > ct[1] else [0.0, 1.0]
        assert np.max(np.abs(w.weights - expect)) <= 1e-8

    def test_equal_covariance_tie(self):
        # c_t parallel to e: any unit vector is optimal, nearest observation wins
        s = build_sigma(CovarianceModel("gaussian"), ObservationSet([0.0, 20.0], [0, 0]))
        w = levelset_unknown_mean(s, [0.3, 0.3], 1.0, t=[14.0])
        assert w.degenerate and w.weights.tolist() == [0.0, 1.0]
        w = levelset_unknown_mean(s, [0.3, 0.3], 1.0, t=[10.0])
        assert w.weights.tolist() == [1.0, 0.0]


class TestSingleObservation:
    def test_unknown_mean_is_one(self):
        s = identity_system(1, 2.0)
        w = levelset_unknown_mean(s, [-0.7], 2.0)
        assert w.weights.tolist() == [1.0] and w.degenerate

    @pytest.mark.parametrize("c, sign", [(0.4, 1.0), (-0.4, -1.0)])
    def test_known_mean_is_sign(self, c, sign):
        w = levelset_known_mean(identity_system(1), [c], 1.0)
        assert w.weights == pytest.approx([sign], abs=1e-15)

    def test_known_mean_zero_ct(self):
        w = levelset_known_mean(identity_system(3), [0.0, 0.0, 0.0], 1.0)
        assert w.degenerate and w.weights.tolist() == [1.0, 0.0, 0.0]


class TestExactness:
    @pytest.mark.parametrize("kind", PAPER_MODELS)
    @pytest.mark.parametrize("method", METHODS)
    def test_at_observations(self, kind, method, rng):
        model, obs, system, _, _ = random_instance(rng, 6, kind)
        for j in range(obs.n):
            ct = build_ct(model, obs, obs.locations[j])
            w = compute_weights(method, system, ct, model.sigma2, t=obs.locations[j])
            assert predict(w, obs, 0.3) == pytest.approx(obs.values[j], abs=1e-8)
            if method in (LEVELSET_UNKNOWN_MEAN, LEVELSET_KNOWN_MEAN):
                assert np.max(np.abs(w.weights - np.eye(obs.n)[j])) <= 1e-6
            bq = b_quantities(system, ct)
            assert mse(method, bq, model.sigma2) == pytest.approx(0.0, abs=1e-7)


class TestPredict:
    def test_values(self):
        obs = ObservationSet([0.0, 1.0], [2.0, 4.0])
        assert predict(PredictorWeights(np.array([0.5, 0.5]), ORDINARY_KRIGING, 0), obs) == 3.0
        assert predict(PredictorWeights(np.array([0.0, 1.0]), LEVELSET_UNKNOWN_MEAN, 0), obs) == 4.0
        assert predict(PredictorWeights(np.zeros(2), SIMPLE_KRIGING, 0), obs, 0.0) == 0.0
        assert predict(PredictorWeights(np.zeros(2), SIMPLE_KRIGING, 0), obs, 1.25) == 1.25

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            predict(PredictorWeights(np.ones(3), SIMPLE_KRIGING, 0), ObservationSet([0.0], [1.0]))

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            compute_weights("universal_kriging", identity_system(), CT)


instances = st.builds(
    lambda seed, n, kind: random_instance(np.random.default_rng(seed), n, kind),
    st.integers(0, 2**32 - 1), st.integers(2, 20), st.sampled_from(PAPER_MODELS))


class TestInvariants:
    @settings(max_examples=150, deadline=None)
    @given(inst=instances)
    def test_constraints(self, inst):
        model, _, system, t, ct = inst
        s2 = model.sigma2
        for method in (LEVELSET_UNKNOWN_MEAN, LEVELSET_KNOWN_MEAN):
            lam = compute_weights(method, system, ct, s2, t=[t]).weights
            assert abs(sigma_norm(system, lam) - s2) <= 1e-8 * s2
        for method in (LEVELSET_UNKNOWN_MEAN, ORDINARY_KRIGING):
            lam = compute_weights(method, system, ct, s2, t=[t]).weights
            assert abs(exact_sum(lam) - 1.0) <= 1e-10

    @settings(max_examples=100, deadline=None)
    @given(inst=instances)
    def test_closed_form_objective(self, inst):
        model, _, system, t, ct = inst
        assume(np.linalg.cond(system.sigma_matrix) <= WELL_CONDITIONED)
        w = levelset_unknown_mean(system, ct, model.sigma2, t=[t])
        if w.degenerate:
            return
        bq = b_quantities(system, ct)
        expect = bq.b1 / bq.b2 + math.sqrt(max(bq.gram_det, 0) * (model.sigma2 * bq.b2 - 1)) / bq.b2
        assert w.objective == pytest.approx(expect, abs=1e-8)

    @settings(max_examples=200, deadline=None)
    @given(inst=instances)
    def test_branch_dominance(self, inst):
        model, _, system, t, ct = inst
        w = levelset_unknown_mean(system, ct, model.sigma2, t=[t])
        if w.degenerate:
            return
        first, second = levelset_branches(system, ct, model.sigma2)
        assert np.allclose(first, w.weights)
        assert ct @ w.weights >= ct @ second - 1e-12
        assert abs(sigma_norm(system, second) - model.sigma2) <= 1e-8 * model.sigma2

    @settings(max_examples=100, deadline=None)
    @given(inst=instances)
    def test_orthogonality(self, inst):
        _, _, system, _, ct = inst
        bq = b_quantities(system, ct)
        resid = ct - (bq.b1 / bq.b2) * np.ones_like(ct)
        # <e, c_t - (b1/b2) e> in the Sigma^-1 inner product
        assert abs(bq.sigma_inv_e @ resid) <= 1e-10 * max(1.0, np.abs(ct).sum())

    @settings(max_examples=100, deadline=None)
    @given(inst=instances)
    def test_proportional_to_simple_kriging(self, inst):
        model, _, system, _, ct = inst
        assume(np.linalg.cond(system.sigma_matrix) <= WELL_CONDITIONED)
        bq = b_quantities(system, ct)
        if bq.b0 < 1e-12:
            return
        km = levelset_known_mean(system, ct, model.sigma2).weights
        sk = simple_kriging(system, ct).weights
        assert np.allclose(km, math.sqrt(model.sigma2 / bq.b0) * sk, rtol=1e-8, atol=1e-10)

    @settings(max_examples=100, deadline=None)
    @given(inst=instances)
    def test_correlation_bound_and_mse(self, inst):
        model, _, system, t, ct = inst
        assume(np.linalg.cond(system.sigma_matrix) <= WELL_CONDITIONED)
        s2 = model.sigma2
        bq = b_quantities(system, ct)
        for method in (LEVELSET_UNKNOWN_MEAN, LEVELSET_KNOWN_MEAN):
            w = compute_weights(method, system, ct, s2, t=[t])
            rho = w.objective / s2
            assert -1.0 <= rho <= 1.0 + 1e-9
            if not w.degenerate:
                assert mse(method, bq, s2) == pytest.approx(max(0.0, 2 * (s2 - w.objective)), abs=1e-9)

    @pytest.mark.parametrize("method", METHODS)
    def test_scale_invariant_far_field(self, method):
        # c_t of order 1e-200 must not underflow the level-set forms
        s = build_sigma(CovarianceModel("gaussian"), ObservationSet([0.0, 3.0, 7.0], [0, 0, 0]))
        ct = np.array([1e-200, 3e-201, 2e-205])
        w = compute_weights(method, s, ct, 1.0)
        assert np.all(np.isfinite(w.weights))
        if method in (LEVELSET_UNKNOWN_MEAN, LEVELSET_KNOWN_MEAN):
            assert abs(sigma_norm(s, w.weights) - 1.0) <= 1e-8


class TestOracle:
    def test_sphere_example(self):
        v = brute_force_objective(identity_system(), CT, 1.0, simplex=False, seed=1)
        assert v <= math.sqrt(0.3125) + 1e-6
        assert v == pytest.approx(math.sqrt(0.3125), abs=1e-3)

    def test_simplex_example(self):
        v = brute_force_objective(identity_system(), CT, 1.0, simplex=True, seed=1)
        assert v <= 0.5 + 1e-6
        assert v == pytest.approx(0.5, abs=1e-3)

    @pytest.mark.parametrize("simplex", [False, True])
    def test_samples_are_feasible(self, simplex, rng):
        _, _, system, _, _ = random_instance(rng, 5, "bessel_j0")
        pts = sample_feasible(system, 1.0, simplex, 1000, rng)
        q = np.einsum("ij,jk,ik->i", pts, system.sigma_matrix, pts)
        assert np.allclose(q, 1.0, atol=1e-9)
        if simplex:
            assert np.allclose(pts.sum(axis=1), 1.0, atol=1e-12)

    def test_limits(self):
        with pytest.raises(ValueError):
            brute_force_objective(identity_system(7), np.ones(7), 1.0, False)
        with pytest.raises(ValueError):
            brute_force_objective(identity_system(2), CT, 1.0, False, samples=10)

    def test_random_feasible_points(self, rng):
        for kind in PAPER_MODELS:
            model, _, system, t, ct = random_instance(rng, 4, kind)
            for simplex, method in ((False, LEVELSET_KNOWN_MEAN), (True, LEVELSET_UNKNOWN_MEAN)):
                best = compute_weights(method, system, ct, model.sigma2, t=[t]).objective
                pts = sample_feasible(system, model.sigma2, simplex, 10_000, rng)
                assert np.max(pts @ ct) <= best + 1e-9
