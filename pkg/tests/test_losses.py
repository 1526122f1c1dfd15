import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from weightcaster.errors import DecompositionError, DimensionError
from weightcaster.losses import (PredictiveGaussian, RingBatches, deterministic_loss, kl_to_standard_normal,
                                 loss_and_grad, loss_state_gradients, mse, predictive_distribution,
                                 rollout_for, stochastic_loss)
from weightcaster.predictor import LinearPredictor
from weightcaster.recurrence import RecurrenceModel, rollout

from oracle import central_fd, kl_std_normal_dense, random_gradient_case, rel_err, ring_loss

P = LinearPredictor(1, 1)


def det_model(z1, phi=None):
    z1 = np.asarray(z1, float)
    return RecurrenceModel(2, len(z1) - 2, "deterministic", np.eye(len(z1)) if phi is None else phi, z1)


def sto_model(z1, phi=None, aug=0):
    z1 = np.asarray(z1, float)
    return RecurrenceModel(2, aug, "stochastic", np.eye(len(z1)) if phi is None else phi, z1)


class TestMse:
    def test_examples(self):
        assert mse([1.0, 2.0], [1.0, 2.0]) == 0.0
        assert mse([1.0], [3.0]) == 4.0
        assert mse([1.0, 1.0], [0.0, 3.0]) == 2.5

    def test_mismatch(self):
        with pytest.raises(DimensionError):
            mse([1.0], [1.0, 2.0])


class TestDeterministicLoss:
    def test_perfect_line(self):
        x = np.linspace(-1, 1, 9)
        b = RingBatches.from_assignments(x, 2 * x + 1, np.arange(9) // 3 + 1)
        rep = deterministic_loss(rollout(det_model([2.0, 1.0]), 3), b, P)
        assert rep.total == 0.0

    def test_single_point(self):
        b = RingBatches.from_assignments([[0.7]], [[2.0]], [1])
        assert deterministic_loss(rollout(det_model([0.0, 0.0]), 1), b, P).total == 4.0

    def test_rings_sum_not_average(self):
        # ring 1: residuals (1, 0) -> 0.5; ring 2: residual 0.5 -> 0.25
        b = RingBatches.from_assignments([[0.0], [0.0], [0.0]], [[1.0], [0.0], [0.5]], [1, 1, 2])
        rep = deterministic_loss(rollout(det_model([0.0, 0.0]), 2), b, P)
        assert rep.total == pytest.approx(0.75, abs=1e-15)
        assert rep.per_ring_data == [(1, 0.5), (2, 0.25)]

    def test_empty_ring_contributes_nothing(self):
        b = RingBatches.from_assignments([[0.0], [0.0]], [[1.0], [2.0]], [1, 3])
        r = rollout(det_model([0.0, 0.0]), 3)
        rep = deterministic_loss(r, b, P)
        assert rep.total == 5.0 and [t for t, _ in rep.per_ring_data] == [1, 3]
        g = loss_state_gradients(r, b, P)
        np.testing.assert_array_equal(g[1], 0.0)

    def test_short_rollout_rejected(self):
        b = RingBatches.from_assignments([[0.0]], [[1.0]], [4])
        with pytest.raises(DimensionError):
            deterministic_loss(rollout(det_model([0.0, 0.0]), 3), b, P)


class TestPredictive:
    def test_origin_hides_slope(self):
        s1, s2 = 0.3, 0.7
        m = sto_model([0, 0, 0, 0])
        z = np.array([1.0, 2.0, math.log(math.expm1(s1 - 1e-4)), math.log(math.expm1(s2 - 1e-4))])
        g = predictive_distribution(m, z, [0.0], P, 0.05)
        assert g.variance[0] == pytest.approx(s2 ** 2 + 0.05 ** 2, rel=1e-12)
        assert g.mean[0] == pytest.approx(2.0)

    def test_x_two(self):
        m = sto_model([0, 0, 0, 0])
        inv = [math.log(math.expm1(v - 1e-4)) for v in (0.1, 0.2)]
        g = predictive_distribution(m, [0.0, 0.0, *inv], [2.0], P, 0.0)
        assert g.variance[0] == pytest.approx(0.08, rel=1e-12)

    def test_noise_floor_dominates(self):
        m = sto_model([0, 0, 0, 0])
        g = predictive_distribution(m, [0.0, 0.0, -60.0, -60.0], [1.0], P, 0.05)
        assert g.variance[0] == pytest.approx(0.0025, abs=1e-7)

    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(0.0, 0.5), st.floats(-3, 3))
    def test_monotone_in_sigma(self, s1, s2, x, noise, bump):
        m = sto_model([0, 0, 0, 0])
        base = predictive_distribution(m, [0, 0, s1, s2], [x], P, noise).variance[0]
        for k in (2, 3):
            z = np.array([0, 0, s1, s2], float)
            z[k] += abs(bump)
            assert predictive_distribution(m, z, [x], P, noise).variance[0] >= base


class TestKl:
    def test_identical(self):
        assert kl_to_standard_normal(PredictiveGaussian(np.zeros(2), np.eye(2))) == 0.0

    def test_shifted_mean(self):
        assert kl_to_standard_normal(PredictiveGaussian(np.array([1.0]), np.eye(1))) == pytest.approx(0.5, abs=1e-15)

    def test_wide(self):
        v = kl_to_standard_normal(PredictiveGaussian(np.array([0.0]), np.array([[4.0]])))
        assert v == pytest.approx(0.5 * (3.0 - math.log(4.0)), abs=1e-15)
        assert v == pytest.approx(0.8069, abs=1e-4)

    def test_non_pd(self):
        with pytest.raises(DecompositionError):
            kl_to_standard_normal(PredictiveGaussian(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]])))

    @given(st.integers(1, 4), st.integers(0, 10**6))
    def test_matches_dense_and_nonnegative(self, n, seed):
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((n, n))
        cov = A @ A.T + 0.1 * np.eye(n)
        mean = rng.standard_normal(n)
        v = kl_to_standard_normal(PredictiveGaussian(mean, cov))
        assert v >= 0
        assert v == pytest.approx(kl_std_normal_dense(mean, cov), rel=1e-10, abs=1e-12)


class TestStochasticLoss:
    def test_beta_zero_equals_deterministic(self, nprng):
        X = nprng.uniform(-1, 1, 12)
        Y = np.cos(X)
        rings = np.repeat([1, 2, 4], 4)
        z = nprng.standard_normal(5)
        phi = np.eye(5) + 0.1 * nprng.standard_normal((5, 5))
        b = RingBatches.from_assignments(X, Y, rings)
        s = stochastic_loss(rollout(sto_model(z, phi, aug=1), 4), b, P, 0.0, 0.1)
        # deterministic model reading only the mu channels of the same trajectory
        dm = RecurrenceModel(2, 3, "deterministic", phi, z)
        d = deterministic_loss(rollout(dm, 4), b, P)
        assert s.total == pytest.approx(d.total, abs=1e-12)

    def test_kl_zero_at_prior(self):
        # mu = 0 and sigma chosen so that Sigma_y = 1 at x = 0 with sigma_noise = 0
        s_unit = math.log(math.expm1(1.0 - 1e-4))
        b = RingBatches.from_assignments([[0.0]], [[0.0]], [1])
        rep = stochastic_loss(rollout(sto_model([0.0, 0.0, -50.0, s_unit]), 1), b, P, 5.0, 0.0)
        assert abs(rep.kl_term) < 1e-12

    def test_combination(self):
        # data loss 0.1, per-point KL 0.5, beta 0.05 -> 0.125
        mu0 = math.sqrt(0.1)
        # choose sigma so that KL = 0.5 with mean mu0: 0.5 (v + mu0^2 - 1 - ln v) = 0.5
        from scipy.optimize import brentq
        v = brentq(lambda v: v + mu0 ** 2 - 1 - math.log(v) - 1.0, 1.0, 10.0)
        s = math.log(math.expm1(math.sqrt(v) - 1e-4))
        b = RingBatches.from_assignments([[0.0]], [[0.0]], [1])
        rep = stochastic_loss(rollout(sto_model([0.0, mu0, -60.0, s]), 1), b, P, 0.05, 0.0)
        assert rep.data_term == pytest.approx(0.1, abs=1e-14)
        assert rep.kl_term == pytest.approx(0.5, abs=1e-12)
        assert rep.total == pytest.approx(0.125, abs=1e-12)


class TestStateGradients:
    def test_hand_derivative(self):
        x, y, a, c = 1.5, 0.3, 0.4, -0.2
        b = RingBatches.from_assignments([[x]], [[y]], [1])
        g = loss_state_gradients(rollout(det_model([a, c]), 1), b, P)
        r = a * x + c - y
        np.testing.assert_allclose(g[0], [2 * r * x, 2 * r], rtol=1e-14)

    def test_zero_at_minimum(self):
        x = np.linspace(-1, 1, 6)
        b = RingBatches.from_assignments(x, 2 * x + 1, [1, 1, 2, 2, 3, 3])
        g = loss_state_gradients(rollout(det_model([2.0, 1.0, 7.0]), 3), b, P)
        np.testing.assert_array_equal(g, 0.0)


@pytest.mark.parametrize("stochastic", [False, True], ids=["deterministic", "stochastic"])
@pytest.mark.parametrize("case", range(20))
def test_end_to_end_gradient_matches_finite_differences(case, stochastic):
    rng = np.random.default_rng(1000 + case + (500 if stochastic else 0))
    c = random_gradient_case(rng, stochastic)
    dx = c["X"].shape[1]
    mode = "stochastic" if stochastic else "deterministic"
    model = RecurrenceModel(c["theta_dim"], c["aug"], mode, c["phi"], c["z1"])
    pred = LinearPredictor(dx, 1)
    b = RingBatches.from_assignments(c["X"], c["Y"], c["rings"])
    rep, grad = loss_and_grad(model, b, pred, c["H"], c["beta"], c["sigma_noise"])
    S = model.state_dim

    def f(p):
        return ring_loss(p[:S * S].reshape(S, S), p[S * S:], c["X"], c["Y"], list(c["rings"]),
                         c["theta_dim"], stochastic, c["beta"], c["sigma_noise"])

    p0 = model.get_params()
    assert rep.total == pytest.approx(f(p0), rel=1e-12, abs=1e-14)
    assert rel_err(grad, central_fd(f, p0)) < 1e-5


def test_rollout_for_uses_max_ring():
    b = RingBatches.from_assignments([[0.0], [0.0]], [[1.0], [2.0]], [2, 5])
    assert rollout_for(det_model([0.0, 0.0]), b).horizon == 5
