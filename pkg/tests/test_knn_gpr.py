import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from firetke.errors import ConvergenceError, FactorizationError
from firetke.models import (
    ElasticNetGPRegressor,
    GaussianProcessRegressor,
    KNNRegressor,
    cholesky_with_jitter,
    elastic_net_weights,
    gpr_fit,
    gpr_regularized_fit,
    knn_fit_predict,
    l1_kill_threshold,
    sq_exp_kernel,
)


def _points(n=50, d=8, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    return X, np.sin(X[:, 0]) + 0.5 * X[:, 1] * X[:, 2]


def test_knn_exact_hit():
    X, y = _points(20, 3)
    assert knn_fit_predict(X, y, X[7], k=1) == y[7]


def test_knn_equidistant_pair():
    assert knn_fit_predict(np.array([[0.0], [2.0]]), np.array([1.0, 3.0]), [1.0], k=2) == 2.0


def test_knn_full_neighbourhood_is_mean():
    X, y = _points(15, 3)
    m = KNNRegressor(15).fit(X, y)
    assert np.allclose(m.predict(np.random.default_rng(1).random((5, 3)) * 9), y.mean(),
                       rtol=1e-14)


def test_knn_ties_go_to_lowest_index():
    X = np.array([[1.0], [-1.0], [1.0], [-1.0]])
    y = np.array([10.0, 20.0, 30.0, 40.0])
    m = KNNRegressor(2).fit(X, y)
    assert m.neighbors([[0.0]]).tolist() == [[0, 1]]
    assert m.predict([[0.0]])[0] == 15.0


def test_knn_batch_self_lookup():
    X, y = _points(40, 4)
    assert np.array_equal(KNNRegressor(1).fit(X, y).predict(X), y)


def test_knn_k_too_large():
    with pytest.raises(ValueError):
        KNNRegressor(5).fit(np.zeros((3, 1)), np.zeros(3))
    with pytest.raises(ValueError):
        KNNRegressor(0)


@given(arrays(np.float64, (12, 2), elements=st.floats(-5, 5)),
       arrays(np.float64, 12, elements=st.floats(-50, 50)),
       arrays(np.float64, (6, 2), elements=st.floats(-9, 9)), st.integers(1, 12))
def test_knn_within_training_range(X, y, Q, k):
    pred = KNNRegressor(k).fit(X, y).predict(Q)
    assert np.all(pred >= y.min()) and np.all(pred <= y.max())


def test_kernel_values():
    A = np.array([[0.0, 0.0]])
    B = np.array([[3.0, 4.0]])
    assert sq_exp_kernel(A, A, 2.0, 1.7)[0, 0] == 1.7
    assert sq_exp_kernel(A, B, 2.0, 1.7)[0, 0] == pytest.approx(1.7 * math.exp(-25 / 8),
                                                                rel=1e-15)


def test_gpr_noise_free_interpolation():
    X, y = _points()
    gp = gpr_fit(X, y, length_scale=2.0, noise_variance=0.0)
    mu, var = gp.predict(X, return_var=True)
    assert np.max(np.abs(mu - y)) < 1e-8
    assert np.max(var) < 1e-8 and np.min(var) >= 0


def test_gpr_single_point_by_hand():
    x1, y1, noise = np.array([[0.5, -1.0]]), np.array([2.0]), 0.25
    q = np.array([[1.0, 0.0]])
    gp = gpr_fit(x1, y1, length_scale=1.3, noise_variance=noise, center_y=False)
    k = math.exp(-0.5 * (0.25 + 1.0) / 1.3 ** 2)
    assert gp.predict(q)[0] == pytest.approx(k * 2.0 / (1 + noise), rel=1e-14)
    _, var = gp.predict(q, return_var=True)
    assert var[0] == pytest.approx(1 - k * k / (1 + noise), rel=1e-14)


def test_gpr_prior_reversion():
    X, y = _points(30, 3)
    gp = gpr_fit(X, y, length_scale=0.5, signal_variance=2.0, center_y=False)
    mu, var = gp.predict(np.full((1, 3), 100.0), return_var=True)
    assert abs(mu[0]) < 1e-12
    assert var[0] == pytest.approx(2.0, abs=1e-12)
    centered = gpr_fit(X, y, length_scale=0.5)
    assert centered.predict(np.full((1, 3), 100.0))[0] == pytest.approx(y.mean(), abs=1e-12)


@given(st.integers(0, 10_000))
def test_gpr_variance_non_negative(seed):
    X, y = _points(25, 3, seed)
    Q = np.random.default_rng(seed + 1).standard_normal((40, 3)) * 2
    Q[:10] = X[:10]
    _, var = gpr_fit(X, y, length_scale=1.0, noise_variance=1e-6).predict(Q, return_var=True)
    assert np.all(var >= 0)


def test_cholesky_jitter_rescues_duplicates():
    X = np.vstack([np.eye(3), np.eye(3)])  # repeated rows make K singular
    K = sq_exp_kernel(X, X)
    L, jitter = cholesky_with_jitter(K)
    assert 1e-10 <= jitter <= 1e-4
    assert np.allclose(L @ L.T, K + jitter * np.eye(6), atol=1e-12)
    assert cholesky_with_jitter(np.eye(2))[1] == 0.0


def test_cholesky_gives_up():
    with pytest.raises(FactorizationError):
        cholesky_with_jitter(-np.eye(3))


def test_gpr_validation():
    with pytest.raises(ValueError):
        GaussianProcessRegressor(length_scale=0)
    with pytest.raises(ValueError):
        GaussianProcessRegressor(noise_variance=-1)


def _kernel_fixture(n=30, seed=0):
    X, y = _points(n, 3, seed)
    return sq_exp_kernel(X, X, 0.7), y


def test_enet_unregularized_interpolates():
    K, y = _kernel_fixture()
    w = elastic_net_weights(K, y, 0.0, 0.0, tol=1e-12, max_sweeps=100_000)
    assert np.max(np.abs(K @ w - y)) < 1e-6


def test_enet_ridge_matches_closed_form():
    K, y = _kernel_fixture()
    for beta in (1e-3, 0.1, 2.0):
        w = elastic_net_weights(K, y, 0.0, beta, tol=1e-12, max_sweeps=100_000)
        ridge = np.linalg.solve(K.T @ K + 2 * beta * np.eye(len(K)), K.T @ y)
        assert np.max(np.abs(w - ridge)) < 1e-6


def test_enet_kill_threshold():
    K, y = _kernel_fixture()
    lam = l1_kill_threshold(K, y)
    assert lam == np.max(np.abs(K.T @ y))
    assert np.all(elastic_net_weights(K, y, lam, 0.5) == 0.0)
    assert np.all(elastic_net_weights(K, y, lam * 1.01, 0.0) == 0.0)
    assert np.any(elastic_net_weights(K, y, lam * 0.9, 0.0) != 0.0)


def test_enet_l1_sparsifies():
    K, y = _kernel_fixture()
    lam = l1_kill_threshold(K, y)
    w = elastic_net_weights(K, y, 0.05 * lam, 1e-3)
    assert 0 < np.count_nonzero(w) < len(w)


def test_enet_non_convergence_is_reported():
    K, y = _kernel_fixture()
    with pytest.raises(ConvergenceError) as info:
        elastic_net_weights(K, y, 0.0, 0.0, tol=1e-14, max_sweeps=2)
    assert info.value.sweeps == 2
    assert info.value.residual > 0 and len(info.value.weights) == len(y)


def test_enet_regressor_predicts_with_kernel_weights():
    X, y = _points(40, 3)
    # short length scale and a moderate ridge keep coordinate descent within budget
    m = gpr_regularized_fit(X, y, length_scale=0.5, l1=0.0, l2=1e-2)
    K = sq_exp_kernel(X, X, 0.5)
    assert np.allclose(m.predict(X), K @ m.weights_ + y.mean(), rtol=0, atol=1e-12)
    with pytest.raises(ValueError):
        ElasticNetGPRegressor(l1=-1)
