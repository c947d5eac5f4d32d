"""Gaussian process regression and its elastic-net weight-space variant."""
from __future__ import annotations

import logging

import numpy as np
from numba import njit
from scipy.linalg import LinAlgError, cho_factor, cho_solve, solve_triangular
from scipy.spatial.distance import cdist

from ..errors import ConvergenceError, FactorizationError
from ._linalg import rowwise_dot

logger = logging.getLogger(__name__)

JITTER_START = 1e-10
JITTER_MAX = 1e-4


def sq_exp_kernel(A, B, length_scale=1.0, signal_variance=1.0):
    """``s^2 exp(-|a-b|^2 / (2 l^2))`` for every row pair of A and B."""
    d2 = cdist(np.atleast_2d(A), np.atleast_2d(B), "sqeuclidean")
    return signal_variance * np.exp(-0.5 * d2 / length_scale ** 2)


def cholesky_with_jitter(K):
    """Lower Cholesky factor of K, adding diagonal jitter 1e-10 .. 1e-4 on failure.

    Returns ``(L, jitter)``.
    """
    jitter = 0.0
    while True:
        try:
            L, _ = cho_factor(K + jitter * np.eye(len(K)) if jitter else K,
                              lower=True, check_finite=True)
            if jitter:
                logger.info("kernel matrix factorized with jitter %.0e", jitter)
            return np.tril(L), jitter
        except LinAlgError:
            jitter = JITTER_START if jitter == 0.0 else jitter * 10
            if jitter > JITTER_MAX * 1.0001:
                raise FactorizationError(
                    "kernel matrix is not positive definite even with jitter "
                    f"{JITTER_MAX:g}") from None


def _check_kernel_params(length_scale, signal_variance):
    if not length_scale > 0:
        raise ValueError(f"length_scale must be > 0, got {length_scale}")
    if not signal_variance > 0:
        raise ValueError(f"signal_variance must be > 0, got {signal_variance}")


class GaussianProcessRegressor:
    """Zero-mean GP with a squared-exponential kernel and Gaussian noise.

    The target is centered on its training mean before conditioning
    (``center_y``) and the mean is added back to predictions.
    """

    kind = "gpr"

    def __init__(self, length_scale=1.0, signal_variance=1.0, noise_variance=1e-2,
                 center_y=True):
        _check_kernel_params(length_scale, signal_variance)
        if not noise_variance >= 0:
            raise ValueError(f"noise_variance must be >= 0, got {noise_variance}")
        self.length_scale = float(length_scale)
        self.signal_variance = float(signal_variance)
        self.noise_variance = float(noise_variance)
        self.center_y = bool(center_y)
        self.loss_trace = np.empty(0)

    def kernel(self, A, B):
        return sq_exp_kernel(A, B, self.length_scale, self.signal_variance)

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        self.X_ = X.copy()
        self.y_mean_ = float(y.mean()) if self.center_y else 0.0
        K = self.kernel(X, X)
        K[np.diag_indices_from(K)] += self.noise_variance
        self.L_, self.jitter_ = cholesky_with_jitter(K)
        self.weights_ = cho_solve((self.L_, True), y - self.y_mean_)
        return self

    def predict(self, Q, return_var=False):
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        Kq = self.kernel(Q, self.X_)  # (n_query, n_train)
        mu = rowwise_dot(Kq, self.weights_) + self.y_mean_
        if not return_var:
            return mu
        Ks = Kq.T
        V = solve_triangular(self.L_, Ks, lower=True, check_finite=False)
        var = self.signal_variance - np.einsum("ij,ij->j", V, V)
        return mu, np.maximum(var, 0.0)

    def get_state(self):
        meta = {"length_scale": self.length_scale, "signal_variance": self.signal_variance,
                "noise_variance": self.noise_variance, "center_y": self.center_y,
                "y_mean": self.y_mean_, "jitter": self.jitter_}
        return meta, {"X": self.X_, "L": self.L_, "weights": self.weights_}

    @classmethod
    def from_state(cls, meta, arrays):
        obj = cls(meta["length_scale"], meta["signal_variance"], meta["noise_variance"],
                  meta["center_y"])
        obj.X_, obj.L_, obj.weights_ = arrays["X"], arrays["L"], arrays["weights"]
        obj.y_mean_, obj.jitter_ = meta["y_mean"], meta["jitter"]
        return obj


def gpr_fit(X, y, length_scale=1.0, signal_variance=1.0, noise_variance=1e-2, center_y=True):
    return GaussianProcessRegressor(length_scale, signal_variance, noise_variance,
                                    center_y).fit(X, y)


@njit(cache=True, nogil=True)
def _enet_cd(Kt, y, l1, l2, tol, max_sweeps):
    n = Kt.shape[0]
    w = np.zeros(n)
    r = y.copy()
    colsq = np.empty(n)
    for j in range(n):
        colsq[j] = Kt[j] @ Kt[j]
    for sweep in range(max_sweeps):
        max_change = 0.0
        for j in range(n):
            col = Kt[j]
            old = w[j]
            z = col @ r + colsq[j] * old
            if z > l1:
                new = (z - l1) / (colsq[j] + 2.0 * l2)
            elif z < -l1:
                new = (z + l1) / (colsq[j] + 2.0 * l2)
            else:
                new = 0.0
            delta = new - old
            if delta != 0.0:
                r -= delta * col
                w[j] = new
                if abs(delta) > max_change:
                    max_change = abs(delta)
        if max_change < tol:
            return w, sweep + 1, True
    return w, max_sweeps, False


def elastic_net_weights(K, y, l1=0.0, l2=0.0, tol=1e-8, max_sweeps=10_000):
    """Minimize ``0.5*|y - K w|^2 + l1*|w|_1 + l2*|w|_2^2`` by cyclic coordinate descent.

    Raises :class:`ConvergenceError` (carrying the last iterate) when the
    largest coordinate change is still above ``tol`` after ``max_sweeps``.
    """
    if l1 < 0 or l2 < 0:
        raise ValueError("l1 and l2 must be >= 0")
    K = np.asarray(K, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    Kt = np.ascontiguousarray(K.T)
    w, sweeps, ok = _enet_cd(Kt, y, float(l1), float(l2), float(tol), int(max_sweeps))
    if not ok:
        res = float(np.linalg.norm(y - K @ w))
        raise ConvergenceError(
            f"coordinate descent did not converge in {sweeps} sweeps "
            f"(residual norm {res:.3e})", weights=w, residual=res, sweeps=sweeps)
    return w


def l1_kill_threshold(K, y) -> float:
    """Smallest L1 strength at which the all-zero weight vector is optimal."""
    return float(np.max(np.abs(np.asarray(K).T @ np.asarray(y))))


class ElasticNetGPRegressor:
    """Kernel weights fit by elastic net; predicts ``k(x, X) @ w``."""

    kind = "gpr_enet"

    def __init__(self, length_scale=0.5, signal_variance=1.0, l1=0.0, l2=1.0,
                 center_y=True, tol=1e-8, max_sweeps=10_000):
        _check_kernel_params(length_scale, signal_variance)
        if l1 < 0 or l2 < 0:
            raise ValueError("l1 and l2 must be >= 0")
        self.length_scale = float(length_scale)
        self.signal_variance = float(signal_variance)
        self.l1 = float(l1)
        self.l2 = float(l2)
        self.center_y = bool(center_y)
        self.tol = float(tol)
        self.max_sweeps = int(max_sweeps)
        self.loss_trace = np.empty(0)

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        self.X_ = X.copy()
        self.y_mean_ = float(y.mean()) if self.center_y else 0.0
        K = sq_exp_kernel(X, X, self.length_scale, self.signal_variance)
        self.weights_ = elastic_net_weights(K, y - self.y_mean_, self.l1, self.l2,
                                            self.tol, self.max_sweeps)
        return self

    def predict(self, Q):
        Kq = sq_exp_kernel(Q, self.X_, self.length_scale, self.signal_variance)
        return rowwise_dot(Kq, self.weights_) + self.y_mean_

    def get_state(self):
        meta = {"length_scale": self.length_scale, "signal_variance": self.signal_variance,
                "l1": self.l1, "l2": self.l2, "center_y": self.center_y, "tol": self.tol,
                "max_sweeps": self.max_sweeps, "y_mean": self.y_mean_}
        return meta, {"X": self.X_, "weights": self.weights_}

    @classmethod
    def from_state(cls, meta, arrays):
        meta = dict(meta)
        y_mean = meta.pop("y_mean")
        obj = cls(**meta)
        obj.X_, obj.weights_, obj.y_mean_ = arrays["X"], arrays["weights"], y_mean
        return obj


def gpr_regularized_fit(X, y, length_scale=0.5, signal_variance=1.0, l1=0.0, l2=1.0,
                        center_y=True):
    return ElasticNetGPRegressor(length_scale, signal_variance, l1, l2, center_y).fit(X, y)
