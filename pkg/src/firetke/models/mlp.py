"""Three-hidden-layer perceptron trained with Adam, L1 on the third hidden layer."""
from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..errors import DivergenceError
from ._linalg import rowwise_matmul

# index of the weight matrix feeding the third hidden layer
L1_LAYER = 2


def softplus(z):
    return np.logaddexp(0.0, z)


def init_params(sizes, rng):
    """Glorot-uniform weights, zero biases. ``sizes`` includes input and output."""
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        params.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        params.append(np.zeros(fan_out))
    return params


def forward(params, X, matmul=np.matmul):
    """Return the output column and the per-layer (input, pre-activation) cache."""
    A = X
    cache = []
    n_layers = len(params) // 2
    for i in range(n_layers):
        W, b = params[2 * i], params[2 * i + 1]
        Z = matmul(A, W) + b
        cache.append((A, Z))
        A = softplus(Z) if i < n_layers - 1 else Z
    return A[:, 0], cache


def objective(params, X, y, l1):
    """Mean squared error plus ``l1 * |W_3|_1``."""
    pred, _ = forward(params, X)
    return float(np.mean((pred - y) ** 2) + l1 * np.abs(params[2 * L1_LAYER]).sum())


def gradient(params, X, y, l1):
    """Objective value and its gradient with respect to every parameter array."""
    pred, cache = forward(params, X)
    n = len(y)
    resid = pred - y
    loss = float(np.mean(resid ** 2) + l1 * np.abs(params[2 * L1_LAYER]).sum())
    grads = [None] * len(params)
    dZ = (2.0 / n) * resid[:, None]
    for i in reversed(range(len(params) // 2)):
        A_in, _ = cache[i]
        W = params[2 * i]
        grads[2 * i] = A_in.T @ dZ
        grads[2 * i + 1] = dZ.sum(axis=0)
        if i == L1_LAYER:
            grads[2 * i] = grads[2 * i] + l1 * np.sign(W)
        if i > 0:
            dZ = (dZ @ W.T) * expit(cache[i - 1][1])
    return loss, grads


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1 - self.beta1 ** self.t
        c2 = 1 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class MLPRegressor:
    """Fully connected net ``in -> h1 -> h2 -> h3 -> 1`` with softplus units.

    The target is z-scored internally (``scale_y``); ``loss_trace`` holds
    the full training objective after every epoch on that scale.
    """

    kind = "dnn"

    def __init__(self, hidden=(64, 32, 16), l1=1e-4, learning_rate=1e-3, epochs=200,
                 batch_size=32, seed=0, scale_y=True):
        hidden = tuple(int(h) for h in hidden)
        if len(hidden) != 3 or min(hidden) < 1:
            raise ValueError(f"exactly three positive hidden sizes required, got {hidden}")
        if l1 < 0:
            raise ValueError(f"l1 must be >= 0, got {l1}")
        if not learning_rate > 0:
            raise ValueError(f"learning_rate must be > 0, got {learning_rate}")
        if epochs < 0 or batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")
        self.hidden = hidden
        self.l1 = float(l1)
        self.learning_rate = float(learning_rate)
        self.epochs = int(epochs)
        self.batch_size = int(batch_size)
        self.seed = seed
        self.scale_y = bool(scale_y)

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        rng = np.random.default_rng(self.seed)
        self.params_ = init_params((X.shape[1],) + self.hidden + (1,), rng)
        if self.scale_y:
            sd = float(y.std())
            self.y_loc_, self.y_scale_ = float(y.mean()), sd if sd > 0 else 1.0
        else:
            self.y_loc_, self.y_scale_ = 0.0, 1.0
        ys = (y - self.y_loc_) / self.y_scale_
        opt = Adam(self.params_, self.learning_rate)
        n = len(y)
        trace = []
        # non-finite losses are detected and reported below
        with np.errstate(over="ignore", invalid="ignore"):
            self._train(X, ys, rng, opt, n, trace)
        self.loss_trace = np.array(trace)
        return self

    def _train(self, X, ys, rng, opt, n, trace):
        for epoch in range(self.epochs):
            order = rng.permutation(n)
            for s in range(0, n, self.batch_size):
                batch = order[s:s + self.batch_size]
                loss, grads = gradient(self.params_, X[batch], ys[batch], self.l1)
                if not np.isfinite(loss):
                    raise DivergenceError(
                        f"training loss became non-finite at epoch {epoch}, "
                        f"batch starting {s}; try a smaller learning_rate")
                opt.step(self.params_, grads)
            full = objective(self.params_, X, ys, self.l1)
            if not np.isfinite(full):
                raise DivergenceError(f"training loss became non-finite after epoch {epoch}")
            trace.append(full)

    def predict(self, X) -> np.ndarray:
        pred, _ = forward(self.params_, np.asarray(X, dtype=float), rowwise_matmul)
        return pred * self.y_scale_ + self.y_loc_

    def get_state(self):
        meta = {"hidden": list(self.hidden), "l1": self.l1, "learning_rate": self.learning_rate,
                "epochs": self.epochs, "batch_size": self.batch_size, "seed": self.seed,
                "scale_y": self.scale_y, "y_loc": self.y_loc_, "y_scale": self.y_scale_}
        arrays = {f"param_{i}": p for i, p in enumerate(self.params_)}
        arrays["loss_trace"] = self.loss_trace
        return meta, arrays

    @classmethod
    def from_state(cls, meta, arrays):
        meta = dict(meta)
        y_loc, y_scale = meta.pop("y_loc"), meta.pop("y_scale")
        obj = cls(**meta)
        obj.y_loc_, obj.y_scale_ = y_loc, y_scale
        obj.params_ = [arrays[f"param_{i}"] for i in range(8)]
        obj.loss_trace = arrays["loss_trace"]
        return obj


def mlp_fit(X, y, hidden=(64, 32, 16), l1=1e-4, learning_rate=1e-3, epochs=200,
            batch_size=32, seed=0):
    return MLPRegressor(hidden, l1, learning_rate, epochs, batch_size, seed).fit(X, y)
