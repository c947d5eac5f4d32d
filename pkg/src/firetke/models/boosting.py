"""Gradient boosting on squared loss, plain and leaf-regularized."""
import numpy as np

from .forest import pack_trees, unpack_trees
from .tree import grow_tree


class GradientBoostingRegressor:
    """Stagewise trees fit to residuals: ``mean(y) + sum_j rate * tree_j(x)``.

    ``loss_trace[j]`` is the training MSE of the additive fit after stage
    ``j``. Predictions are clipped to the training target range, since a
    sum of per-stage trees can otherwise step outside it.
    """

    kind = "gbr"

    def __init__(self, n_stages=200, learning_rate=0.1, max_depth=3, min_leaf=1):
        if int(n_stages) != n_stages or n_stages < 1:
            raise ValueError(f"n_stages must be a positive integer, got {n_stages}")
        if not 0 <= learning_rate <= 1:
            raise ValueError(f"learning_rate must be in [0, 1], got {learning_rate}")
        if max_depth is not None and max_depth < 0:
            raise ValueError(f"max_depth must be >= 0, got {max_depth}")
        if min_leaf < 1:
            raise ValueError(f"min_leaf must be >= 1, got {min_leaf}")
        self.n_stages = int(n_stages)
        self.learning_rate = float(learning_rate)
        self.max_depth = max_depth
        self.min_leaf = int(min_leaf)
        self.alpha = 0.0
        self.gamma = 0.0

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=float)
        y = np.ascontiguousarray(y, dtype=float)
        self.base_ = float(np.mean(y))
        F = np.full(len(y), self.base_)
        self.trees_ = []
        trace = []
        for _ in range(self.n_stages):
            tree = grow_tree(X, y - F, self.max_depth, self.min_leaf,
                             alpha=self.alpha, gamma=self.gamma)
            F = F + self.learning_rate * tree.predict(X)
            self.trees_.append(tree)
            trace.append(float(np.mean((y - F) ** 2)))
        self.loss_trace = np.array(trace)
        self.lo_, self.hi_ = float(y.min()), float(y.max())
        return self

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=float)
        F = np.full(len(X), self.base_)
        for tree in self.trees_:
            F = F + self.learning_rate * tree.predict(X)
        return np.clip(F, self.lo_, self.hi_)

    def _params(self):
        return {"n_stages": self.n_stages, "learning_rate": self.learning_rate,
                "max_depth": self.max_depth, "min_leaf": self.min_leaf}

    def get_state(self):
        meta = dict(self._params(), base=self.base_, lo=self.lo_, hi=self.hi_)
        arrays = pack_trees(self.trees_)
        arrays["loss_trace"] = self.loss_trace
        return meta, arrays

    @classmethod
    def from_state(cls, meta, arrays):
        meta = dict(meta)
        base, lo, hi = meta.pop("base"), meta.pop("lo"), meta.pop("hi")
        obj = cls(**meta)
        obj.base_, obj.lo_, obj.hi_ = base, lo, hi
        obj.trees_ = unpack_trees(arrays)
        obj.loss_trace = arrays["loss_trace"]
        return obj


class RegularizedBoostingRegressor(GradientBoostingRegressor):
    """Boosting whose leaves are shrunk and whose splits pay a per-leaf cost.

    Leaf weight is ``G / (n + leaf_l2)`` for residual sum ``G`` over ``n``
    rows (the second-order optimum of squared loss plus an L2 leaf
    penalty), and a split survives only if its gain beats
    ``leaf_penalty``. With both at zero this reproduces
    :class:`GradientBoostingRegressor` exactly.
    """

    kind = "xgb"

    def __init__(self, n_stages=200, learning_rate=0.1, max_depth=3, min_leaf=1,
                 leaf_penalty=0.0, leaf_l2=1.0):
        super().__init__(n_stages, learning_rate, max_depth, min_leaf)
        if leaf_penalty < 0 or leaf_l2 < 0:
            raise ValueError("leaf_penalty and leaf_l2 must be >= 0")
        self.gamma = float(leaf_penalty)
        self.alpha = float(leaf_l2)

    def _params(self):
        return dict(super()._params(), leaf_penalty=self.gamma, leaf_l2=self.alpha)


def gb_fit(X, y, n_stages=200, learning_rate=0.1, max_depth=3, min_leaf=1):
    return GradientBoostingRegressor(n_stages, learning_rate, max_depth, min_leaf).fit(X, y)


def xgb_fit(X, y, n_stages=200, learning_rate=0.1, max_depth=3, leaf_penalty=0.0,
            leaf_l2=1.0, min_leaf=1):
    return RegularizedBoostingRegressor(n_stages, learning_rate, max_depth, min_leaf,
                                        leaf_penalty, leaf_l2).fit(X, y)
