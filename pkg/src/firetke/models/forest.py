from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .tree import Tree, grow_tree


def resolve_max_features(max_features, d):
    if max_features is None:
        return d
    if isinstance(max_features, float):
        if not 0 < max_features <= 1:
            raise ValueError(f"fractional max_features must be in (0, 1], got {max_features}")
        return max(1, int(max_features * d))
    mf = int(max_features)
    if not 1 <= mf <= d:
        raise ValueError(f"max_features must be in [1, {d}], got {mf}")
    return mf


class RandomForestRegressor:
    """Bagged regression trees with per-split feature subsampling.

    Tree ``m`` draws its bootstrap rows and feature choices from child
    ``m`` of ``SeedSequence(seed)``, so the forest is identical for any
    ``n_jobs``.
    """

    kind = "rfr"

    def __init__(self, n_trees=100, max_depth=None, min_leaf=1, max_features=1 / 3,
                 bootstrap=True, seed=0, n_jobs=1):
        if int(n_trees) != n_trees or n_trees < 1:
            raise ValueError(f"n_trees must be a positive integer, got {n_trees}")
        if max_depth is not None and max_depth < 0:
            raise ValueError(f"max_depth must be >= 0, got {max_depth}")
        if min_leaf < 1:
            raise ValueError(f"min_leaf must be >= 1, got {min_leaf}")
        self.n_trees = int(n_trees)
        self.max_depth = max_depth
        self.min_leaf = int(min_leaf)
        self.max_features = max_features
        self.bootstrap = bool(bootstrap)
        self.seed = seed
        self.n_jobs = n_jobs
        self.loss_trace = np.empty(0)

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=float)
        y = np.ascontiguousarray(y, dtype=float)
        n, d = X.shape
        mf = resolve_max_features(self.max_features, d)
        seqs = np.random.SeedSequence(self.seed).spawn(self.n_trees)

        def one(ss):
            rng = np.random.default_rng(ss)
            rows = rng.integers(0, n, n) if self.bootstrap else None
            return grow_tree(X, y, self.max_depth, self.min_leaf, rows=rows,
                             max_features=mf, rng=rng)

        if self.n_jobs and self.n_jobs > 1:
            with ThreadPoolExecutor(self.n_jobs) as pool:
                self.trees_ = list(pool.map(one, seqs))
        else:
            self.trees_ = [one(ss) for ss in seqs]
        self.lo_, self.hi_ = float(y.min()), float(y.max())
        return self

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=float)
        total = np.zeros(len(X))
        for tree in self.trees_:
            total += tree.predict(X)
        return np.clip(total / len(self.trees_), self.lo_, self.hi_)

    def get_state(self):
        meta = {"n_trees": self.n_trees, "max_depth": self.max_depth, "min_leaf": self.min_leaf,
                "max_features": self.max_features, "bootstrap": self.bootstrap,
                "seed": self.seed, "lo": self.lo_, "hi": self.hi_}
        return meta, pack_trees(self.trees_)

    @classmethod
    def from_state(cls, meta, arrays):
        obj = cls(meta["n_trees"], meta["max_depth"], meta["min_leaf"], meta["max_features"],
                  meta["bootstrap"], meta["seed"])
        obj.trees_ = unpack_trees(arrays)
        obj.lo_, obj.hi_ = meta["lo"], meta["hi"]
        return obj


def pack_trees(trees):
    """Concatenate tree arrays with an offset table for storage."""
    sizes = np.array([t.n_nodes for t in trees], dtype=np.int64)
    out = {"tree_sizes": sizes}
    for name in ("feature", "threshold", "left", "right", "value"):
        out[f"tree_{name}"] = np.concatenate([getattr(t, name) for t in trees])
    return out


def unpack_trees(arrays):
    bounds = np.concatenate([[0], np.cumsum(arrays["tree_sizes"])])
    trees = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        trees.append(Tree(*(np.ascontiguousarray(arrays[f"tree_{n}"][a:b])
                            for n in ("feature", "threshold", "left", "right", "value"))))
    return trees


def rf_fit(X, y, n_trees=100, max_depth=None, min_leaf=1, max_features=1 / 3,
           seed=0, bootstrap=True, n_jobs=1) -> RandomForestRegressor:
    return RandomForestRegressor(n_trees, max_depth, min_leaf, max_features, bootstrap,
                                 seed, n_jobs).fit(X, y)
