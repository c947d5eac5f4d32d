"""Array-backed regression trees grown by exact greedy split enumeration.

One grower serves CART, gradient boosting and the regularized boosting
variant. For a node holding targets with sum G and count n, a leaf is
worth ``G / (n + alpha)`` and a split scores

    gain = 0.5 * (G_L^2/(n_L+alpha) + G_R^2/(n_R+alpha) - G^2/(n+alpha)) - gamma

With ``alpha = gamma = 0`` the gain is half the reduction in squared
error, so the chosen split is the CART variance-reduction split and
the leaf value is the plain mean.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

LEAF = -1


@njit(cache=True, nogil=True)
def _grow(X, y, rows, max_depth, min_leaf, max_features, feat_keys, alpha, gamma):
    n_rows = rows.shape[0]
    d = X.shape[1]
    cap = 2 * n_rows + 1
    feature = np.full(cap, LEAF, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, LEAF, dtype=np.int64)
    right = np.full(cap, LEAF, dtype=np.int64)
    value = np.zeros(cap)

    idx = rows.copy()
    buf = np.empty(n_rows, dtype=np.int64)
    xs = np.empty(n_rows)
    ys = np.empty(n_rows)

    # stack of (node, start, end, depth)
    stack = np.empty((cap, 4), dtype=np.int64)
    top = 0
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n_rows
    stack[0, 3] = 0
    top = 1
    n_nodes = 1
    use_all = max_features >= d
    feats = np.arange(d)

    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        cnt = end - start

        G = 0.0
        ymin = np.inf
        ymax = -np.inf
        for i in range(start, end):
            v = y[idx[i]]
            G += v
            if v < ymin:
                ymin = v
            if v > ymax:
                ymax = v
        if alpha == 0.0:
            if ymin == ymax:
                leaf_val = ymin
            else:
                leaf_val = min(max(G / cnt, ymin), ymax)
        else:
            leaf_val = G / (cnt + alpha)
        value[node] = leaf_val

        if (max_depth >= 0 and depth >= max_depth) or cnt < 2 * min_leaf or ymin == ymax:
            continue

        if use_all:
            cand = feats
        else:
            cand = np.sort(np.argsort(feat_keys[node])[:max_features])

        parent = G * G / (cnt + alpha)
        best_score = -np.inf
        best_f = -1
        best_thr = 0.0
        for f in cand:
            for i in range(cnt):
                r = idx[start + i]
                xs[i] = X[r, f]
                ys[i] = y[r]
            order = np.argsort(xs[:cnt], kind="mergesort")
            GL = 0.0
            for i in range(cnt - 1):
                GL += ys[order[i]]
                nl = i + 1
                nr = cnt - nl
                if nl < min_leaf:
                    continue
                if nr < min_leaf:
                    break
                a = xs[order[i]]
                b = xs[order[i + 1]]
                if a == b:
                    continue
                GR = G - GL
                score = GL * GL / (nl + alpha) + GR * GR / (nr + alpha)
                if score > best_score:
                    best_score = score
                    best_f = f
                    thr = 0.5 * (a + b)
                    if thr >= b:
                        thr = a
                    best_thr = thr

        if best_f < 0:
            continue
        gain = 0.5 * (best_score - parent) - gamma
        if not gain > 0.0:
            continue

        # stable partition of idx[start:end]
        nl = 0
        for i in range(start, end):
            if X[idx[i], best_f] <= best_thr:
                buf[nl] = idx[i]
                nl += 1
        k = nl
        for i in range(start, end):
            if X[idx[i], best_f] > best_thr:
                buf[k] = idx[i]
                k += 1
        for i in range(cnt):
            idx[start + i] = buf[i]

        lchild = n_nodes
        rchild = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lchild
        right[node] = rchild
        # push right first so the left subtree is numbered first
        stack[top, 0] = rchild
        stack[top, 1] = start + nl
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = lchild
        stack[top, 1] = start
        stack[top, 2] = start + nl
        stack[top, 3] = depth + 1
        top += 1

    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes], value[:n_nodes]


@njit(cache=True, nogil=True)
def _predict(X, feature, threshold, left, right, value):
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        node = 0
        while feature[node] != LEAF:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int(np.count_nonzero(self.feature == LEAF))

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for node in range(self.n_nodes):
            if self.feature[node] != LEAF:
                depth[self.left[node]] = depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=float)
        return _predict(X, self.feature, self.threshold, self.left, self.right, self.value)

    def to_arrays(self) -> dict:
        return {"feature": self.feature, "threshold": self.threshold, "left": self.left,
                "right": self.right, "value": self.value}


def grow_tree(X, y, max_depth=None, min_leaf=1, rows=None, max_features=None,
              rng=None, alpha=0.0, gamma=0.0) -> Tree:
    """Grow one tree on ``X[rows]``.

    ``rows`` may repeat indices (bootstrap). ``max_features`` below the
    column count samples that many candidate features per node from
    ``rng``. ``max_depth=None`` grows until leaves are pure or hit
    ``min_leaf``.
    """
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    n, d = X.shape
    if n < 1 or len(y) != n:
        raise ValueError("tree needs at least one row and matching targets")
    if min_leaf < 1:
        raise ValueError(f"min_leaf must be >= 1, got {min_leaf}")
    if max_depth is not None and max_depth < 0:
        raise ValueError(f"max_depth must be >= 0 or None, got {max_depth}")
    rows = np.arange(n, dtype=np.int64) if rows is None else np.asarray(rows, dtype=np.int64)
    mf = d if max_features is None else int(max_features)
    if not 1 <= mf <= d:
        raise ValueError(f"max_features must be in [1, {d}], got {mf}")
    if mf < d:
        if rng is None:
            raise ValueError("feature subsampling needs an rng")
        keys = rng.random((2 * len(rows) + 1, d))
    else:
        keys = np.zeros((1, d))
    arrays = _grow(X, y, rows, -1 if max_depth is None else int(max_depth), int(min_leaf),
                   mf, keys, float(alpha), float(gamma))
    return Tree(*arrays)


def tree_fit(X, y, max_depth=None, min_leaf=1) -> Tree:
    return grow_tree(X, y, max_depth=max_depth, min_leaf=min_leaf)
