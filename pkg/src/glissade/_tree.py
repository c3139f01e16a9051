"""Numba kernels for growing and evaluating binary Gini trees.

The grower is iterative (explicit stack) and keeps one presorted index
row per feature, repartitioned stably at each split, so no per-node
sorting is needed. Feature candidates per node come from `feat_rand`:
row (node mod rows) is argsorted and the first n_feat_split entries are
the candidates, which keeps node-level feature sampling deterministic
for a fixed matrix. Split ties break toward the lowest feature index
and lowest threshold; leaf ties toward label 0.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def grow(X, y, idx, max_depth, min_leaf, feat_rand, n_feat_split):
    m = idx.shape[0]
    n_feat = X.shape[1]
    max_nodes = 2 * m + 1
    feature = np.full(max_nodes, -1, np.int64)
    thresh = np.zeros(max_nodes, np.float64)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    label = np.full(max_nodes, -1, np.int64)

    # gather the sample once; j below is a position in this local copy
    Xl = np.empty((m, n_feat), np.float64)
    yl = np.empty(m, np.int64)
    for j in range(m):
        s = idx[j]
        yl[j] = y[s]
        for f in range(n_feat):
            Xl[j, f] = X[s, f]
    order = np.empty((n_feat, m), np.int64)
    col = np.empty(m, np.float64)
    for f in range(n_feat):
        for j in range(m):
            col[j] = Xl[j, f]
        order[f] = np.argsort(col, kind='mergesort')

    mask = np.empty(m, np.uint8)
    buf = np.empty(m, np.int64)
    stack = np.empty((max_nodes, 4), np.int64)
    n_nodes = 1
    stack[0, 0] = 0
    stack[0, 1] = m
    stack[0, 2] = 0
    stack[0, 3] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        start = stack[sp, 0]
        end = stack[sp, 1]
        depth = stack[sp, 2]
        node = stack[sp, 3]
        cnt = end - start
        c1 = 0
        for p in range(start, end):
            c1 += yl[order[0, p]]
        c0 = cnt - c1
        if (c1 == 0 or c0 == 0 or (max_depth >= 0 and depth >= max_depth)
                or cnt < 2 * min_leaf or cnt < 2):
            label[node] = 1 if c1 > c0 else 0
            continue
        cand_order = np.argsort(feat_rand[node % feat_rand.shape[0]])
        cand = np.sort(cand_order[:n_feat_split])
        best_gini = 1e300
        best_f = -1
        best_t = 0.0
        for fi in range(n_feat_split):
            f = cand[fi]
            ones = 0
            for p in range(cnt - 1):
                j = order[f, start + p]
                ones += yl[j]
                vlo = Xl[j, f]
                vhi = Xl[order[f, start + p + 1], f]
                if vlo == vhi:
                    continue
                nl = p + 1
                nr = cnt - nl
                if nl < min_leaf or nr < min_leaf:
                    continue
                l1 = ones
                l0 = nl - l1
                r1 = c1 - l1
                r0 = nr - r1
                gl = 1.0 - (l1 * l1 + l0 * l0) / float(nl * nl)
                gr = 1.0 - (r1 * r1 + r0 * r0) / float(nr * nr)
                g = (nl * gl + nr * gr) / cnt
                # strict improvement keeps the first (lowest f, lowest t) on ties
                if g < best_gini - 1e-15:
                    best_gini = g
                    best_f = f
                    best_t = 0.5 * (vlo + vhi)
        if best_f < 0:
            label[node] = 1 if c1 > c0 else 0
            continue
        k = 0
        for p in range(start, end):
            j = order[best_f, p]
            if Xl[j, best_f] <= best_t:
                mask[j] = 1
                k += 1
            else:
                mask[j] = 0
        # stable partition of every feature row keeps each side sorted
        for f in range(n_feat):
            wl = 0
            wr = k
            for p in range(start, end):
                j = order[f, p]
                if mask[j] == 1:
                    buf[wl] = j
                    wl += 1
                else:
                    buf[wr] = j
                    wr += 1
            for p in range(cnt):
                order[f, start + p] = buf[p]
        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        thresh[node] = best_t
        left[node] = lid
        right[node] = rid
        stack[sp, 0] = start
        stack[sp, 1] = start + k
        stack[sp, 2] = depth + 1
        stack[sp, 3] = lid
        sp += 1
        stack[sp, 0] = start + k
        stack[sp, 1] = end
        stack[sp, 2] = depth + 1
        stack[sp, 3] = rid
        sp += 1
    return (feature[:n_nodes], thresh[:n_nodes], left[:n_nodes],
            right[:n_nodes], label[:n_nodes])


@njit(cache=True)
def evaluate(feature, thresh, left, right, label, X):
    n = X.shape[0]
    out = np.empty(n, np.int64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= thresh[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = label[node]
    return out
