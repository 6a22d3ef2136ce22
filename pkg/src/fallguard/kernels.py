"""Hot numeric kernels, each with a numba loop version and a numpy version.

Both versions of a kernel produce bit-identical results: floating-point
reductions are written so that accumulation order is the same on both paths
(sequential, index-ascending), and integer quantities are kept integral until
the final division.  ``tests/test_kernels.py`` checks the equality.

The public names (``best_split``, ``tree_predict``, ``knn_vote``,
``motion_rate``) dispatch to whichever backend ``_accel`` selected.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

# --------------------------------------------------------------------------
# split search


def _midpoint(lo, hi):
    thr = lo / 2.0 + hi / 2.0
    if thr >= hi or not np.isfinite(thr):
        thr = lo
    return thr


def _best_split_loops(X, y, idx, features, max_features, n_classes):
    n = idx.shape[0]
    total = np.zeros(n_classes, dtype=np.int64)
    for i in range(n):
        total[y[idx[i]]] += 1
    ss_total = 0
    for c in range(n_classes):
        ss_total += total[c] * total[c]

    vals = np.empty(n, dtype=np.float64)
    left = np.zeros(n_classes, dtype=np.int64)
    best_score = -1.0
    best_feature = -1
    best_threshold = 0.0
    scanned = 0
    for fi in range(features.shape[0]):
        if scanned >= max_features and best_feature >= 0:
            break
        scanned += 1
        f = features[fi]
        for i in range(n):
            vals[i] = X[idx[i], f]
        order = np.argsort(vals)
        left[:] = 0
        ssl = 0
        ssr = ss_total
        for p in range(n - 1):
            c = y[idx[order[p]]]
            ssl += 2 * left[c] + 1
            ssr -= 2 * (total[c] - left[c]) - 1
            left[c] += 1
            lo = vals[order[p]]
            hi = vals[order[p + 1]]
            if lo < hi:
                n_left = p + 1
                score = ssl / n_left + ssr / (n - n_left)
                if score > best_score:
                    best_score = score
                    best_feature = f
                    thr = lo / 2.0 + hi / 2.0
                    if thr >= hi or not np.isfinite(thr):
                        thr = lo
                    best_threshold = thr
    return best_feature, best_threshold, best_score


def _best_split_numpy(X, y, idx, features, max_features, n_classes):
    n = idx.shape[0]
    y_node = y[idx]
    total = np.bincount(y_node, minlength=n_classes).astype(np.int64)
    n_left = np.arange(1, n, dtype=np.int64)
    n_right = n - n_left
    rows = np.arange(n)
    best_score = -1.0
    best_feature = -1
    best_threshold = 0.0
    for scanned, f in enumerate(features):
        if scanned >= max_features and best_feature >= 0:
            break
        vals = X[idx, f]
        order = np.argsort(vals)
        sv = vals[order]
        valid = sv[:-1] < sv[1:]
        if not valid.any():
            continue
        onehot = np.zeros((n, n_classes), dtype=np.int64)
        onehot[rows, y_node[order]] = 1
        cl = np.cumsum(onehot, axis=0)[:-1]
        cr = total - cl
        score = (cl * cl).sum(axis=1) / n_left + (cr * cr).sum(axis=1) / n_right
        score[~valid] = -np.inf
        p = int(np.argmax(score))
        if score[p] > best_score:
            best_score = float(score[p])
            best_feature = int(f)
            best_threshold = float(_midpoint(sv[p], sv[p + 1]))
    return best_feature, best_threshold, best_score


# --------------------------------------------------------------------------
# tree traversal


def _tree_predict_loops(X, feature, threshold, left, right, leaf_class):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        node = 0
        while left[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = leaf_class[node]
    return out


def _tree_predict_numpy(X, feature, threshold, left, right, leaf_class):
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int64)
    rows = np.arange(n)
    active = left[node] >= 0
    while active.any():
        r = rows[active]
        cur = node[r]
        go_left = X[r, feature[cur]] <= threshold[cur]
        node[r] = np.where(go_left, left[cur], right[cur])
        active = left[node] >= 0
    return leaf_class[node].astype(np.int64)


# --------------------------------------------------------------------------
# k nearest neighbours


def _knn_vote_loops(Q, S, ys, k, n_classes):
    nq = Q.shape[0]
    m = S.shape[0]
    nf = S.shape[1]
    labels = np.empty(nq, dtype=np.int64)
    votes = np.empty(nq, dtype=np.int64)
    best_d = np.empty(k, dtype=np.float64)
    best_j = np.empty(k, dtype=np.int64)
    counts = np.zeros(n_classes, dtype=np.int64)
    for q in range(nq):
        filled = 0
        for j in range(m):
            s = 0.0
            for f in range(nf):
                diff = Q[q, f] - S[j, f]
                s += diff * diff
            # insertion into the k best; strict < keeps the earlier index on
            # equal distance, matching a stable sort
            if filled < k:
                pos = filled
                filled += 1
            elif s < best_d[k - 1]:
                pos = k - 1
            else:
                continue
            while pos > 0 and s < best_d[pos - 1]:
                best_d[pos] = best_d[pos - 1]
                best_j[pos] = best_j[pos - 1]
                pos -= 1
            best_d[pos] = s
            best_j[pos] = j
        counts[:] = 0
        for j in range(k):
            counts[ys[best_j[j]]] += 1
        best = 0
        for c in range(1, n_classes):
            if counts[c] > counts[best]:
                best = c
        labels[q] = best
        votes[q] = counts[best]
    return labels, votes


def _knn_vote_numpy(Q, S, ys, k, n_classes, chunk=128):
    nq = Q.shape[0]
    labels = np.empty(nq, dtype=np.int64)
    votes = np.empty(nq, dtype=np.int64)
    for start in range(0, nq, chunk):
        block = Q[start : start + chunk]
        d = np.zeros((block.shape[0], S.shape[0]))
        for f in range(S.shape[1]):
            diff = block[:, f, None] - S[None, :, f]
            d += diff * diff
        nearest = np.argsort(d, axis=1, kind="stable")[:, :k]
        neighbour_labels = ys[nearest]
        counts = np.zeros((block.shape[0], n_classes), dtype=np.int64)
        for c in range(n_classes):
            counts[:, c] = (neighbour_labels == c).sum(axis=1)
        best = np.argmax(counts, axis=1)
        labels[start : start + chunk] = best
        votes[start : start + chunk] = counts[np.arange(block.shape[0]), best]
    return labels, votes


# --------------------------------------------------------------------------
# motion


def _motion_rate_loops(times, vecs):
    n = times.shape[0]
    if n < 2:
        return np.nan
    n_points = vecs.shape[1] // 2
    total = 0.0
    for p in range(1, n):
        acc = 0.0
        for k in range(n_points):
            dx = vecs[p, 2 * k] - vecs[p - 1, 2 * k]
            dy = vecs[p, 2 * k + 1] - vecs[p - 1, 2 * k + 1]
            acc += np.sqrt(dx * dx + dy * dy)
        total += (acc / n_points) / (times[p] - times[p - 1])
    return total / (n - 1)


def _motion_rate_numpy(times, vecs):
    n = times.shape[0]
    if n < 2:
        return np.nan
    d = vecs[1:] - vecs[:-1]
    dx = d[:, 0::2]
    dy = d[:, 1::2]
    disp = np.sqrt(dx * dx + dy * dy)
    # cumsum accumulates sequentially, matching the loop version bit for bit
    acc = np.cumsum(disp, axis=1)[:, -1]
    rates = (acc / disp.shape[1]) / (times[1:] - times[:-1])
    return float(np.cumsum(rates)[-1] / (n - 1))


# --------------------------------------------------------------------------

_best_split_nb = njit(_best_split_loops)
_tree_predict_nb = njit(_tree_predict_loops)
_knn_vote_nb = njit(_knn_vote_loops)
_motion_rate_nb = njit(_motion_rate_loops)

NUMBA_IMPL = {
    "best_split": _best_split_nb,
    "tree_predict": _tree_predict_nb,
    "knn_vote": _knn_vote_nb,
    "motion_rate": _motion_rate_nb,
}
NUMPY_IMPL = {
    "best_split": _best_split_numpy,
    "tree_predict": _tree_predict_numpy,
    "knn_vote": _knn_vote_numpy,
    "motion_rate": _motion_rate_numpy,
}
_ACTIVE = NUMBA_IMPL if USE_NUMBA else NUMPY_IMPL


def best_split(X, y, idx, features, max_features, n_classes):
    """Find the Gini-optimal axis-aligned split of the samples ``idx``.

    ``features`` is scanned in order; the scan stops once ``max_features``
    features have been examined and at least one valid split exists.  Ties
    keep the earliest (feature, threshold) candidate.

    Returns ``(feature, threshold, score)`` where ``feature == -1`` means no
    feature separates the node.  ``score`` is ``sum(left_counts**2)/n_left +
    sum(right_counts**2)/n_right``; maximising it minimises weighted Gini.
    """
    f, thr, score = _ACTIVE["best_split"](X, y, idx, features, max_features, n_classes)
    return int(f), float(thr), float(score)


def tree_predict(X, feature, threshold, left, right, leaf_class):
    """Route each row of ``X`` to a leaf; samples with x <= threshold go left."""
    return _ACTIVE["tree_predict"](X, feature, threshold, left, right, leaf_class)


def knn_vote(Q, S, ys, k, n_classes):
    """Majority label among the ``k`` nearest stored rows for every query row.

    Distances are squared Euclidean; equal distances rank by stored index and
    equal vote counts resolve to the lowest class index.
    Returns ``(labels, votes)``.
    """
    return _ACTIVE["knn_vote"](Q, S, ys, k, n_classes)


def motion_rate(times, vecs):
    """Mean per-keypoint displacement rate over a buffer of feature vectors.

    ``vecs`` rows are interleaved (x0, y0, x1, y1, ...).  NaN for fewer than
    two rows.
    """
    return float(_ACTIVE["motion_rate"](times, vecs))
