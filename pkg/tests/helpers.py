"""Independent oracles shared by the test suite.

Everything here is written as the literal, slow definition of the quantity
under test (triple sums, double loops, dense angle grids) so the fast
library implementations have something independent to agree with.
"""

import numpy as np

from l1scut.data import ClassPartition, LabeledDataset


def dispersions_bruteforce(v, ds):
    """Literal triple-sum between/within L1 dispersions of projected data."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    z = ds.X.T @ v
    num = 0.0
    den = 0.0
    for k in range(1, ds.C + 1):
        inside = np.flatnonzero(ds.labels == k)
        outside = np.flatnonzero(ds.labels != k)
        n_k = inside.size
        m_k = outside.size
        for i in inside:
            for j in outside:
                num += abs(z[i] - z[j]) / (n_k * m_k)
            for j in inside:
                den += abs(z[i] - z[j]) / (n_k * n_k)
    return num, den


def objective_bruteforce(v, ds):
    """Literal L1 dispersion ratio; None when the denominator is 0."""
    num, den = dispersions_bruteforce(v, ds)
    if den == 0.0:
        return None
    return num / den


def accumulators_bruteforce(v, ds):
    """Literal signed pair sums for p and b (ties contribute sign -1)."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    z = ds.X.T @ v
    p = np.zeros(ds.D)
    b = np.zeros(ds.D)
    for k in range(1, ds.C + 1):
        inside = np.flatnonzero(ds.labels == k)
        outside = np.flatnonzero(ds.labels != k)
        n_k = inside.size
        m_k = outside.size
        for i in inside:
            for j in outside:
                sign = 1.0 if z[i] - z[j] > 0 else -1.0
                p += sign * (ds.X[:, i] - ds.X[:, j]) / (n_k * m_k)
            for j in inside:
                sign = 1.0 if z[i] - z[j] > 0 else -1.0
                b += sign * (ds.X[:, i] - ds.X[:, j]) / (n_k * n_k)
    return p, b


def scatter_bruteforce(ds):
    """Literal double-loop between/within dissimilarity matrices."""
    s_b = np.zeros((ds.D, ds.D))
    s_w = np.zeros((ds.D, ds.D))
    for k in range(1, ds.C + 1):
        inside = np.flatnonzero(ds.labels == k)
        outside = np.flatnonzero(ds.labels != k)
        n_k = inside.size
        m_k = outside.size
        for i in inside:
            for j in outside:
                diff = ds.X[:, i] - ds.X[:, j]
                s_b += np.outer(diff, diff) / (n_k * m_k)
            for j in inside:
                diff = ds.X[:, i] - ds.X[:, j]
                s_w += np.outer(diff, diff) / (n_k * n_k)
    return s_b, s_w


def grid_best_2d(ds, n_angles=3600):
    """Max of the objective over n_angles directions spanning half a turn.

    Pairs are enumerated once (unordered, with the class-normalized weights
    of both orderings merged) and evaluated against all angles in chunks,
    which keeps the dense scan fast enough for the acceptance budget.
    Directions with a zero within-class sum are skipped. Returns
    (best objective, best angle).
    """
    X = ds.X
    n = ds.n
    labels = ds.labels
    part = ClassPartition.from_dataset(ds)
    counts = {k + 1: int(part.counts[k]) for k in range(part.C)}
    co = {k + 1: int(part.co_counts[k]) for k in range(part.C)}
    ii, jj = np.triu_indices(n, k=1)
    delta = X[:, ii] - X[:, jj]  # (2, P)
    w_num = np.zeros(ii.size)
    w_den = np.zeros(ii.size)
    cross = labels[ii] != labels[jj]
    same = ~cross
    la, lb = labels[ii][cross], labels[jj][cross]
    w_num[cross] = np.array(
        [1.0 / (counts[a] * co[a]) + 1.0 / (counts[b] * co[b]) for a, b in zip(la, lb)]
    )
    ls = labels[ii][same]
    w_den[same] = np.array([2.0 / (counts[a] * counts[a]) for a in ls])
    angles = np.arange(n_angles) * (np.pi / n_angles)
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)  # (A, 2)
    chunk = 256  # keep each (A, chunk) slab cache-resident
    buf = np.empty((n_angles, chunk))

    def weighted_abs_sum(d, w):
        total = np.zeros(n_angles)
        for lo in range(0, w.size, chunk):
            hi = min(lo + chunk, w.size)
            slab = buf[:, : hi - lo]
            np.matmul(dirs, d[:, lo:hi], out=slab)
            np.abs(slab, out=slab)
            total += slab @ w[lo:hi]
        return total

    # Cross-class and same-class weights live on disjoint pair sets, so
    # each sum only needs its own pairs.
    num = weighted_abs_sum(delta[:, cross], w_num[cross])
    den = weighted_abs_sum(delta[:, same], w_den[same])
    valid = den > 0
    ratio = np.full(n_angles, -np.inf)
    ratio[valid] = num[valid] / den[valid]
    best = int(np.argmax(ratio))
    return float(ratio[best]), float(angles[best])


def knn_bruteforce(train, test_X, k=1):
    """Naive k-NN with the same tie rules written as explicit loops."""
    test_X = np.asarray(test_X, dtype=np.float64)
    out = np.empty(test_X.shape[1], dtype=np.int64)
    for t in range(test_X.shape[1]):
        d2 = [
            (float(np.sum((test_X[:, t] - train.X[:, i]) ** 2)), i)
            for i in range(train.n)
        ]
        d2.sort(key=lambda pair: (pair[0], pair[1]))
        votes = [train.labels[i] for _, i in d2[:k]]
        best_label, best_count = None, -1
        for label in range(1, train.C + 1):
            count = votes.count(label)
            if count > best_count:
                best_label, best_count = label, count
        out[t] = best_label
    return out


def metrics_bruteforce(predicted, truth, n_classes):
    """Confusion-matrix enumeration of OA and per-class / macro F1."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    confusion = np.zeros((n_classes + 1, n_classes + 1), dtype=np.int64)
    for p, t in zip(predicted, truth):
        confusion[int(t), int(p)] += 1
    oa = float(np.trace(confusion)) / float(len(truth))
    f1 = []
    for c in range(1, n_classes + 1):
        tp = int(confusion[c, c])
        fp = int(confusion[:, c].sum() - tp)
        fn = int(confusion[c, :].sum() - tp)
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1.append(
            2.0 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
    return oa, float(np.mean(f1)), tuple(f1)


def angle_between(u, v):
    """Angle in radians between two directions, sign-insensitive."""
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    c = abs(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v))
    return float(np.arccos(min(1.0, c)))


def two_blob_dataset(seed, n_classes=2, dim=2, per_class=30, separation=3.0):
    """Small seeded mixture for oracle sweeps."""
    from l1scut.data import random_blobs

    return random_blobs(n_classes, dim, per_class, separation=separation, seed=seed)


def random_unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def make_outlier_benchmark(seed, sep=6.0, nuisance=8.0, n_nuis=3, per_class=100):
    """Two anisotropic classes in D=10 with 10 percent outliers at 20x scale.

    The class covariance carries a few high-variance nuisance directions
    (hidden behind a seeded rotation) so the squared-distance scatters give
    outliers quadratic leverage while the L1 dispersions scale linearly.
    """
    from l1scut.data import GmmComponent, synth_gmm

    d = 10
    var = np.ones(d)
    var[2 : 2 + n_nuis] = nuisance
    mu = np.zeros(d)
    mu[0] = sep / 2.0
    rng = np.random.default_rng(seed)
    rot = np.linalg.qr(rng.standard_normal((d, d)))[0]
    cov = rot @ np.diag(var) @ rot.T
    specs = [
        [GmmComponent(mean=rot @ mu, cov=cov, count=per_class)],
        [GmmComponent(mean=-(rot @ mu), cov=cov, count=per_class)],
    ]
    return synth_gmm(specs, outlier_fraction=0.1, outlier_scale=20.0, seed=seed)
