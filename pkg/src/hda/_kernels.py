"""Hot numeric kernels: pairwise squared distances and k-NN voting.

The numba-compiled paths are used by default.  Set ``HDA_NUMBA=0`` in the
environment (or uninstall numba) to force the pure-numpy fallback; both
paths implement the same deterministic tie rules.  ``benchmarks/
bench_kernels.py`` compares the two.
"""

import os

import numpy as np


def _want_numba():
    flag = os.environ.get("HDA_NUMBA", "1").strip().lower()
    if flag in ("0", "false", "off", "no"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USE_NUMBA = _want_numba()


def backend_name():
    """Name of the active kernel backend, ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"


def pairwise_sq_dists_numpy(a, b):
    """Squared Euclidean distances between the rows of ``a`` (m, d) and ``b`` (n, d)."""
    aa = np.einsum("ij,ij->i", a, a)
    bb = np.einsum("ij,ij->i", b, b)
    d2 = aa[:, None] + bb[None, :] - 2.0 * (a @ b.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def knn_vote_numpy(d2, labels, k, n_classes):
    """Majority label over the k smallest entries of each row of ``d2``.

    Distance ties resolve to the lower training index (stable sort); vote
    ties resolve to the smallest label.
    """
    pred = np.empty(d2.shape[0], dtype=np.int64)
    for i in range(d2.shape[0]):
        nearest = np.argsort(d2[i], kind="stable")[:k]
        counts = np.bincount(labels[nearest], minlength=n_classes)
        pred[i] = np.argmax(counts)
    return pred


if USE_NUMBA:
    import numba

    @numba.njit(cache=True)
    def _pairwise_sq_dists_jit(a, b):
        m, d = a.shape
        n = b.shape[0]
        out = np.empty((m, n))
        for i in range(m):
            for j in range(n):
                acc = 0.0
                for t in range(d):
                    diff = a[i, t] - b[j, t]
                    acc += diff * diff
                out[i, j] = acc
        return out

    @numba.njit(cache=True)
    def _knn_vote_jit(d2, labels, k, n_classes):
        m, n = d2.shape
        pred = np.empty(m, dtype=np.int64)
        taken = np.empty(k, dtype=np.int64)
        counts = np.empty(n_classes, dtype=np.int64)
        used = np.empty(n, dtype=np.bool_)
        for i in range(m):
            used[:] = False
            for j in range(k):
                best = -1
                best_d = np.inf
                # strict < while scanning ascending indices keeps the
                # lowest index on exact distance ties
                for t in range(n):
                    if not used[t] and d2[i, t] < best_d:
                        best = t
                        best_d = d2[i, t]
                used[best] = True
                taken[j] = best
            counts[:] = 0
            for j in range(k):
                counts[labels[taken[j]]] += 1
            best_label = 0
            best_count = -1
            for c in range(n_classes):
                if counts[c] > best_count:
                    best_count = counts[c]
                    best_label = c
            pred[i] = best_label
        return pred


def pairwise_sq_dists(a, b):
    """Dispatch to the active backend."""
    if USE_NUMBA:
        return _pairwise_sq_dists_jit(
            np.ascontiguousarray(a, dtype=np.float64),
            np.ascontiguousarray(b, dtype=np.float64),
        )
    return pairwise_sq_dists_numpy(a, b)


def knn_vote(d2, labels, k, n_classes):
    """Dispatch to the active backend."""
    if USE_NUMBA:
        return _knn_vote_jit(
            np.ascontiguousarray(d2, dtype=np.float64),
            np.ascontiguousarray(labels, dtype=np.int64),
            k,
            n_classes,
        )
    return knn_vote_numpy(d2, labels, k, n_classes)
