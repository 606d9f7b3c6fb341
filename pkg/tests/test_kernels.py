import subprocess
import sys

import numpy as np
import pytest

from hda import _kernels


def test_pairwise_numpy_matches_direct_loop():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((7, 4))
    b = rng.standard_normal((9, 4))
    d2 = _kernels.pairwise_sq_dists_numpy(a, b)
    for i in range(7):
        for j in range(9):
            assert abs(d2[i, j] - np.sum((a[i] - b[j]) ** 2)) < 1e-10


def test_vote_numpy_tie_rules():
    d2 = np.array([[1.0, 1.0, 2.0]])
    labels = np.array([2, 1, 0])
    # k=1: index 0 wins the distance tie
    assert _kernels.knn_vote_numpy(d2, labels, 1, 3)[0] == 2
    # k=2: labels 2 and 1 tie on votes, the smaller label wins
    assert _kernels.knn_vote_numpy(d2, labels, 2, 3)[0] == 1


@pytest.mark.skipif(not _kernels.USE_NUMBA, reason="numba backend inactive")
def test_jit_matches_numpy_pairwise():
    rng = np.random.default_rng(1)
    for _ in range(5):
        a = rng.standard_normal((int(rng.integers(1, 40)), 6))
        b = rng.standard_normal((int(rng.integers(1, 40)), 6))
        jit = _kernels._pairwise_sq_dists_jit(a, b)
        ref = _kernels.pairwise_sq_dists_numpy(a, b)
        assert np.abs(jit - ref).max() < 1e-10


@pytest.mark.skipif(not _kernels.USE_NUMBA, reason="numba backend inactive")
def test_jit_matches_numpy_vote_including_ties():
    rng = np.random.default_rng(2)
    for _ in range(10):
        m, n = int(rng.integers(1, 30)), int(rng.integers(1, 50))
        # quantized distances force plenty of exact ties
        d2 = np.round(rng.uniform(0, 3, size=(m, n)) * 4) / 4
        labels = rng.integers(0, 4, size=n).astype(np.int64)
        k = int(rng.integers(1, n + 1))
        ref = _kernels.knn_vote_numpy(d2, labels, k, 4)
        jit = _kernels._knn_vote_jit(d2, labels, k, 4)
        assert np.array_equal(ref, jit)


@pytest.mark.skipif(not _kernels.USE_NUMBA, reason="numba backend inactive")
def test_backends_agree_end_to_end():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((40, 8))
    b = rng.standard_normal((120, 8))
    labels = rng.integers(0, 5, size=120).astype(np.int64)
    d2_jit = _kernels.pairwise_sq_dists(a, b)
    d2_np = _kernels.pairwise_sq_dists_numpy(a, b)
    assert np.array_equal(
        _kernels.knn_vote(d2_jit, labels, 3, 5),
        _kernels.knn_vote_numpy(d2_np, labels, 3, 5),
    )


def test_env_flag_selects_numpy_fallback():
    code = "import hda; print(hda.backend_name())"
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env={"PATH": "/usr/bin:/bin", "HDA_NUMBA": "0"},
    )
    assert out.stdout.strip() == "numpy"


def test_dispatch_matches_backend_flag():
    expected = "numba" if _kernels.USE_NUMBA else "numpy"
    assert _kernels.backend_name() == expected
