import numpy as np
import pytest

from hda.alignment import sa_align, sa_embed
from hda.errors import DimensionError, ParameterError
from hda.subspace import SubspaceBasis, pca_subspace

from conftest import random_basis


def frobenius_objective(Xs, Xt, M):
    return np.linalg.norm(Xs.basis @ M - Xt.basis) ** 2


def test_aligned_domains_give_identity_transform():
    rng = np.random.default_rng(0)
    Xs = random_basis(rng, 10, 4)
    model = sa_align(Xs, Xs)
    assert np.abs(model.M - np.eye(4)).max() <= 1e-10
    assert np.abs(model.Xa - Xs.basis).max() <= 1e-12
    assert frobenius_objective(Xs, Xs, model.M) <= 1e-20


def test_hand_computed_3x2_case():
    Xs = SubspaceBasis(basis=np.eye(3)[:, [0, 1]])
    Xt = SubspaceBasis(basis=np.eye(3)[:, [0, 2]])
    model = sa_align(Xs, Xt)
    assert np.allclose(model.M, [[1.0, 0.0], [0.0, 0.0]], atol=1e-12)
    assert np.allclose(model.Xa[:, 0], [1.0, 0.0, 0.0], atol=1e-12)
    assert np.allclose(model.Xa[:, 1], 0.0, atol=1e-12)
    # residual: the e3 column cannot be reached from span(e1, e2)
    assert abs(frobenius_objective(Xs, Xt, model.M) - 1.0) < 1e-12


def test_planar_scalar_case():
    alpha = 0.3
    Xs = SubspaceBasis(basis=np.eye(2)[:, :1])
    Xt = SubspaceBasis(basis=np.array([[np.cos(alpha)], [np.sin(alpha)]]))
    model = sa_align(Xs, Xt)
    assert abs(model.M[0, 0] - np.cos(alpha)) < 1e-12


def test_closed_form_is_the_minimizer():
    rng = np.random.default_rng(42)
    for _ in range(20):
        D = int(rng.integers(4, 30))
        d = int(rng.integers(1, max(2, D // 2)))
        Xs = random_basis(rng, D, d)
        Xt = random_basis(rng, D, d)
        model = sa_align(Xs, Xt)
        best = frobenius_objective(Xs, Xt, model.M)
        for _ in range(20):
            M_alt = model.M + 1e-3 * rng.standard_normal((d, d))
            assert best <= frobenius_objective(Xs, Xt, M_alt) + 1e-12


def test_model_invariants():
    rng = np.random.default_rng(5)
    Xs = random_basis(rng, 12, 3)
    Xt = random_basis(rng, 12, 3)
    model = sa_align(Xs, Xt)
    assert np.abs(model.M - Xs.basis.T @ Xt.basis).max() <= 1e-10
    assert np.abs(model.Xa - Xs.basis @ model.M).max() <= 1e-12


def test_dimension_mismatch_errors():
    rng = np.random.default_rng(1)
    with pytest.raises(DimensionError):
        sa_align(random_basis(rng, 8, 2), random_basis(rng, 9, 2))
    with pytest.raises(DimensionError):
        sa_align(random_basis(rng, 8, 2), random_basis(rng, 8, 3))


def test_embed_identical_domains():
    rng = np.random.default_rng(2)
    Xs = random_basis(rng, 6, 2)
    model = sa_align(Xs, Xs)
    X = Xs.basis.T.copy()
    src = sa_embed(model, X, "source")
    tgt = sa_embed(model, X, "target")
    assert np.abs(src - tgt).max() <= 1e-12


def test_embed_hand_product():
    Xs = SubspaceBasis(basis=np.eye(3)[:, [0, 1]])
    Xt = SubspaceBasis(basis=np.eye(3)[:, [0, 2]])
    model = sa_align(Xs, Xt)
    emb = sa_embed(model, np.array([[1.0, 0.0, 0.0]]), "source")
    assert np.allclose(emb, [[1.0, 0.0]], atol=1e-12)


def test_embed_output_dimension():
    rng = np.random.default_rng(3)
    Xs = random_basis(rng, 9, 4)
    Xt = random_basis(rng, 9, 4)
    model = sa_align(Xs, Xt)
    for n in (1, 7, 30):
        X = rng.standard_normal((n, 9))
        assert sa_embed(model, X, "source").shape == (n, 4)
        assert sa_embed(model, X, "target").shape == (n, 4)


def test_embed_errors():
    rng = np.random.default_rng(4)
    Xs = random_basis(rng, 5, 2)
    model = sa_align(Xs, Xs)
    with pytest.raises(ParameterError):
        sa_embed(model, np.ones((1, 5)), "both")
    with pytest.raises(DimensionError):
        sa_embed(model, np.ones((1, 4)), "source")


def test_embed_uses_stored_means():
    rng = np.random.default_rng(6)
    S = rng.standard_normal((40, 6)) + 5.0
    T = rng.standard_normal((40, 6)) - 3.0
    model = sa_align(pca_subspace(S, 2), pca_subspace(T, 2))
    src = sa_embed(model, S, "source")
    assert np.abs(src - (S - S.mean(axis=0)) @ model.Xa).max() <= 1e-12
    tgt = sa_embed(model, T, "target")
    assert np.abs(tgt - (T - T.mean(axis=0)) @ model.target_basis.basis).max() <= 1e-12


def test_rotation_equivariance_of_embedded_distances():
    rng = np.random.default_rng(8)
    S = rng.standard_normal((60, 10)) * rng.uniform(0.5, 2.0, size=10)
    T = rng.standard_normal((50, 10)) * rng.uniform(0.5, 2.0, size=10)
    Q = np.linalg.qr(rng.standard_normal((10, 10)))[0]

    def embedded(S, T):
        model = sa_align(pca_subspace(S, 3), pca_subspace(T, 3))
        return sa_embed(model, S, "source"), sa_embed(model, T, "target")

    src, tgt = embedded(S, T)
    src_q, tgt_q = embedded(S @ Q.T, T @ Q.T)

    def pairwise(a, b):
        return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)

    assert np.abs(pairwise(src, tgt) - pairwise(src_q, tgt_q)).max() <= 1e-8
