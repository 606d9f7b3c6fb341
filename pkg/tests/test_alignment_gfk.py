import numpy as np
import pytest

from hda.alignment import (
    gfk_decompose,
    gfk_distance,
    gfk_flow,
    gfk_kernel,
    gfk_quadrature_oracle,
    gfk_similarity,
)
from hda.errors import DimensionError, GeometryError, ParameterError
from hda.subspace import SubspaceBasis, principal_angles

from conftest import angled_pair, random_basis


def random_pair(rng, D, d):
    return random_basis(rng, D, d), random_basis(rng, D, d)


def check_decomposition(dec, tol=1e-8):
    Xs = dec.source_basis.basis
    Xt = dec.target_basis.basis
    R = dec.complement.basis
    gamma = np.diag(np.cos(dec.theta))
    sigma = np.diag(np.sin(dec.theta))
    assert np.abs(Xs.T @ Xt - dec.U1 @ gamma @ dec.V.T).max() <= tol
    assert np.abs(R.T @ Xt + dec.U2 @ sigma @ dec.V.T).max() <= tol
    d = Xs.shape[1]
    assert np.abs(dec.U1.T @ dec.U1 - np.eye(d)).max() <= tol
    assert np.abs(dec.V.T @ dec.V - np.eye(d)).max() <= tol
    assert np.abs(dec.U2.T @ dec.U2 - np.eye(d)).max() <= tol


def test_decompose_identical_subspaces():
    rng = np.random.default_rng(0)
    Xs = random_basis(rng, 11, 4)
    dec = gfk_decompose(Xs, Xs)
    assert dec.theta.max() <= 1e-7
    check_decomposition(dec)


def test_decompose_planar_angle():
    Xs, Xt = angled_pair(2, [0.3])
    dec = gfk_decompose(Xs, Xt)
    assert abs(dec.theta[0] - 0.3) < 1e-12
    check_decomposition(dec)


def test_decompose_matches_independent_svd():
    rng = np.random.default_rng(1)
    Xs, Xt = random_pair(rng, 20, 5)
    dec = gfk_decompose(Xs, Xt)
    sing = np.linalg.svd(Xs.basis.T @ Xt.basis, compute_uv=False)
    oracle = np.arccos(np.clip(sing, 0.0, 1.0))
    assert np.abs(np.sort(dec.theta) - np.sort(oracle)).max() <= 1e-9
    assert np.abs(dec.theta - principal_angles(Xs, Xt)).max() <= 1e-9


def test_decompose_random_invariants():
    rng = np.random.default_rng(2)
    for _ in range(10):
        D = int(rng.integers(6, 40))
        d = int(rng.integers(1, D // 2 + 1))
        dec = gfk_decompose(*random_pair(rng, D, d))
        check_decomposition(dec)


def test_decompose_geometry_and_dimension_errors():
    rng = np.random.default_rng(3)
    with pytest.raises(GeometryError):
        gfk_decompose(*random_pair(rng, 5, 3))
    with pytest.raises(DimensionError):
        gfk_decompose(random_basis(rng, 8, 2), random_basis(rng, 10, 2))


def test_flow_starts_at_source_subspace():
    rng = np.random.default_rng(4)
    Xs, Xt = random_pair(rng, 14, 3)
    dec = gfk_decompose(Xs, Xt)
    phi0 = gfk_flow(dec, 0.0)
    assert principal_angles(phi0, Xs).max() < 1e-9


def test_flow_ends_at_target_subspace():
    rng = np.random.default_rng(5)
    Xs, Xt = random_pair(rng, 14, 3)
    dec = gfk_decompose(Xs, Xt)
    phi1 = gfk_flow(dec, 1.0)
    # arccos saturation keeps exactly-matching subspaces around 1e-8
    assert principal_angles(phi1, Xt).max() < 1e-7


def test_flow_orthonormal_along_the_path():
    rng = np.random.default_rng(6)
    dec = gfk_decompose(*random_pair(rng, 16, 4))
    for t in np.linspace(0.0, 1.0, 21):
        phi = gfk_flow(dec, t)
        assert np.abs(phi.basis.T @ phi.basis - np.eye(4)).max() <= 1e-8


def test_flow_planar_midpoint():
    Xs, Xt = angled_pair(2, [0.3])
    dec = gfk_decompose(Xs, Xt)
    phi = gfk_flow(dec, 0.5).basis[:, 0]
    expected = np.array([np.cos(0.15), np.sin(0.15)])
    assert min(np.abs(phi - expected).max(), np.abs(phi + expected).max()) < 1e-12


def test_flow_range_error():
    rng = np.random.default_rng(7)
    dec = gfk_decompose(*random_pair(rng, 10, 2))
    with pytest.raises(ParameterError):
        gfk_flow(dec, -0.01)
    with pytest.raises(ParameterError):
        gfk_flow(dec, 1.01)


def test_kernel_zero_angle_limit():
    rng = np.random.default_rng(8)
    Xs = random_basis(rng, 12, 3)
    kern = gfk_kernel(gfk_decompose(Xs, Xs))
    assert np.allclose(kern.lambda1, 2.0, atol=1e-12)
    assert np.allclose(kern.lambda2, 0.0, atol=1e-12)
    assert np.allclose(kern.lambda3, 0.0, atol=1e-12)
    assert np.abs(kern.G - 2.0 * Xs.basis @ Xs.basis.T).max() <= 1e-10


def test_kernel_matches_quadrature_in_the_plane():
    Xs, Xt = angled_pair(2, [0.3])
    dec = gfk_decompose(Xs, Xt)
    G = gfk_kernel(dec).G
    oracle = gfk_quadrature_oracle(dec, 10001)
    assert np.abs(G - oracle).max() <= 1e-8


def test_kernel_symmetric_psd_low_rank():
    rng = np.random.default_rng(9)
    for _ in range(5):
        D = int(rng.integers(8, 40))
        d = int(rng.integers(1, D // 2 + 1))
        kern = gfk_kernel(gfk_decompose(*random_pair(rng, D, d)))
        assert np.abs(kern.G - kern.G.T).max() <= 1e-10
        eig = np.linalg.eigvalsh(kern.G)
        assert eig.min() >= -1e-9
        tail = np.sort(np.abs(eig))[::-1][2 * d :]
        if tail.size:
            assert tail.max() < 1e-9


def test_oracle_constant_integrand_at_zero_angle():
    rng = np.random.default_rng(10)
    Xs = random_basis(rng, 9, 2)
    dec = gfk_decompose(Xs, Xs)
    for n_points in (3, 11, 101):
        oracle = gfk_quadrature_oracle(dec, n_points)
        assert np.abs(oracle - 2.0 * Xs.basis @ Xs.basis.T).max() <= 1e-12


def test_oracle_simpson_convergence():
    rng = np.random.default_rng(11)
    dec = gfk_decompose(*random_pair(rng, 12, 3))
    G = gfk_kernel(dec).G
    errs = [np.linalg.norm(G - gfk_quadrature_oracle(dec, n)) for n in (11, 101, 1001)]
    assert errs[0] > errs[1] > errs[2]


def test_oracle_parameter_errors():
    rng = np.random.default_rng(12)
    dec = gfk_decompose(*random_pair(rng, 8, 2))
    with pytest.raises(ParameterError):
        gfk_quadrature_oracle(dec, 10)
    with pytest.raises(ParameterError):
        gfk_quadrature_oracle(dec, 1)


def test_kernel_small_angle_regimes_match_oracle():
    # exercises the analytic limits (theta < 1e-8) and the Taylor branch
    # (theta < 1e-4) against plain quadrature
    Xs, Xt = angled_pair(12, [0.0, 1e-9, 1e-7, 1e-5, 0.3])
    dec = gfk_decompose(Xs, Xt)
    G = gfk_kernel(dec).G
    oracle = gfk_quadrature_oracle(dec, 10001)
    # the analytic-limit branch flattens lambda2 below 1e-8, leaving a
    # deviation of that order against plain quadrature
    assert np.linalg.norm(G - oracle) / np.linalg.norm(G) < 1e-8


def test_similarity_and_distance_basics():
    rng = np.random.default_rng(13)
    Xs = random_basis(rng, 8, 2)
    kern = gfk_kernel(gfk_decompose(Xs, Xs))
    x = rng.standard_normal(8)
    assert gfk_distance(kern, x, x) == 0.0
    y = rng.standard_normal(8)
    assert abs(gfk_distance(kern, x, y) - gfk_distance(kern, y, x)) <= 1e-12


def test_similarity_hand_values():
    Xs = SubspaceBasis(basis=np.eye(2)[:, :1])
    kern = gfk_kernel(gfk_decompose(Xs, Xs))
    xi = np.array([1.0, 0.0])
    xj = np.array([0.0, 1.0])
    assert abs(gfk_similarity(kern, xi, xj)) <= 1e-12
    assert abs(gfk_distance(kern, xi, xj) - np.sqrt(2.0)) <= 1e-12


def test_similarity_dimension_errors():
    rng = np.random.default_rng(14)
    kern = gfk_kernel(gfk_decompose(*random_pair(rng, 8, 2)))
    with pytest.raises(DimensionError):
        gfk_similarity(kern, np.ones(7), np.ones(8))
    with pytest.raises(DimensionError):
        gfk_distance(kern, np.ones(8), np.ones(9))
