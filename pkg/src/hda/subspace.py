"""PCA subspaces, orthogonal complements, principal angles and projections.

All operations are pure functions over immutable inputs; a
:class:`SubspaceBasis` is safe to share across threads once built.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, GeometryError, ParameterError, RankDeficiencyError, ValidationError

ORTHONORMALITY_TOL = 1e-10


def as_feature_matrix(X, name="X"):
    """Validate and return ``X`` as an (n, D) float64 feature matrix.

    Rows are instances, columns are feature dimensions.  Entries must be
    finite and both dimensions positive.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError(f"{name} must be a 2-D matrix, got ndim={X.ndim}")
    n, D = X.shape
    if n == 0 or D == 0:
        raise ValidationError(f"{name} must have at least one row and one column, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValidationError(f"{name} contains non-finite entries")
    return X


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SubspaceBasis:
    """An orthonormal basis of a d-dimensional subspace of R^D.

    Parameters
    ----------
    basis : ndarray, shape (D, d)
        Orthonormal columns.
    mean : ndarray, shape (D,)
        Centering offset subtracted from data before projection; all zeros
        when the basis was fit without centering.
    """

    basis: np.ndarray
    mean: np.ndarray = field(default=None)

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=np.float64)
        if basis.ndim != 2:
            raise ValidationError("basis must be a 2-D matrix")
        D, d = basis.shape
        if not 1 <= d <= D:
            raise DimensionError(f"subspace dimension must satisfy 1 <= d <= D, got d={d}, D={D}")
        mean = self.mean
        if mean is None:
            mean = np.zeros(D)
        mean = np.asarray(mean, dtype=np.float64)
        if mean.shape != (D,):
            raise DimensionError(f"mean must have shape ({D},), got {mean.shape}")
        gram_err = np.abs(basis.T @ basis - np.eye(d)).max()
        if gram_err > ORTHONORMALITY_TOL:
            raise ValidationError(f"basis columns are not orthonormal (max deviation {gram_err:.3e})")
        object.__setattr__(self, "basis", _frozen(basis))
        object.__setattr__(self, "mean", _frozen(mean))

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def subspace_dim(self):
        return self.basis.shape[1]

    def truncated(self, d):
        """Basis of the leading ``d`` columns (same centering offset)."""
        if not 1 <= d <= self.subspace_dim:
            raise DimensionError(f"cannot truncate a {self.subspace_dim}-dim basis to d={d}")
        return SubspaceBasis(basis=self.basis[:, :d], mean=self.mean)


def _fix_signs(basis):
    """Flip each column so its largest-magnitude entry is positive."""
    basis = np.array(basis)
    anchor = np.abs(basis).argmax(axis=0)
    flips = np.sign(basis[anchor, np.arange(basis.shape[1])])
    flips[flips == 0] = 1.0
    return basis * flips


def _rank_tolerance(X, s):
    # reference the input scale, not the centered spectrum: centering
    # identical rows leaves fp dust that must not count as rank
    scale = max(s[0] if s.size else 0.0, float(np.linalg.norm(X)))
    return max(X.shape) * np.finfo(np.float64).eps * scale


def numerical_rank(X, center=True):
    """Numerical rank of ``X`` (after centering, if requested)."""
    X = np.asarray(X, dtype=np.float64)
    Xc = X - X.mean(axis=0) if center else X
    s = np.linalg.svd(Xc, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int((s > _rank_tolerance(X, s)).sum())


def pca_subspace(X, d, center=True):
    """Leading-eigenvector subspace of the covariance of ``X``.

    Computed through a thin SVD of the (optionally centered) data matrix;
    columns are ordered by non-increasing eigenvalue and sign-fixed so the
    largest-magnitude entry of each column is positive.

    Parameters
    ----------
    X : array-like, shape (n, D)
    d : int
        Subspace dimension, 1 <= d <= min(n, D).
    center : bool
        Subtract the column mean first; the mean is stored on the returned
        basis so projections are reproducible.

    Returns
    -------
    SubspaceBasis
    """
    X = as_feature_matrix(X)
    n, D = X.shape
    if not 1 <= d <= min(n, D):
        raise DimensionError(f"d must satisfy 1 <= d <= min(n, D) = {min(n, D)}, got d={d}")
    if center and n < 2:
        raise ParameterError("centered PCA needs at least 2 rows")
    mean = X.mean(axis=0) if center else np.zeros(D)
    Xc = X - mean
    _, s, Vt = np.linalg.svd(Xc, full_matrices=False)
    rank = int((s > _rank_tolerance(X, s)).sum())
    if rank < d:
        raise RankDeficiencyError(
            f"requested d={d} but the {'centered ' if center else ''}data only supports rank {rank}",
            achievable_rank=rank,
        )
    return SubspaceBasis(basis=_fix_signs(Vt[:d].T), mean=mean)


def orthogonal_complement(B):
    """Orthonormal basis of the directions orthogonal to ``B``.

    Returns a D x (D - d) basis R with B^T R = 0; [B | R] is a full
    orthonormal basis of R^D.
    """
    D, d = B.basis.shape
    if d >= D:
        raise GeometryError(f"a {d}-dim subspace of R^{D} has no orthogonal complement")
    Q = np.linalg.qr(B.basis, mode="complete")[0]
    return SubspaceBasis(basis=_fix_signs(Q[:, d:]), mean=np.zeros(D))


def principal_angles(A, B):
    """Principal angles between two subspaces, non-decreasing, in [0, pi/2].

    The k-th angle is arccos of the k-th singular value of A^T B (clamped
    to [0, 1]); min(d_A, d_B) angles are returned.
    """
    if A.ambient_dim != B.ambient_dim:
        raise DimensionError(
            f"ambient dimensions differ: {A.ambient_dim} vs {B.ambient_dim}"
        )
    s = np.linalg.svd(A.basis.T @ B.basis, compute_uv=False)
    return np.arccos(np.clip(s, 0.0, 1.0))


def subspace_similarity(A, B):
    """trace(A^T B) for two bases of equal ambient and subspace dimension."""
    if A.ambient_dim != B.ambient_dim:
        raise DimensionError(
            f"ambient dimensions differ: {A.ambient_dim} vs {B.ambient_dim}"
        )
    if A.subspace_dim != B.subspace_dim:
        raise DimensionError(
            f"subspace dimensions differ: {A.subspace_dim} vs {B.subspace_dim}"
        )
    return float(np.einsum("ij,ij->", A.basis, B.basis))


def project(X, B):
    """Project rows of ``X`` onto ``B``: (X - 1 mean^T) basis, an (n, d) matrix."""
    X = as_feature_matrix(X)
    if X.shape[1] != B.ambient_dim:
        raise DimensionError(
            f"feature dimension {X.shape[1]} does not match ambient dimension {B.ambient_dim}"
        )
    return (X - B.mean) @ B.basis
