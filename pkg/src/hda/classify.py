"""K-nearest-neighbor classification with Euclidean or kernel-induced distance.

Neighbor search is exact brute force (desk-scale data, reproducible ties):
distance ties go to the lower training index, vote ties to the smallest
label.  The inner loops live in :mod:`hda._kernels`.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from ._kernels import knn_vote, pairwise_sq_dists
from .alignment import GfkKernel
from .errors import DimensionError, ParameterError, ValidationError
from .subspace import as_feature_matrix


@dataclass(frozen=True)
class LabeledSet:
    """Feature rows paired with non-negative integer labels."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        features = as_feature_matrix(self.features, "features")
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise DimensionError(
                f"labels must be a vector of length {features.shape[0]}, got shape {labels.shape}"
            )
        if not np.issubdtype(labels.dtype, np.integer):
            raise ValidationError("labels must be integers")
        if labels.size and labels.min() < 0:
            raise ValidationError("labels must be non-negative")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", np.ascontiguousarray(labels, dtype=np.int64))

    @property
    def n(self):
        return self.features.shape[0]


Metric = Union[str, GfkKernel]


@dataclass(frozen=True)
class KnnModel:
    train: LabeledSet
    k: int
    metric: Metric

    @property
    def n_classes(self):
        return int(self.train.labels.max()) + 1


def knn_fit(train, k=1, metric="euclidean"):
    """Store a training set for k-NN prediction.

    ``metric`` is either ``"euclidean"`` or a :class:`GfkKernel`, whose
    induced distance is used instead.
    """
    if train.n == 0:
        raise ValidationError("training set is empty")
    if not 1 <= k <= train.n:
        raise ParameterError(f"k must satisfy 1 <= k <= {train.n}, got {k}")
    if not (metric == "euclidean" or isinstance(metric, GfkKernel)):
        raise ParameterError(f"metric must be 'euclidean' or a GfkKernel, got {metric!r}")
    if isinstance(metric, GfkKernel) and metric.G.shape[0] != train.features.shape[1]:
        raise DimensionError(
            f"kernel dimension {metric.G.shape[0]} does not match feature dimension "
            f"{train.features.shape[1]}"
        )
    return KnnModel(train=train, k=k, metric=metric)


def _kernel_sq_dists(G, X, train):
    cross = X @ (G @ train.T)
    q_test = np.einsum("ij,ij->i", X @ G, X)
    q_train = np.einsum("ij,ij->i", train @ G, train)
    d2 = q_test[:, None] + q_train[None, :] - 2.0 * cross
    np.maximum(d2, 0.0, out=d2)
    return d2


def knn_predict(model, X):
    """Predict a label for every row of ``X``."""
    X = as_feature_matrix(X)
    if X.shape[1] != model.train.features.shape[1]:
        raise DimensionError(
            f"feature dimension {X.shape[1]} does not match training dimension "
            f"{model.train.features.shape[1]}"
        )
    if isinstance(model.metric, GfkKernel):
        d2 = _kernel_sq_dists(model.metric.G, X, model.train.features)
    else:
        d2 = pairwise_sq_dists(X, model.train.features)
    return knn_vote(d2, model.train.labels, model.k, model.n_classes)


def accuracy(pred, truth):
    """Fraction of exact matches, in [0, 1]."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise DimensionError(f"length mismatch: {pred.shape} vs {truth.shape}")
    return float(np.mean(pred == truth))
