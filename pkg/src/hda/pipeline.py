"""Two-level hierarchical domain adaptation, flat baselines and evaluation.

The hierarchical scheme adapts in two steps: one subspace pair over all the
data routes every target instance to a parent class, then a separate
subspace pair per parent (source side from the true labels, target side
from the routed instances) classifies among that parent's children only.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .alignment import (
    GfkKernel,
    SaModel,
    gfk_decompose,
    gfk_kernel,
    sa_align,
    sa_embed,
)
from .classify import KnnModel, LabeledSet, knn_fit, knn_predict
from .errors import (
    ConfigError,
    DimensionError,
    GeometryError,
    ParameterError,
    RankDeficiencyError,
    ValidationError,
)
from .subspace import as_feature_matrix, numerical_rank, pca_subspace, subspace_similarity

_ID_FORBIDDEN = set(",;:\n\r")


def _check_identifier(name, kind):
    if not isinstance(name, str) or not name or name != name.strip():
        raise ValidationError(f"{kind} identifier {name!r} must be a non-empty trimmed string")
    if _ID_FORBIDDEN & set(name):
        raise ValidationError(f"{kind} identifier {name!r} contains a reserved character (,;: or newline)")


@dataclass(frozen=True)
class HierLabel:
    """A two-level label: parent class and child category."""

    parent: str
    child: str


@dataclass(frozen=True)
class Hierarchy:
    """A two-level label tree: parents, each owning a disjoint set of children.

    A single parent is allowed (the hierarchical pipeline then reduces to
    flat adaptation); two or more parents make the hierarchy meaningful.
    """

    parents: tuple
    children_of: dict

    def __post_init__(self):
        parents = tuple(self.parents)
        if len(parents) < 1:
            raise ValidationError("hierarchy needs at least one parent")
        if len(set(parents)) != len(parents):
            raise ValidationError("duplicate parent identifiers")
        children_of = {p: tuple(self.children_of[p]) for p in parents}
        if set(self.children_of) != set(parents):
            raise ValidationError("children_of keys must match the parents list")
        seen = set()
        for p in parents:
            _check_identifier(p, "parent")
            if not children_of[p]:
                raise ValidationError(f"parent {p!r} has no children")
            for c in children_of[p]:
                _check_identifier(c, "child")
                if c in seen:
                    raise ValidationError(f"child {c!r} appears under more than one parent")
                seen.add(c)
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "children_of", children_of)
        children = tuple(c for p in parents for c in children_of[p])
        object.__setattr__(self, "_children", children)
        object.__setattr__(self, "_child_index", {c: i for i, c in enumerate(children)})
        object.__setattr__(self, "_parent_index", {p: i for i, p in enumerate(parents)})
        object.__setattr__(
            self, "_parent_of", {c: p for p in parents for c in children_of[p]}
        )

    @property
    def children(self):
        """All child identifiers, parents in declaration order."""
        return self._children

    @property
    def n_parents(self):
        return len(self.parents)

    @property
    def n_children(self):
        return len(self._children)

    def parent_of(self, child):
        try:
            return self._parent_of[child]
        except KeyError:
            raise ValidationError(f"unknown child identifier {child!r}") from None

    def parent_code(self, parent):
        try:
            return self._parent_index[parent]
        except KeyError:
            raise ValidationError(f"unknown parent identifier {parent!r}") from None

    def child_code(self, child):
        try:
            return self._child_index[child]
        except KeyError:
            raise ValidationError(f"unknown child identifier {child!r}") from None

    def check_label(self, label):
        """Raise unless ``label`` is consistent with this hierarchy."""
        if self.parent_of(label.child) != label.parent:
            raise ValidationError(
                f"child {label.child!r} belongs to parent {self.parent_of(label.child)!r}, "
                f"not {label.parent!r}"
            )

    def encode(self, labels):
        """Map labels to (parent_codes, child_codes) integer vectors."""
        parent_codes = np.empty(len(labels), dtype=np.int64)
        child_codes = np.empty(len(labels), dtype=np.int64)
        for i, lab in enumerate(labels):
            self.check_label(lab)
            parent_codes[i] = self._parent_index[lab.parent]
            child_codes[i] = self._child_index[lab.child]
        return parent_codes, child_codes

    def decode(self, parent_codes, child_codes):
        """Inverse of :meth:`encode`."""
        return [
            HierLabel(self.parents[p], self._children[c])
            for p, c in zip(parent_codes, child_codes)
        ]


@dataclass
class BranchModel:
    """Adaptation model and child classifier for one parent's branch."""

    parent: str
    d: int
    model: Union[SaModel, GfkKernel]
    classifier: KnnModel
    n_targets: int


@dataclass
class HierModel:
    """Output of the two-step hierarchical adaptation."""

    method: str
    d_root: int
    d_branch: int
    root_model: Union[SaModel, GfkKernel]
    root_classifier: KnnModel
    branches: dict
    skipped_parents: tuple
    warnings: tuple


@dataclass
class EvalReport:
    """Accuracy cells (percentages) plus parent-level diagnostics."""

    n: int
    base_accuracy: Optional[float] = None
    flat_accuracy: Optional[float] = None
    hier_accuracy: Optional[float] = None
    parent_accuracy: Optional[float] = None
    per_parent_accuracy: dict = field(default_factory=dict)
    parent_confusion: Optional[np.ndarray] = None
    warnings: tuple = ()

    def to_dict(self):
        out = {
            "n": self.n,
            "base_accuracy": self.base_accuracy,
            "flat_accuracy": self.flat_accuracy,
            "hier_accuracy": self.hier_accuracy,
            "parent_accuracy": self.parent_accuracy,
            "per_parent_accuracy": dict(self.per_parent_accuracy),
            "warnings": list(self.warnings),
        }
        if self.parent_confusion is not None:
            out["parent_confusion"] = self.parent_confusion.tolist()
        return out


@dataclass
class SimilarityResult:
    """Cross-domain subspace similarity at each hierarchy level.

    ``matrix[a, b]`` is trace of the source subspace at level ``a`` against
    the target subspace at level ``b``; index 0 is the root (all data),
    index i the i-th parent's instances.
    """

    matrix: np.ndarray
    names: tuple
    d: int
    warnings: tuple


@dataclass
class _AdaptedSpace:
    method: str
    model: Union[SaModel, GfkKernel]
    train_space: np.ndarray
    test_space: np.ndarray
    metric: Union[str, GfkKernel]


def _adapt_pair(src_feats, tgt_feats, method, d):
    Xs = pca_subspace(src_feats, d)
    Xt = pca_subspace(tgt_feats, d)
    if method == "sa":
        model = sa_align(Xs, Xt)
        return _AdaptedSpace(
            method,
            model,
            sa_embed(model, src_feats, "source"),
            sa_embed(model, tgt_feats, "target"),
            "euclidean",
        )
    if method == "gfk":
        kern = gfk_kernel(gfk_decompose(Xs, Xt))
        return _AdaptedSpace(method, kern, src_feats - Xs.mean, tgt_feats - Xt.mean, kern)
    raise ParameterError(f"method must be 'sa' or 'gfk', got {method!r}")


def baseline_no_adaptation(source, target, d=None, k=1):
    """K-NN over the raw features, no subspace and no alignment.

    ``d`` is accepted for signature parity with the adapted runs and
    ignored.
    """
    target = as_feature_matrix(target, "target")
    clf = knn_fit(source, k, "euclidean")
    return knn_predict(clf, target)


def adapt_flat(source, target, method="sa", d=5, k=1):
    """One adaptation over all the data, one K-NN over all child labels."""
    target = as_feature_matrix(target, "target")
    space = _adapt_pair(source.features, target, method, d)
    clf = knn_fit(LabeledSet(space.train_space, source.labels), k, space.metric)
    return knn_predict(clf, space.test_space)


def hier_adapt(source_features, source_labels, target_features, hierarchy, method="sa",
               d_root=5, d_branch=None, k=1):
    """Root-level routing then per-parent adaptation and child prediction.

    Returns ``(HierModel, predictions)`` where predictions is one
    :class:`HierLabel` per target row.  Branches whose data cannot support
    a subspace are skipped and their targets classified with the root-level
    embedding restricted to the parent's children; branch dimensions are
    reduced (with a warning) when a subset's rank falls short.
    """
    source_features = as_feature_matrix(source_features, "source")
    target_features = as_feature_matrix(target_features, "target")
    if d_branch is None:
        d_branch = d_root
    parent_codes, child_codes = hierarchy.encode(source_labels)
    if parent_codes.shape[0] != source_features.shape[0]:
        raise DimensionError(
            f"{len(source_labels)} labels for {source_features.shape[0]} source rows"
        )
    for pi, parent in enumerate(hierarchy.parents):
        if not np.any(parent_codes == pi):
            raise ConfigError(f"parent {parent!r} has no source instances")

    warnings = []
    root_space = _adapt_pair(source_features, target_features, method, d_root)
    root_clf = knn_fit(LabeledSet(root_space.train_space, parent_codes), k, root_space.metric)
    parent_pred = knn_predict(root_clf, root_space.test_space)

    D = source_features.shape[1]
    branches = {}
    skipped = []
    child_pred = np.empty(target_features.shape[0], dtype=np.int64)

    def classify_with_root(src_idx, tgt_idx):
        clf = knn_fit(
            LabeledSet(root_space.train_space[src_idx], child_codes[src_idx]),
            min(k, src_idx.size),
            root_space.metric,
        )
        child_pred[tgt_idx] = knn_predict(clf, root_space.test_space[tgt_idx])

    for pi, parent in enumerate(hierarchy.parents):
        src_idx = np.nonzero(parent_codes == pi)[0]
        tgt_idx = np.nonzero(parent_pred == pi)[0]
        if tgt_idx.size == 0:
            skipped.append(parent)
            warnings.append(f"parent {parent!r}: no target instances routed, branch skipped")
            continue
        Si = source_features[src_idx]
        Ti = target_features[tgt_idx]
        d_i = min(d_branch, numerical_rank(Si), numerical_rank(Ti))
        if method == "gfk":
            d_i = min(d_i, D // 2)
        if d_i < 1:
            skipped.append(parent)
            warnings.append(
                f"parent {parent!r}: branch rank collapsed, targets classified "
                f"with the root embedding"
            )
            classify_with_root(src_idx, tgt_idx)
            continue
        if d_i < d_branch:
            warnings.append(
                f"parent {parent!r}: branch dimension reduced from {d_branch} to {d_i} "
                f"(achievable rank)"
            )
        k_i = min(k, src_idx.size)
        if k_i < k:
            warnings.append(f"parent {parent!r}: k reduced from {k} to {k_i} (branch size)")
        try:
            space_i = _adapt_pair(Si, Ti, method, d_i)
        except (RankDeficiencyError, GeometryError) as exc:
            skipped.append(parent)
            warnings.append(
                f"parent {parent!r}: branch adaptation failed ({exc}), targets "
                f"classified with the root embedding"
            )
            classify_with_root(src_idx, tgt_idx)
            continue
        clf_i = knn_fit(LabeledSet(space_i.train_space, child_codes[src_idx]), k_i, space_i.metric)
        child_pred[tgt_idx] = knn_predict(clf_i, space_i.test_space)
        branches[parent] = BranchModel(
            parent=parent, d=d_i, model=space_i.model, classifier=clf_i, n_targets=int(tgt_idx.size)
        )

    model = HierModel(
        method=method,
        d_root=d_root,
        d_branch=d_branch,
        root_model=root_space.model,
        root_classifier=root_clf,
        branches=branches,
        skipped_parents=tuple(skipped),
        warnings=tuple(warnings),
    )
    return model, hierarchy.decode(parent_pred, child_pred)


def similarity_matrix(source_features, source_labels, target_features, target_labels,
                      hierarchy, d):
    """Cross-domain trace similarity at the root and each parent level.

    Diagnostic only: both sides use true labels, so it requires the target
    truth that the adaptation pipeline itself never sees.
    """
    source_features = as_feature_matrix(source_features, "source")
    target_features = as_feature_matrix(target_features, "target")
    src_parents, _ = hierarchy.encode(source_labels)
    tgt_parents, _ = hierarchy.encode(target_labels)
    if src_parents.shape[0] != source_features.shape[0]:
        raise DimensionError("source labels do not match source rows")
    if tgt_parents.shape[0] != target_features.shape[0]:
        raise DimensionError("target labels do not match target rows")

    subsets_src = [source_features]
    subsets_tgt = [target_features]
    for pi, parent in enumerate(hierarchy.parents):
        si = source_features[src_parents == pi]
        ti = target_features[tgt_parents == pi]
        if si.shape[0] == 0:
            raise ConfigError(f"parent {parent!r} has no source instances")
        if ti.shape[0] == 0:
            raise ConfigError(f"parent {parent!r} has no target instances")
        subsets_src.append(si)
        subsets_tgt.append(ti)

    warnings = []
    achievable = min(numerical_rank(s) for s in subsets_src + subsets_tgt)
    d_used = min(d, achievable)
    if d_used < 1:
        raise RankDeficiencyError("every similarity subset must have rank >= 1", achievable_rank=achievable)
    if d_used < d:
        warnings.append(
            f"subspace dimension reduced from {d} to {d_used}: a hierarchy subset "
            f"only supports rank {achievable}"
        )
    bases_src = [pca_subspace(s, d_used) for s in subsets_src]
    bases_tgt = [pca_subspace(t, d_used) for t in subsets_tgt]
    size = 1 + hierarchy.n_parents
    matrix = np.empty((size, size))
    for a in range(size):
        for b in range(size):
            matrix[a, b] = subspace_similarity(bases_src[a], bases_tgt[b])
    return SimilarityResult(
        matrix=matrix,
        names=("root",) + hierarchy.parents,
        d=d_used,
        warnings=tuple(warnings),
    )


def evaluate(predicted, truth, hierarchy, mode="hier"):
    """Score predictions against the truth.

    The headline number is the child-level exact-match accuracy, placed in
    the report column named by ``mode``; parent accuracy, per-parent child
    accuracy and a parent confusion matrix come along for hierarchical
    analysis.
    """
    if len(predicted) != len(truth):
        raise DimensionError(f"length mismatch: {len(predicted)} vs {len(truth)}")
    if mode not in ("base", "flat", "hier"):
        raise ParameterError(f"mode must be base, flat or hier, got {mode!r}")
    pred_p, pred_c = hierarchy.encode(predicted)
    true_p, true_c = hierarchy.encode(truth)
    n = len(truth)
    child_ok = (pred_c == true_c) & (pred_p == true_p)
    headline = 100.0 * float(np.mean(child_ok))
    parent_acc = 100.0 * float(np.mean(pred_p == true_p))
    per_parent = {}
    P = hierarchy.n_parents
    confusion = np.zeros((P, P), dtype=np.int64)
    np.add.at(confusion, (true_p, pred_p), 1)
    for pi, parent in enumerate(hierarchy.parents):
        mask = true_p == pi
        if mask.any():
            per_parent[parent] = 100.0 * float(np.mean(child_ok[mask]))
    report = EvalReport(
        n=n,
        parent_accuracy=parent_acc,
        per_parent_accuracy=per_parent,
        parent_confusion=confusion,
    )
    setattr(report, f"{mode}_accuracy", headline)
    return report
