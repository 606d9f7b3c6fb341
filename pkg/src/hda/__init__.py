"""Subspace-based unsupervised domain adaptation with a two-level hierarchy.

Flat adaptation aligns one source subspace to one target subspace, either
through the closed-form subspace-alignment transform or the geodesic flow
kernel; the hierarchical pipeline repeats the adaptation per parent class
after routing target instances at the root level.
"""

from ._kernels import backend_name
from .alignment import (
    GeodesicDecomposition,
    GfkKernel,
    SaModel,
    disagreement_curve,
    gfk_decompose,
    gfk_distance,
    gfk_flow,
    gfk_kernel,
    gfk_quadrature_oracle,
    gfk_similarity,
    sa_align,
    sa_embed,
    select_dimension,
)
from .classify import KnnModel, LabeledSet, accuracy, knn_fit, knn_predict
from .data import (
    DatasetBundle,
    SynthConfig,
    load_dataset,
    load_truth,
    save_dataset,
    save_truth,
    synth_generate,
    synth_hierarchy,
)
from .errors import (
    ConfigError,
    DimensionError,
    GeometryError,
    HdaError,
    ParameterError,
    RankDeficiencyError,
    ValidationError,
)
from .pipeline import (
    EvalReport,
    HierLabel,
    Hierarchy,
    HierModel,
    SimilarityResult,
    adapt_flat,
    baseline_no_adaptation,
    evaluate,
    hier_adapt,
    similarity_matrix,
)
from .subspace import (
    SubspaceBasis,
    orthogonal_complement,
    pca_subspace,
    principal_angles,
    project,
    subspace_similarity,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DatasetBundle",
    "DimensionError",
    "EvalReport",
    "GeodesicDecomposition",
    "GeometryError",
    "GfkKernel",
    "HdaError",
    "HierLabel",
    "HierModel",
    "Hierarchy",
    "KnnModel",
    "LabeledSet",
    "ParameterError",
    "RankDeficiencyError",
    "SaModel",
    "SimilarityResult",
    "SubspaceBasis",
    "SynthConfig",
    "ValidationError",
    "accuracy",
    "adapt_flat",
    "backend_name",
    "baseline_no_adaptation",
    "disagreement_curve",
    "evaluate",
    "gfk_decompose",
    "gfk_distance",
    "gfk_flow",
    "gfk_kernel",
    "gfk_quadrature_oracle",
    "gfk_similarity",
    "hier_adapt",
    "knn_fit",
    "knn_predict",
    "load_dataset",
    "load_truth",
    "orthogonal_complement",
    "pca_subspace",
    "principal_angles",
    "project",
    "sa_align",
    "sa_embed",
    "save_dataset",
    "save_truth",
    "select_dimension",
    "similarity_matrix",
    "subspace_similarity",
    "synth_generate",
    "synth_hierarchy",
]
