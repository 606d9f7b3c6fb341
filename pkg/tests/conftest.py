import numpy as np
import pytest

from hda.classify import LabeledSet
from hda.data import SynthConfig, synth_generate
from hda.subspace import SubspaceBasis


def random_basis(rng, D, d, mean=None):
    """Haar-ish random orthonormal basis via QR of a Gaussian matrix."""
    q, _ = np.linalg.qr(rng.standard_normal((D, d)))
    return SubspaceBasis(basis=q, mean=mean)


def angled_pair(D, angles):
    """A basis pair whose principal angles are exactly ``angles``.

    Xs spans the first d coordinate axes; column j of Xt is rotated by
    angles[j] into the (d+j)-th axis.
    """
    angles = np.asarray(angles, dtype=np.float64)
    d = angles.size
    assert 2 * d <= D
    Xs = np.eye(D)[:, :d]
    Xt = np.zeros((D, d))
    for j, a in enumerate(angles):
        Xt[j, j] = np.cos(a)
        Xt[d + j, j] = np.sin(a)
    return SubspaceBasis(basis=Xs), SubspaceBasis(basis=Xt)


def child_code_set(bundle):
    """The bundle's features with child labels as integer codes."""
    h = bundle.hierarchy
    codes = np.array([h.child_code(lab.child) for lab in bundle.labels], dtype=np.int64)
    return LabeledSet(bundle.features, codes)


def labels_from_child_codes(hierarchy, codes):
    from hda.pipeline import HierLabel

    out = []
    for c in codes:
        child = hierarchy.children[int(c)]
        out.append(HierLabel(parent=hierarchy.parent_of(child), child=child))
    return out


@pytest.fixture(scope="session")
def benchmark():
    """The bundled synthetic benchmark: default config, seed 0."""
    source, target = synth_generate(SynthConfig())
    return source, target
