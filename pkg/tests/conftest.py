import numpy as np
import pytest

from mcle.data import (Bundle, LabelMatrix, Pool, RelationMatrix, SourceBank,
                       generate_synthetic)


def build_bundle(features, labels, class_names, weights, split=None,
                 betas=None, display_uri=None):
    """Assemble a Bundle from raw arrays (test helper)."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int8)
    n = features.shape[0]
    if split is None:
        split = np.array(["train"] * n)
    class_names = tuple(class_names)
    weights = np.asarray(weights, dtype=np.float64)
    if betas is None:
        betas = np.eye(len(class_names))
    pool = Pool(features=features, sample_ids=list(range(n)),
                split=np.asarray(split), display_uri=display_uri)
    return Bundle(
        pool=pool,
        labels=LabelMatrix(class_names=class_names, labels=labels),
        sources=SourceBank(source_names=class_names, weights=weights,
                           biases=np.zeros(weights.shape[0])),
        relations=RelationMatrix(target_names=class_names,
                                 betas=np.asarray(betas, dtype=np.float64)),
    )


@pytest.fixture(scope="session")
def tiny_bundle():
    """Two well-separated classes, 20 samples, dim 4, half train half test."""
    return generate_synthetic(n_classes=2, n_per_class=10, dim=4,
                              prior_noise=0.1, seed=3)


@pytest.fixture(scope="session")
def bench_bundle():
    """The pinned benchmark instance used by regression fixtures."""
    return generate_synthetic(n_classes=5, n_per_class=100, dim=16,
                              prior_noise=0.5, seed=7)
