from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hetclust.model import ConstantWeights, DenseWeights, ModelSpec


def er_model(n: int, alpha: float | None = None, p: float | None = None, c: float = 1.0) -> ModelSpec:
    """Homogeneous model; give either the exponent or the pair probability."""
    if alpha is None:
        alpha = -math.log(p / c) / math.log(n)
    return ModelSpec(n=n, alpha=alpha, beta=c, weights=ConstantWeights(c))


def random_dense_model(
    n: int, rng: np.random.Generator, lo: float = 0.5, hi: float = 0.9, alpha: float = 0.35
) -> ModelSpec:
    w = rng.uniform(lo, hi, size=(n, n))
    w = (w + w.T) / 2.0
    np.fill_diagonal(w, 0.0)
    return ModelSpec(n=n, alpha=alpha, beta=lo, weights=DenseWeights(w))


def graph_to_dense(graph) -> np.ndarray:
    return graph.adjacency_dense()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20250810)
