"""Independent-edge null model with node-pair weights.

A model on n nodes connects each unordered pair {i, j} independently with
probability

    mu_ij = p * w_ij,        p = n**(-alpha),  alpha in (0, 1),

where the symmetric weights w_ij live in [beta, 1] (beta > 0) and w_ii = 0.
Three weight structures are supported: a single constant (the homogeneous
Erdos-Renyi case), a rank-one product w_ij = w_i * w_j, and an explicit
dense symmetric matrix.

The model is immutable after construction and safe to share across
workers.  Expected degrees mu_i = sum_j mu_ij must exceed 1 for the
variance theory downstream (several constants divide by (mu_i - 1));
`validate` flags, rather than forbids, models that violate this.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Union

import numpy as np

from .pairs import pair_arrays

__all__ = [
    "ConstantWeights",
    "RankOneWeights",
    "DenseWeights",
    "WeightSpec",
    "ModelSpec",
    "ValidationReport",
    "edge_prob",
    "expected_degree",
    "validate",
    "model_from_json",
    "model_to_json",
    "load_dense_csv",
]


@dataclass(frozen=True)
class ConstantWeights:
    """All off-diagonal weights equal to a constant c in (0, 1]."""

    c: float

    def matrix(self, n: int) -> np.ndarray:
        w = np.full((n, n), float(self.c))
        np.fill_diagonal(w, 0.0)
        return w

    def violations(self, n: int, beta: float) -> list[str]:
        out = []
        if not (0.0 < self.c <= 1.0):
            out.append(f"constant weight c={self.c} outside (0, 1]")
        return out


@dataclass(frozen=True)
class RankOneWeights:
    """Product weights w_ij = w_i * w_j with each w_i in [beta, 1]."""

    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", np.asarray(self.w, dtype=np.float64))

    def matrix(self, n: int) -> np.ndarray:
        w = np.outer(self.w, self.w)
        np.fill_diagonal(w, 0.0)
        return w

    def violations(self, n: int, beta: float) -> list[str]:
        out = []
        if self.w.shape != (n,):
            out.append(f"rank-one weight vector has shape {self.w.shape}, expected ({n},)")
            return out
        if np.any(self.w < beta) or np.any(self.w > 1.0):
            out.append("rank-one weight entries must lie in [beta, 1]")
        return out


@dataclass(frozen=True)
class DenseWeights:
    """Explicit symmetric weight matrix, zero diagonal, entries in [beta, 1]."""

    matrix_values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "matrix_values", np.asarray(self.matrix_values, dtype=np.float64)
        )

    def matrix(self, n: int) -> np.ndarray:
        return self.matrix_values

    def violations(self, n: int, beta: float) -> list[str]:
        w = self.matrix_values
        out = []
        if w.shape != (n, n):
            out.append(f"dense weight matrix has shape {w.shape}, expected ({n}, {n})")
            return out
        if not np.array_equal(w, w.T):
            bad = np.argwhere(w != w.T)
            i, j = bad[0]
            out.append(f"dense weight matrix is asymmetric (first mismatch at ({i}, {j}))")
        if np.any(np.diag(w) != 0.0):
            out.append("dense weight matrix must have zero diagonal")
        off = w[~np.eye(n, dtype=bool)]
        if np.any(off < beta) or np.any(off > 1.0):
            out.append("dense off-diagonal weights must lie in [beta, 1]")
        return out


WeightSpec = Union[ConstantWeights, RankOneWeights, DenseWeights]


@dataclass(frozen=True)
class ModelSpec:
    """Null model: node count, density exponent, weight floor, and weights."""

    n: int
    alpha: float
    beta: float
    weights: WeightSpec

    @property
    def p(self) -> float:
        """Baseline pair probability n**(-alpha)."""
        return float(self.n) ** (-self.alpha)

    @property
    def is_homogeneous(self) -> bool:
        return isinstance(self.weights, ConstantWeights)

    @cached_property
    def mu_matrix(self) -> np.ndarray:
        """Symmetric matrix of pair probabilities mu_ij, zero diagonal."""
        m = self.p * self.weights.matrix(self.n)
        m.flags.writeable = False
        return m

    @cached_property
    def mu(self) -> np.ndarray:
        """Expected degrees mu_i = sum_j mu_ij."""
        m = self.mu_matrix.sum(axis=1)
        m.flags.writeable = False
        return m

    def mu_pairs(self) -> np.ndarray:
        """Pair probabilities in canonical pair order (length n*(n-1)/2)."""
        iu, ju = pair_arrays(self.n)
        return self.mu_matrix[iu, ju]


def edge_prob(model: ModelSpec, i: int, j: int) -> float:
    """Probability that the pair {i, j} is connected; 0 on the diagonal."""
    n = model.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"node index out of range for n={n}")
    return float(model.mu_matrix[i, j])


def expected_degree(model: ModelSpec, i: int) -> float:
    """Expected degree mu_i of node i."""
    if not (0 <= i < model.n):
        raise IndexError(f"node index out of range for n={model.n}")
    return float(model.mu[i])


@dataclass(frozen=True)
class ValidationReport:
    violations: list[str]
    flags: list[str]
    min_mu: float
    max_mu: float
    min_expected_degree: float

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(model: ModelSpec) -> ValidationReport:
    """Check every model invariant; returns a report instead of raising.

    Hard violations (shape, symmetry, bounds) make the model unusable;
    flags mark models that are well-formed but incompatible with parts of
    the variance theory (expected degree <= 1).
    """
    violations: list[str] = []
    flags: list[str] = []
    n = model.n
    if not (isinstance(n, int) and n >= 3):
        violations.append(f"node count n={n} must be an integer >= 3")
        return ValidationReport(violations, flags, np.nan, np.nan, np.nan)
    if not (0.0 < model.alpha < 1.0):
        violations.append(f"alpha={model.alpha} outside (0, 1)")
    if not (0.0 < model.beta <= 1.0):
        violations.append(f"beta={model.beta} outside (0, 1]")
    violations.extend(model.weights.violations(n, model.beta))
    if violations:
        return ValidationReport(violations, flags, np.nan, np.nan, np.nan)

    m = model.mu_matrix
    off = m[~np.eye(n, dtype=bool)]
    min_mu, max_mu = float(off.min()), float(off.max())
    if min_mu <= 0.0 or max_mu >= 1.0:
        violations.append(
            f"pair probabilities must lie in (0, 1); observed range [{min_mu}, {max_mu}]"
        )
    min_deg = float(model.mu.min())
    if min_deg <= 1.0:
        flags.append(
            f"expected degree <= 1 (min mu_i = {min_deg:.6g}); "
            "variance constants are undefined for such models"
        )
    return ValidationReport(violations, flags, min_mu, max_mu, min_deg)


def load_dense_csv(path: str | Path) -> np.ndarray:
    """Load an n x n weight matrix from a CSV file of n rows."""
    w = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return w


def _weights_from_dict(spec: dict, n: int, base: Path | None) -> WeightSpec:
    kind = spec.get("kind")
    if kind == "constant":
        return ConstantWeights(float(spec["c"]))
    if kind == "rank1":
        if "grid" in spec:
            lo, hi = spec["grid"]
            return RankOneWeights(np.linspace(float(lo), float(hi), n))
        return RankOneWeights(np.asarray(spec["w"], dtype=np.float64))
    if kind == "dense":
        if "csv" in spec:
            p = Path(spec["csv"])
            if base is not None and not p.is_absolute():
                p = base / p
            return DenseWeights(load_dense_csv(p))
        return DenseWeights(np.asarray(spec["W"], dtype=np.float64))
    raise ValueError(f"unknown weight kind: {kind!r}")


def model_from_json(source: str | Path | dict) -> ModelSpec:
    """Build a model from a JSON config file or an equivalent dict.

    Schema: {"n": int, "alpha": float, "beta": float,
             "weights": {"kind": "constant"|"rank1"|"dense", ...}}.
    Constant weights carry "c"; rank-one carry "w" (list) or "grid"
    [lo, hi] expanded to a uniform grid of length n; dense carry "W"
    (list of rows) or "csv" (path to an n-row CSV file).
    """
    base = None
    if isinstance(source, (str, Path)):
        base = Path(source).parent
        with open(source) as fh:
            cfg = json.load(fh)
    else:
        cfg = source
    n = int(cfg["n"])
    return ModelSpec(
        n=n,
        alpha=float(cfg["alpha"]),
        beta=float(cfg["beta"]),
        weights=_weights_from_dict(cfg["weights"], n, base),
    )


def model_to_json(model: ModelSpec) -> dict:
    """Inverse of `model_from_json` (dense matrices are inlined)."""
    w = model.weights
    if isinstance(w, ConstantWeights):
        wdict: dict = {"kind": "constant", "c": w.c}
    elif isinstance(w, RankOneWeights):
        wdict = {"kind": "rank1", "w": w.w.tolist()}
    else:
        wdict = {"kind": "dense", "W": w.matrix_values.tolist()}
    return {"n": model.n, "alpha": model.alpha, "beta": model.beta, "weights": wdict}
