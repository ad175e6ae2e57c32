"""Exhaustive ground truth on tiny graphs.

A labeled graph on n nodes is a bit pattern over the n(n-1)/2 canonical
pairs; enumerating every pattern and weighting each graph by its product
probability  prod mu_ij^A_ij (1 - mu_ij)^(1 - A_ij)  gives exact means
and variances of any statistic.  Feasible up to n = 7 (2^21 graphs);
used as the independent reference for the analytic moment formulas and
for the graph statistics themselves.

Graph codes are little-endian in canonical pair order: bit k of the code
is the k-th pair, so the same code convention is shared with the sampler.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import ModelSpec
from .pairs import n_pairs, pair_index
from .sampling import Graph

__all__ = [
    "OracleReport",
    "enumerate_moments",
    "enumerate_a_coeff",
    "enumeration_tables",
    "graph_from_code",
]

MAX_ENUM_N = 7
MAX_A_ENUM_N = 12
_LOG_SPACE_THRESHOLD = 1e-3


@dataclass(frozen=True)
class OracleReport:
    """Exact moments of both statistics from full enumeration."""

    n: int
    exact_mean_cc: float
    exact_var_cc: float
    exact_mean_t: float
    exact_var_t: float
    exact_et: np.ndarray
    exact_a: np.ndarray
    graph_count: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "exact_mean_cc": self.exact_mean_cc,
                "exact_var_cc": self.exact_var_cc,
                "exact_mean_t": self.exact_mean_t,
                "exact_var_t": self.exact_var_t,
                "exact_et": self.exact_et.tolist(),
                "exact_a": self.exact_a.tolist(),
                "graph_count": self.graph_count,
            },
            indent=2,
            sort_keys=True,
        )


@lru_cache(maxsize=4)
def enumeration_tables(n: int):
    """Per-graph tables over all 2^(n(n-1)/2) graphs on n nodes.

    Returns (bits, degrees, t, cbar, tsum): the pair-bit matrix, node
    degrees, ordered triangle counts, average clustering and weighted
    triangle sum of every graph, indexed by graph code.
    """
    if n > MAX_ENUM_N:
        raise ValueError(f"exhaustive enumeration supports n <= {MAX_ENUM_N}, got {n}")
    m = n_pairs(n)
    count = 1 << m
    codes = np.arange(count, dtype=np.uint32)
    bits = ((codes[:, None] >> np.arange(m, dtype=np.uint32)[None, :]) & 1).astype(
        np.int8
    )
    incidence = np.zeros((m, n), dtype=np.int8)
    for k, (i, j) in enumerate(itertools.combinations(range(n), 2)):
        incidence[k, i] = 1
        incidence[k, j] = 1
    deg = (bits @ incidence).astype(np.int16)  # degrees <= 6 at n <= 7

    triples = list(itertools.combinations(range(n), 3))
    t = np.zeros((count, n), dtype=np.int16)
    tsum = np.zeros(count)
    for i, j, k in triples:
        present = (
            bits[:, pair_index(i, j, n)]
            * bits[:, pair_index(j, k, n)]
            * bits[:, pair_index(i, k, n)]
        ).astype(np.int16)
        for v in (i, j, k):
            t[:, v] += 2 * present
        prod = (deg[:, i] * deg[:, j] * deg[:, k]).astype(np.float64)
        tsum += present / np.where(prod > 0, prod, 1.0)

    cbar = np.zeros(count)
    for v in range(n):  # column-wise to bound transient memory
        denom = (deg[:, v] * (deg[:, v] - 1)).astype(np.float64)
        cbar += np.where(denom > 0, t[:, v] / np.where(denom > 0, denom, 1.0), 0.0)
    cbar /= n
    return bits, deg, t, cbar, tsum


def graph_from_code(n: int, code: int) -> Graph:
    """Materialize the graph with the given pair-bit code."""
    rows, cols = [], []
    for k, (i, j) in enumerate(itertools.combinations(range(n), 2)):
        if (code >> k) & 1:
            rows.append(i)
            cols.append(j)
    return Graph.from_edges(n, np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))


def _graph_probabilities(bits: np.ndarray, mu_vec: np.ndarray) -> np.ndarray:
    if mu_vec.min() < _LOG_SPACE_THRESHOLD:
        logp = bits * np.log(mu_vec)[None, :] + (1 - bits) * np.log1p(-mu_vec)[None, :]
        return np.exp(logp.sum(axis=1))
    factors = bits * mu_vec[None, :] + (1 - bits) * (1.0 - mu_vec)[None, :]
    return factors.prod(axis=1)


def enumerate_moments(model: ModelSpec) -> OracleReport:
    """Exact moments of both statistics under the model's product measure."""
    n = model.n
    bits, deg, t, cbar, tsum = enumeration_tables(n)
    mu_vec = model.mu_pairs()
    pr = _graph_probabilities(bits, mu_vec)
    mean_cc = float(pr @ cbar)
    mean_t = float(pr @ tsum)
    var_cc = float(pr @ (cbar - mean_cc) ** 2)
    var_t = float(pr @ (tsum - mean_t) ** 2)
    et = pr @ t
    denom = deg * (deg - 1)
    inv_pairs = np.where(denom > 0, 1.0 / np.where(denom > 0, denom, 1), 0.0)
    a = pr @ inv_pairs
    return OracleReport(
        n=n,
        exact_mean_cc=mean_cc,
        exact_var_cc=var_cc,
        exact_mean_t=mean_t,
        exact_var_t=var_t,
        exact_et=et,
        exact_a=a,
        graph_count=len(pr),
    )


def enumerate_a_coeff(model: ModelSpec, i: int) -> float:
    """Exact truncated E[1/(d_i(d_i-1))] by enumerating node i's edges.

    Only the 2^(n-1) configurations of edges incident to i matter, so this
    scales to n = 12.
    """
    n = model.n
    if n > MAX_A_ENUM_N:
        raise ValueError(f"incident-edge enumeration supports n <= {MAX_A_ENUM_N}, got {n}")
    if not (0 <= i < n):
        raise IndexError(f"node index out of range for n={n}")
    probs = np.delete(model.mu_matrix[i], i)
    m = n - 1
    cfg = np.arange(1 << m, dtype=np.uint32)
    bits = ((cfg[:, None] >> np.arange(m, dtype=np.uint32)[None, :]) & 1).astype(
        np.float64
    )
    pr = _graph_probabilities(bits.astype(np.int8), probs)
    d = bits.sum(axis=1)
    val = np.where(d >= 2, 1.0 / np.where(d >= 2, d * (d - 1.0), 1.0), 0.0)
    return float(pr @ val)
