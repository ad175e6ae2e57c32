"""Graph summary statistics built on per-node triangle counts.

Conventions, fixed once here and used verbatim by the exact-moment
formulas elsewhere:

* t_i counts ordered neighbour pairs (j, k), j != k, that close a
  triangle through i, so t_i is twice the number of unordered triangles
  containing i.
* The local clustering of node i is t_i / (d_i (d_i - 1)); nodes of
  degree < 2 contribute exactly 0 ("zero-denominator" convention).
* The weighted triangle sum divides each triangle {i, j, k} by the
  product of the three true degrees d_i d_j d_k; a present triangle
  forces all three degrees >= 2, so the product never vanishes on a
  contributing term.

Triangles are found by intersecting sorted neighbour lists edge by edge
(sparse row products), which is the right tool in the sparse regime where
these graphs live.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sampling import Graph

__all__ = [
    "NodeTriangleProfile",
    "triangle_profile",
    "avg_clustering",
    "local_clustering",
    "weighted_triangle_sum",
]


@dataclass(frozen=True)
class NodeTriangleProfile:
    """Per-node ordered triangle counts t and degrees d."""

    t: np.ndarray
    d: np.ndarray


def triangle_profile(graph: Graph) -> NodeTriangleProfile:
    """Ordered triangle count per node: t_i = #{(j, k): i~j, j~k, k~i}."""
    a = graph.adjacency_csr(dtype=np.int32)
    common = (a @ a).multiply(a)
    t = np.asarray(common.sum(axis=1)).ravel().astype(np.int64)
    return NodeTriangleProfile(t=t, d=graph.degrees)


def _local_values(profile: NodeTriangleProfile) -> np.ndarray:
    d = profile.d
    denom = d * (d - 1)
    safe = np.where(denom > 0, denom, 1)
    return np.where(denom > 0, profile.t / safe, 0.0)


def avg_clustering(graph: Graph) -> float:
    """Mean local clustering over all nodes, in [0, 1]."""
    return float(_local_values(triangle_profile(graph)).mean())


def local_clustering(graph: Graph, i: int) -> float:
    """t_i / (d_i (d_i - 1)), or 0 when node i has degree < 2."""
    if not (0 <= i < graph.n):
        raise IndexError(f"node index out of range for n={graph.n}")
    return float(_local_values(triangle_profile(graph))[i])


def weighted_triangle_sum(graph: Graph) -> float:
    """Sum over triangles {i<j<k} of 1 / (d_i d_j d_k).

    Each triangle is reached through its three edges; the per-edge sums
    of 1/d_k over common neighbours k come from one sparse product, and
    the final reduction is compensated so tiny graphs reproduce the
    brute-force value to full precision.
    """
    a = graph.adjacency_csr(dtype=np.float64)
    d = graph.degrees.astype(np.float64)
    inv_d = np.divide(1.0, d, out=np.zeros_like(d), where=d > 0)
    # q_ij = sum_k 1/d_k over common neighbours k of the edge (i, j)
    q = (a.multiply(inv_d[np.newaxis, :]) @ a).multiply(a).tocoo()
    rows, cols, vals = q.row, q.col, q.data
    upper = rows < cols
    contrib = vals[upper] / (d[rows[upper]] * d[cols[upper]])
    # every triangle is counted once per edge
    return math.fsum(contrib.tolist()) / 3.0
