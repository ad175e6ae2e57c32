"""Exact finite-n moments and variance components of the two statistics.

For a model with pair probabilities mu_ij and expected degrees
mu_i = sum_j mu_ij, write f_ij = mu_ij (1 - mu_ij) for the pair variance.
The average clustering coefficient fluctuates, to leading order, like the
sum of a cubic edge term and a linear edge term

    (2/n) sum_{i<j<k} (a_i + a_j + a_k) Ab_ij Ab_ik Ab_jk
  + (1/n) sum_{i<j}   e_ij Ab_ij,          Ab_ij = A_ij - mu_ij,

whose exact variances are

    sigma1_sq = (4/n^2) sum_{i<j<k} (a_i+a_j+a_k)^2 f_ij f_jk f_ki,
    sigma2_sq = (1/n^2) sum_{i<j}   e_ij^2 f_ij,

with per-node and per-pair constants

    a_i  = E[ 1 / (d_i (d_i - 1)) ]   (truncated to d_i >= 2),
    E[t_i] = sum_{j != k} mu_ij mu_jk mu_ki,
    b_i  = E[t_i] (2 mu_i - 1) / (mu_i^2 (mu_i - 1)^2),
    c_ij = sum_k a_k mu_ki mu_kj,      d_ij = sum_k mu_ki mu_kj,
    e_ij = 2 c_ij + 2 (a_i d_ij + a_j d_ji) - b_i - b_j.

The weighted triangle sum has the analogous decomposition with

    v1_sq = sum_{i<j<k} f_ij f_jk f_ki / (mu_i mu_j mu_k)^2,
    v2_sq = sum_{i<j} (gamma_ij - (eta_i + eta_j)/2)^2 f_ij,
    eta_i    = sum_{j != k} mu_ij mu_jk mu_ki / (mu_i^2 mu_j mu_k),
    gamma_ij = sum_{k not in {i,j}} mu_jk mu_ki / (mu_i mu_j mu_k).

a_i is an expectation over the exact distribution of d_i, a sum of
independent non-identical Bernoulli variables, computed by sequential
convolution.  E[1/(d(d-1))] is ill-defined on {d <= 1}; truncating to
{d >= 2} matches the zero-denominator convention of the statistic itself
and the exponentially small low-degree tail.

All triple sums are evaluated exactly in O(n^3) through matrix products
(zero diagonals make the coincidence terms vanish identically); constant
weights take a closed-form fast path that multiplies one representative
term by the number of triples or pairs.  Asymptotically, for constant
weights with c = 1,

    sigma1_sq -> 6 / n^(3-alpha),   sigma2_sq -> 2 / n^(2+alpha),

which cross at alpha = 1/2: the variance scale of the clustering
coefficient changes regime there, while v1_sq + v2_sq moves continuously
in alpha.  Convergence to these closed forms is slow: a_i exceeds
1/(mu_i(mu_i-1)) by Theta(1/mu_i), which inflates sigma1_sq by roughly
(1 + 4/mu_i)^2 at finite n.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from math import comb

import numpy as np

from .model import ModelSpec, RankOneWeights

__all__ = [
    "degree_distribution",
    "a_coeff",
    "a_coeff_from_pmf",
    "expected_ti",
    "expected_ti_all",
    "ClusteringConstants",
    "clustering_constants",
    "sigma_components",
    "TriangleConstants",
    "triangle_constants",
    "v_components",
    "mean_cc_approx",
    "mean_t_leading",
    "ClosedFormSigma",
    "sigma_closed_forms",
    "v_closed_form_rank_one",
    "TheoreticalMoments",
    "theoretical_moments",
    "moments_to_json",
]


# ---------------------------------------------------------------------------
# degree law and per-node constants


def _pmf_from_probs(probs: np.ndarray) -> np.ndarray:
    """PMF of a sum of independent Bernoulli(p_k) by sequential convolution."""
    pmf = np.zeros(len(probs) + 1)
    pmf[0] = 1.0
    size = 1
    for p in probs:
        prev = pmf[:size].copy()
        pmf[:size] *= 1.0 - p
        pmf[1 : size + 1] += prev * p
        size += 1
    return pmf


def degree_distribution(model: ModelSpec, i: int) -> np.ndarray:
    """Exact PMF of d_i on {0, ..., n-1}."""
    if not (0 <= i < model.n):
        raise IndexError(f"node index out of range for n={model.n}")
    probs = np.delete(model.mu_matrix[i], i)
    return _pmf_from_probs(probs)


def a_coeff_from_pmf(pmf: np.ndarray) -> float:
    """E[1/(d(d-1))] truncated to d >= 2, for a degree PMF."""
    k = np.arange(2, len(pmf))
    terms = pmf[2:] / (k * (k - 1.0))
    return math.fsum(terms.tolist())


def a_coeff(model: ModelSpec, i: int) -> float:
    """Mean inverse ordered-pair count of d_i, truncated to d_i >= 2."""
    return a_coeff_from_pmf(degree_distribution(model, i))


def _a_all(model: ModelSpec) -> np.ndarray:
    if model.is_homogeneous:
        return np.full(model.n, a_coeff(model, 0))
    return np.array([a_coeff(model, i) for i in range(model.n)])


def expected_ti(model: ModelSpec, i: int) -> float:
    """E[t_i] = sum over ordered pairs (j, k) of mu_ij mu_jk mu_ki."""
    if not (0 <= i < model.n):
        raise IndexError(f"node index out of range for n={model.n}")
    m = model.mu_matrix
    row = m[i]
    return float(row @ m @ row)


def expected_ti_all(model: ModelSpec) -> np.ndarray:
    m = model.mu_matrix
    return ((m @ m) * m).sum(axis=1)


def _require_supercritical(model: ModelSpec) -> None:
    low = float(model.mu.min())
    if low <= 1.0:
        raise ValueError(
            f"expected degrees must exceed 1 (min mu_i = {low:.6g}); "
            "the variance constants divide by (mu_i - 1)"
        )


def _b_from(et: np.ndarray, mu: np.ndarray) -> np.ndarray:
    return et * (2.0 * mu - 1.0) / (mu**2 * (mu - 1.0) ** 2)


@dataclass(frozen=True)
class ClusteringConstants:
    """Per-node (a, b, et) and per-pair (c, d, e) variance constants."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    dsum: np.ndarray
    e: np.ndarray
    et: np.ndarray

    def a3(self, i: int, j: int, k: int) -> float:
        return float(self.a[i] + self.a[j] + self.a[k])


def clustering_constants(model: ModelSpec) -> ClusteringConstants:
    """All clustering variance constants, as full vectors and matrices."""
    _require_supercritical(model)
    m = model.mu_matrix
    mu = model.mu
    a = _a_all(model)
    et = expected_ti_all(model)
    b = _b_from(et, mu)
    c = m @ (a[:, None] * m)
    dsum = m @ m
    e = 2.0 * c + 2.0 * (a[:, None] + a[None, :]) * dsum - b[:, None] - b[None, :]
    np.fill_diagonal(c, 0.0)
    np.fill_diagonal(dsum, 0.0)
    np.fill_diagonal(e, 0.0)
    return ClusteringConstants(a=a, b=b, c=c, dsum=dsum, e=e, et=et)


def _homog_scalars(model: ModelSpec) -> dict:
    """Representative per-node/per-pair constants for constant weights."""
    n = model.n
    mu_pair = model.p * model.weights.c  # type: ignore[union-attr]
    mu = (n - 1) * mu_pair
    a = a_coeff(model, 0)
    et = (n - 1) * (n - 2) * mu_pair**3
    b = float(_b_from(np.array([et]), np.array([mu]))[0])
    c = (n - 2) * a * mu_pair**2
    dsum = (n - 2) * mu_pair**2
    e = 2.0 * c + 4.0 * a * dsum - 2.0 * b
    return dict(mu_pair=mu_pair, mu=mu, a=a, et=et, b=b, c=c, dsum=dsum, e=e)


def sigma_components(
    model: ModelSpec, force_generic: bool = False
) -> tuple[float, float]:
    """Exact (sigma1_sq, sigma2_sq) for the average clustering coefficient.

    Constant-weight models use the symmetric fast path (one representative
    triple and pair term scaled by counts) unless `force_generic`.
    """
    n = model.n
    if model.is_homogeneous and not force_generic:
        _require_supercritical(model)
        s = _homog_scalars(model)
        f = s["mu_pair"] * (1.0 - s["mu_pair"])
        sigma1 = (4.0 / n**2) * comb(n, 3) * (3.0 * s["a"]) ** 2 * f**3
        sigma2 = (1.0 / n**2) * comb(n, 2) * s["e"] ** 2 * f
        return sigma1, sigma2
    consts = clustering_constants(model)
    m = model.mu_matrix
    f = m * (1.0 - m)
    np.fill_diagonal(f, 0.0)
    a = consts.a
    f2 = f @ f
    diag_f3 = (f2 * f).sum(axis=1)
    triple = 0.5 * float(a**2 @ diag_f3) + float(
        ((a[:, None] * f) * f2 * a[None, :]).sum()
    )
    sigma1 = (4.0 / n**2) * triple
    sigma2 = (0.5 / n**2) * float((consts.e**2 * f).sum())
    return sigma1, sigma2


# ---------------------------------------------------------------------------
# weighted triangle sum


@dataclass(frozen=True)
class TriangleConstants:
    """Linear-term constants of the weighted triangle sum."""

    eta: np.ndarray
    gamma: np.ndarray


def triangle_constants(model: ModelSpec) -> TriangleConstants:
    m = model.mu_matrix
    mu = model.mu
    num = m @ ((1.0 / mu)[:, None] * m)  # num_ij = sum_k mu_ik mu_kj / mu_k
    gamma = num / np.outer(mu, mu)
    np.fill_diagonal(gamma, 0.0)
    scaled = m / mu[None, :]  # scaled_ij = mu_ij / mu_j
    path2 = scaled @ m
    eta = (path2 * scaled).sum(axis=1) / mu**2
    return TriangleConstants(eta=eta, gamma=gamma)


def v_components(model: ModelSpec, force_generic: bool = False) -> tuple[float, float]:
    """Exact (v1_sq, v2_sq) for the weighted triangle sum.

    Under constant weights gamma_ij == eta_i identically, so v2_sq is 0
    exactly and the fast path returns it as such.
    """
    n = model.n
    if model.is_homogeneous and not force_generic:
        mu_pair = model.p * model.weights.c  # type: ignore[union-attr]
        mu = (n - 1) * mu_pair
        f = mu_pair * (1.0 - mu_pair)
        v1 = comb(n, 3) * f**3 / mu**6
        return v1, 0.0
    m = model.mu_matrix
    mu = model.mu
    f = m * (1.0 - m)
    np.fill_diagonal(f, 0.0)
    g = f / np.outer(mu, mu)
    v1 = float(((g @ g) * g).sum()) / 6.0
    tc = triangle_constants(model)
    delta = tc.gamma - 0.5 * (tc.eta[:, None] + tc.eta[None, :])
    np.fill_diagonal(delta, 0.0)
    v2 = 0.5 * float((delta**2 * f).sum())
    return v1, v2


# ---------------------------------------------------------------------------
# mean expansions and closed forms


def mean_cc_approx(model: ModelSpec) -> float:
    """Two-term expansion of the expected average clustering coefficient:

        (1/n) sum_i E[t_i] a_i
      - (2/n) sum_{i!=j!=k} [(2mu_i-1)/(mu_i^2(mu_i-1)^2)] f_ij mu_ik mu_jk.

    The neglected remainder shrinks only as the expected degrees grow;
    at small n the second term is not a small correction.
    """
    _require_supercritical(model)
    n = model.n
    m = model.mu_matrix
    mu = model.mu
    a = _a_all(model)
    et = expected_ti_all(model)
    term1 = float(et @ a) / n
    g = (2.0 * mu - 1.0) / (mu**2 * (mu - 1.0) ** 2)
    f = m * (1.0 - m)
    np.fill_diagonal(f, 0.0)
    diag_fmm = ((f @ m) * m).sum(axis=1)
    term2 = (2.0 / n) * float(g @ diag_fmm)
    return term1 - term2


def mean_t_leading(model: ModelSpec) -> float:
    """Leading term of E[weighted triangle sum]:
    sum_{i<j<k} mu_ij mu_jk mu_ki / (mu_i mu_j mu_k).  Diagnostic only;
    the full expectation has no closed form at finite n.
    """
    m = model.mu_matrix
    mu = model.mu
    h = m / np.sqrt(np.outer(mu, mu))
    return float(((h @ h) * h).sum()) / 6.0


@dataclass(frozen=True)
class ClosedFormSigma:
    """Asymptotic variance scales for constant weights with c = 1."""

    sigma1_sq: float
    sigma2_sq: float
    sigma_sq: float


def sigma_closed_forms(n: int, alpha: float) -> ClosedFormSigma:
    """Closed forms 6/n^(3-alpha), 2/n^(2+alpha) and the regime-selected
    total: the cubic scale above alpha = 1/2, the linear scale below it,
    and their sum 8/(n^2 sqrt(n)) at the boundary.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha={alpha} outside (0, 1)")
    s1 = 6.0 / n ** (3.0 - alpha)
    s2 = 2.0 / n ** (2.0 + alpha)
    if alpha > 0.5:
        total = s1
    elif alpha < 0.5:
        total = s2
    else:
        total = 8.0 / (n**2 * math.sqrt(n))
    return ClosedFormSigma(sigma1_sq=s1, sigma2_sq=s2, sigma_sq=total)


def v_closed_form_rank_one(model: ModelSpec) -> float:
    """Asymptotic v_sq for rank-one weights: n^3 / (6 w^6 p^3), w = sum_i w_i.

    Continuous in alpha, hence no scale jump for the weighted triangle sum.
    """
    if not isinstance(model.weights, RankOneWeights):
        raise TypeError("closed form applies to rank-one weight models only")
    w = float(model.weights.w.sum())
    return model.n**3 / (6.0 * w**6 * model.p**3)


# ---------------------------------------------------------------------------
# aggregate


@dataclass(frozen=True)
class TheoreticalMoments:
    """Every exact variance component plus the mean expansions."""

    sigma1_sq: float
    sigma2_sq: float
    sigma_sq: float
    v1_sq: float
    v2_sq: float
    v_sq: float
    mean_cc_approx: float
    mean_t_leading: float


def theoretical_moments(
    model: ModelSpec, force_generic: bool = False
) -> TheoreticalMoments:
    s1, s2 = sigma_components(model, force_generic=force_generic)
    v1, v2 = v_components(model, force_generic=force_generic)
    return TheoreticalMoments(
        sigma1_sq=s1,
        sigma2_sq=s2,
        sigma_sq=s1 + s2,
        v1_sq=v1,
        v2_sq=v2,
        v_sq=v1 + v2,
        mean_cc_approx=mean_cc_approx(model),
        mean_t_leading=mean_t_leading(model),
    )


def moments_to_json(
    model: ModelSpec,
    moments: TheoreticalMoments,
    include_constants: bool = False,
) -> str:
    """Serialize moments (and, optionally, every constant vector/matrix)."""
    payload: dict = {
        "n": model.n,
        "alpha": model.alpha,
        "beta": model.beta,
        "moments": asdict(moments),
    }
    if include_constants:
        cc = clustering_constants(model)
        tc = triangle_constants(model)
        payload["constants"] = {
            "a": cc.a.tolist(),
            "b": cc.b.tolist(),
            "c": cc.c.tolist(),
            "d": cc.dsum.tolist(),
            "e": cc.e.tolist(),
            "expected_ti": cc.et.tolist(),
            "eta": tc.eta.tolist(),
            "gamma": tc.gamma.tolist(),
        }
    return json.dumps(payload, indent=2, sort_keys=True)
