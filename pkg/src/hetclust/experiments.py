"""Monte Carlo verification runs and their serialization.

Each experiment is a deterministic function of (model, replicate count,
master seed, flags): replicate r uses the counter-based seed
(master_seed, r), so runs can be distributed over any number of workers
and still produce byte-identical output files.  Worker count comes from
the HETCLUST_WORKERS environment variable (default: available CPUs).

Standardized scores are always scaled by the exact-sum theoretical
standard deviation, never by the asymptotic closed forms, so normality
checks are free of closed-form approximation error.  Centering defaults to the
empirical replicate mean because the exact expectations have no closed
form; the two-term mean expansion is an opt-in center whose bias is
reported in units of the theoretical standard deviation.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from hashlib import sha1
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr

from .model import ConstantWeights, ModelSpec, model_to_json
from .sampling import SeedSpec, sample_graph
from .stats import avg_clustering, weighted_triangle_sum
from .theory import (
    clustering_constants,
    sigma_closed_forms,
    mean_cc_approx,
    sigma_components,
    triangle_constants,
    v_components,
)

__all__ = [
    "STAT_CLUSTERING",
    "STAT_TRIANGLES",
    "McRunResult",
    "PhaseSweepResult",
    "DecompositionReport",
    "ks_distance",
    "run_mc",
    "phase_sweep",
    "decomposition_check",
    "emit_results",
    "default_filename",
    "mc_result_from_json",
]

STAT_CLUSTERING = "clustering"
STAT_TRIANGLES = "weighted_triangles"

WORKERS_ENV = "HETCLUST_WORKERS"

# per-replicate leading-term evaluation is O(n^3) when the cubic term is
# involved; caps keep a decomposition run at desk timescales
DECOMP_MAX_N_CUBIC = 300
DECOMP_MAX_N_LINEAR = 2000


def ks_distance(sample: Sequence[float]) -> float:
    """Sup distance between the sample's empirical CDF and the standard
    normal CDF, by the one-sample formula over sorted values."""
    x = np.sort(np.asarray(sample, dtype=np.float64))
    m = len(x)
    if m == 0:
        raise ValueError("ks_distance requires a nonempty sample")
    cdf = ndtr(x)
    upper = np.max(np.arange(1, m + 1) / m - cdf)
    lower = np.max(cdf - np.arange(0, m) / m)
    return float(max(upper, lower))


def _worker_count(explicit: int | None = None) -> int:
    if explicit is not None:
        return max(1, int(explicit))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _map_replicates(task, payload, r_count: int, workers: int | None):
    """Evaluate `task(payload, indices)` over all replicates, in order."""
    w = _worker_count(workers)
    indices = np.arange(r_count)
    if w <= 1 or r_count < 2 * w:
        return task(payload, indices)
    from concurrent.futures import ProcessPoolExecutor

    chunks = np.array_split(indices, w)
    with ProcessPoolExecutor(max_workers=w) as pool:
        parts = list(pool.map(task, [payload] * len(chunks), chunks))
    return np.concatenate(parts, axis=0)


def _stat_value(graph, stat_kind: str) -> float:
    if stat_kind == STAT_CLUSTERING:
        return avg_clustering(graph)
    if stat_kind == STAT_TRIANGLES:
        return weighted_triangle_sum(graph)
    raise ValueError(f"unknown statistic kind: {stat_kind!r}")


def _mc_task(payload, indices) -> np.ndarray:
    model, master_seed, stat_kind = payload
    out = np.empty(len(indices))
    for pos, r in enumerate(indices):
        g = sample_graph(model, SeedSpec(master_seed, int(r)))
        out[pos] = _stat_value(g, stat_kind)
    return out


def _model_summary(model: ModelSpec) -> dict:
    cfg = model_to_json(model)
    digest = sha1(
        np.ascontiguousarray(model.mu_matrix).tobytes()
    ).hexdigest()
    return {
        "n": model.n,
        "alpha": model.alpha,
        "beta": model.beta,
        "weights_kind": cfg["weights"]["kind"],
        "mu_sha1": digest,
    }


@dataclass(eq=False)
class McRunResult:
    """One Monte Carlo run: raw values, standardized scores, diagnostics."""

    model: dict
    r_count: int
    stat_kind: str
    values: np.ndarray
    z: np.ndarray
    centering: str
    center: float
    center_bias_sds: float
    scale_sq: float
    ks_distance: float
    empirical_var_ratio: float
    n_zero_statistic: int
    master_seed: int

    def __eq__(self, other) -> bool:
        if not isinstance(other, McRunResult):
            return NotImplemented
        return (
            self.model == other.model
            and self.r_count == other.r_count
            and self.stat_kind == other.stat_kind
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.z, other.z)
            and self.centering == other.centering
            and self.center == other.center
            and self.center_bias_sds == other.center_bias_sds
            and self.scale_sq == other.scale_sq
            and self.ks_distance == other.ks_distance
            and self.empirical_var_ratio == other.empirical_var_ratio
            and self.n_zero_statistic == other.n_zero_statistic
            and self.master_seed == other.master_seed
        )


def run_mc(
    model: ModelSpec,
    stat_kind: str,
    r_count: int,
    master_seed: int,
    centering: str = "empirical",
    workers: int | None = None,
) -> McRunResult:
    """Sample r_count replicates, compute the statistic, standardize.

    The scale is the exact theoretical variance (cubic plus linear
    component) of the chosen statistic.  Replicates whose statistic is
    exactly zero are kept and counted, not dropped.
    """
    if r_count < 2:
        raise ValueError("need at least two replicates")
    if stat_kind == STAT_CLUSTERING:
        s1, s2 = sigma_components(model)
        scale_sq = s1 + s2
    elif stat_kind == STAT_TRIANGLES:
        v1, v2 = v_components(model)
        scale_sq = v1 + v2
    else:
        raise ValueError(f"unknown statistic kind: {stat_kind!r}")

    values = _map_replicates(_mc_task, (model, master_seed, stat_kind), r_count, workers)
    emp_mean = float(values.mean())
    scale = math.sqrt(scale_sq)
    if centering == "empirical":
        center = emp_mean
        bias = 0.0
    elif centering == "lemma3":
        if stat_kind != STAT_CLUSTERING:
            raise ValueError(
                "expansion-based centering is defined for the clustering statistic only"
            )
        center = mean_cc_approx(model)
        bias = (center - emp_mean) / scale
    else:
        raise ValueError(f"unknown centering: {centering!r}")
    z = (values - center) / scale
    return McRunResult(
        model=_model_summary(model),
        r_count=r_count,
        stat_kind=stat_kind,
        values=values,
        z=z,
        centering=centering,
        center=center,
        center_bias_sds=bias,
        scale_sq=scale_sq,
        ks_distance=ks_distance(z),
        empirical_var_ratio=float(values.var(ddof=1)) / scale_sq,
        n_zero_statistic=int(np.count_nonzero(values == 0.0)),
        master_seed=master_seed,
    )


# ---------------------------------------------------------------------------
# phase sweep


@dataclass(frozen=True)
class PhaseRecord:
    alpha: float
    sigma1_sq: float
    sigma2_sq: float
    ratio: float
    closed_sigma1_sq: float
    closed_sigma2_sq: float
    closed_sigma_sq: float


@dataclass(frozen=True)
class PhaseSweepResult:
    n: int
    weight_c: float
    records: tuple[PhaseRecord, ...]

    @property
    def alphas(self) -> list[float]:
        return [r.alpha for r in self.records]


def phase_sweep(n: int, alphas: Iterable[float], weight_c: float = 1.0) -> PhaseSweepResult:
    """Exact variance components across a grid of density exponents.

    The cubic/linear ratio grows like n^(2 alpha - 1), so it crosses its
    boundary value as alpha passes 1/2: the scale of the clustering
    coefficient's variance switches regime discontinuously.
    """
    records = []
    for alpha in alphas:
        model = ModelSpec(n=n, alpha=float(alpha), beta=weight_c, weights=ConstantWeights(weight_c))
        s1, s2 = sigma_components(model)
        closed = sigma_closed_forms(n, float(alpha))
        records.append(
            PhaseRecord(
                alpha=float(alpha),
                sigma1_sq=s1,
                sigma2_sq=s2,
                ratio=s1 / s2,
                closed_sigma1_sq=closed.sigma1_sq,
                closed_sigma2_sq=closed.sigma2_sq,
                closed_sigma_sq=closed.sigma_sq,
            )
        )
    return PhaseSweepResult(n=n, weight_c=weight_c, records=tuple(records))


# ---------------------------------------------------------------------------
# leading-term decomposition


REGIME_SUB = "sub_half"
REGIME_HALF = "half"
REGIME_SUPER = "super_half"


@dataclass(eq=False)
class DecompositionReport:
    """Correlation between the centered statistic and its leading term."""

    model: dict
    stat_kind: str
    regime: str
    r_count: int
    master_seed: int
    degenerate_linear: bool
    correlation: float | None
    residual_var_fraction: float | None
    values: np.ndarray
    leading: np.ndarray


def _decomp_task(payload, indices) -> np.ndarray:
    (model, master_seed, stat_kind, mu_mat, a_vec, e_mat, delta_mat, inv_mu_sqrt) = payload
    n = model.n
    out = np.empty((len(indices), 2))
    for pos, r in enumerate(indices):
        g = sample_graph(model, SeedSpec(master_seed, int(r)))
        value = _stat_value(g, stat_kind)
        b = g.adjacency_dense() - mu_mat
        lead = 0.0
        if a_vec is not None:  # cubic term, clustering
            lead += float(a_vec @ ((b @ b) * b).sum(axis=1)) / n
        if e_mat is not None:  # linear term, clustering
            lead += 0.5 / n * float((e_mat * b).sum())
        if inv_mu_sqrt is not None:  # cubic term, triangles
            bt = b * inv_mu_sqrt
            lead += float(((bt @ bt) * bt).sum()) / 6.0
        if delta_mat is not None:  # linear term, triangles
            lead += 0.5 * float((delta_mat * b).sum())
        out[pos, 0] = value
        out[pos, 1] = lead
    return out


def decomposition_check(
    model: ModelSpec,
    stat_kind: str,
    r_count: int,
    master_seed: int,
    workers: int | None = None,
) -> DecompositionReport:
    """Per-replicate leading term of the regime implied by alpha.

    Above alpha = 1/2 the leading term is cubic in centered indicators,
    below it linear, at the boundary their sum.  If the linear term is
    identically zero (constant weights make gamma_ij == eta_i, so the
    triangle statistic's linear coefficients vanish), the run is flagged
    degenerate instead of reporting a correlation.
    """
    if r_count < 2:
        raise ValueError("need at least two replicates")
    alpha = model.alpha
    regime = REGIME_HALF if alpha == 0.5 else (REGIME_SUB if alpha < 0.5 else REGIME_SUPER)
    needs_cubic = regime in (REGIME_SUPER, REGIME_HALF)
    needs_linear = regime in (REGIME_SUB, REGIME_HALF)
    cap = DECOMP_MAX_N_CUBIC if needs_cubic else DECOMP_MAX_N_LINEAR
    if model.n > cap:
        raise ValueError(
            f"decomposition at regime {regime} caps n at {cap}, got {model.n}"
        )

    mu_mat = np.asarray(model.mu_matrix)
    a_vec = e_mat = delta_mat = inv_mu_sqrt = None
    degenerate = False
    if stat_kind == STAT_CLUSTERING:
        consts = clustering_constants(model)
        if needs_cubic:
            a_vec = consts.a
        if needs_linear:
            e_mat = consts.e
            if regime == REGIME_SUB and not np.any(e_mat):
                degenerate = True
    elif stat_kind == STAT_TRIANGLES:
        if needs_cubic:
            mu = model.mu
            inv_mu_sqrt = 1.0 / np.sqrt(np.outer(mu, mu))
        if needs_linear:
            _, v2 = v_components(model)
            if v2 == 0.0:
                if regime == REGIME_SUB:
                    degenerate = True
            else:
                tc = triangle_constants(model)
                delta_mat = tc.gamma - 0.5 * (tc.eta[:, None] + tc.eta[None, :])
                np.fill_diagonal(delta_mat, 0.0)
    else:
        raise ValueError(f"unknown statistic kind: {stat_kind!r}")

    if degenerate:
        return DecompositionReport(
            model=_model_summary(model),
            stat_kind=stat_kind,
            regime=regime,
            r_count=r_count,
            master_seed=master_seed,
            degenerate_linear=True,
            correlation=None,
            residual_var_fraction=None,
            values=np.empty(0),
            leading=np.empty(0),
        )

    payload = (model, master_seed, stat_kind, mu_mat, a_vec, e_mat, delta_mat, inv_mu_sqrt)
    table = _map_replicates(_decomp_task, payload, r_count, workers)
    values, leading = table[:, 0], table[:, 1]
    corr = float(np.corrcoef(values, leading)[0, 1])
    resid = values - values.mean() - (leading - leading.mean())
    residual_fraction = float(resid.var(ddof=1) / values.var(ddof=1))
    return DecompositionReport(
        model=_model_summary(model),
        stat_kind=stat_kind,
        regime=regime,
        r_count=r_count,
        master_seed=master_seed,
        degenerate_linear=False,
        correlation=corr,
        residual_var_fraction=residual_fraction,
        values=values,
        leading=leading,
    )


# ---------------------------------------------------------------------------
# serialization


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def default_filename(result, fmt: str) -> str:
    """Conventional name `<stat>_<n>_<alpha>_<seed>.<ext>`."""
    ext = "csv" if fmt == "csv" else "json"
    if isinstance(result, McRunResult) or isinstance(result, DecompositionReport):
        m = result.model
        return f"{result.stat_kind}_{m['n']}_{m['alpha']:g}_{result.master_seed}.{ext}"
    if isinstance(result, PhaseSweepResult):
        lo, hi = result.alphas[0], result.alphas[-1]
        return f"phase_{result.n}_{lo:g}-{hi:g}_0.{ext}"
    raise TypeError(f"no filename convention for {type(result).__name__}")


def _mc_to_jsonable(result: McRunResult) -> dict:
    return {
        "kind": "mc_run",
        "model": result.model,
        "r_count": result.r_count,
        "stat_kind": result.stat_kind,
        "values": result.values.tolist(),
        "z": result.z.tolist(),
        "centering": result.centering,
        "center": result.center,
        "center_bias_sds": result.center_bias_sds,
        "scale_sq": result.scale_sq,
        "ks_distance": result.ks_distance,
        "empirical_var_ratio": result.empirical_var_ratio,
        "n_zero_statistic": result.n_zero_statistic,
        "master_seed": result.master_seed,
    }


def mc_result_from_json(text: str) -> McRunResult:
    doc = json.loads(text)
    if doc.get("kind") != "mc_run":
        raise ValueError("not a serialized Monte Carlo run")
    return McRunResult(
        model=doc["model"],
        r_count=doc["r_count"],
        stat_kind=doc["stat_kind"],
        values=np.asarray(doc["values"]),
        z=np.asarray(doc["z"]),
        centering=doc["centering"],
        center=doc["center"],
        center_bias_sds=doc["center_bias_sds"],
        scale_sq=doc["scale_sq"],
        ks_distance=doc["ks_distance"],
        empirical_var_ratio=doc["empirical_var_ratio"],
        n_zero_statistic=doc["n_zero_statistic"],
        master_seed=doc["master_seed"],
    )


def _result_to_text(result, fmt: str) -> str:
    if fmt == "json":
        if isinstance(result, McRunResult):
            doc = _mc_to_jsonable(result)
        elif isinstance(result, PhaseSweepResult):
            doc = {
                "kind": "phase_sweep",
                "n": result.n,
                "weight_c": result.weight_c,
                "records": [vars(r) for r in result.records],
            }
        elif isinstance(result, DecompositionReport):
            doc = {
                "kind": "decomposition",
                "model": result.model,
                "stat_kind": result.stat_kind,
                "regime": result.regime,
                "r_count": result.r_count,
                "master_seed": result.master_seed,
                "degenerate_linear": result.degenerate_linear,
                "correlation": result.correlation,
                "residual_var_fraction": result.residual_var_fraction,
                "values": result.values.tolist(),
                "leading": result.leading.tolist(),
            }
        else:
            raise TypeError(f"cannot serialize {type(result).__name__}")
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    if fmt == "csv":
        lines: list[str] = []
        if isinstance(result, McRunResult):
            lines.append("replicate,value,z")
            for r, (v, zz) in enumerate(zip(result.values, result.z)):
                lines.append(f"{r},{_fmt(v)},{_fmt(zz)}")
        elif isinstance(result, PhaseSweepResult):
            lines.append("alpha,sigma1_sq,sigma2_sq,ratio,closed_sigma_sq")
            for rec in result.records:
                lines.append(
                    f"{_fmt(rec.alpha)},{_fmt(rec.sigma1_sq)},{_fmt(rec.sigma2_sq)},"
                    f"{_fmt(rec.ratio)},{_fmt(rec.closed_sigma_sq)}"
                )
        elif isinstance(result, DecompositionReport):
            lines.append("replicate,value,leading")
            for r, (v, ld) in enumerate(zip(result.values, result.leading)):
                lines.append(f"{r},{_fmt(v)},{_fmt(ld)}")
        else:
            raise TypeError(f"cannot serialize {type(result).__name__}")
        return "\n".join(lines) + "\n"

    raise ValueError(f"unknown format: {fmt!r}")


def emit_results(result, path: str | Path, fmt: str) -> None:
    """Write a result to CSV or JSON; byte-stable for identical inputs."""
    text = _result_to_text(result, fmt)
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"writing {path}: {exc}") from exc
