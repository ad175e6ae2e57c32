import json
import math
import os

import numpy as np
import pytest
from scipy.stats import norm

from hetclust.experiments import (
    STAT_CLUSTERING,
    STAT_TRIANGLES,
    decomposition_check,
    default_filename,
    emit_results,
    ks_distance,
    mc_result_from_json,
    phase_sweep,
    run_mc,
)
from hetclust.model import ModelSpec, RankOneWeights

from conftest import er_model


# ---------------------------------------------------------------------------
# KS distance


def test_ks_single_point_at_median():
    assert ks_distance([0.0]) == pytest.approx(0.5, rel=1e-12)


def test_ks_plug_in_quantile_grid():
    m = 100
    grid = norm.ppf((np.arange(1, m + 1) - 0.5) / m)
    assert ks_distance(grid) == pytest.approx(0.005, abs=1e-10)


def test_ks_total_separation():
    m = 100
    grid = norm.ppf((np.arange(1, m + 1) - 0.5) / m) + 10.0
    assert ks_distance(grid) > 0.999


def test_ks_order_invariance(rng):
    x = rng.normal(size=200)
    assert ks_distance(x) == ks_distance(np.sort(x)[::-1])
    assert 0.0 <= ks_distance(x) <= 1.0


def test_ks_empty_rejected():
    with pytest.raises(ValueError):
        ks_distance([])


# ---------------------------------------------------------------------------
# Monte Carlo runs


def test_run_mc_two_replicates_symmetric_z():
    m = er_model(30, alpha=0.4)
    res = run_mc(m, STAT_CLUSTERING, 2, master_seed=5, workers=1)
    assert res.z[0] == pytest.approx(-res.z[1], rel=1e-12)
    assert abs(res.z.mean()) < 1e-12


def test_run_mc_empirical_centering_invariants():
    m = er_model(50, alpha=0.4)
    res = run_mc(m, STAT_CLUSTERING, 60, master_seed=9, workers=1)
    assert abs(res.z.mean()) < 1e-12
    assert res.z.var(ddof=1) == pytest.approx(res.empirical_var_ratio, rel=1e-12)
    assert 0.0 <= res.ks_distance <= 1.0
    assert res.r_count == len(res.values) == len(res.z) == 60


def test_run_mc_counts_zero_statistics():
    m = er_model(6, alpha=0.8)
    res = run_mc(m, STAT_TRIANGLES, 40, master_seed=3, workers=1)
    assert res.n_zero_statistic == int(np.sum(res.values == 0.0))
    assert res.n_zero_statistic > 0  # triangles are rare at this density


def test_run_mc_lemma3_centering_reports_bias():
    m = er_model(60, alpha=0.4)
    res = run_mc(m, STAT_CLUSTERING, 30, master_seed=4, centering="lemma3", workers=1)
    emp = run_mc(m, STAT_CLUSTERING, 30, master_seed=4, workers=1)
    assert res.center_bias_sds == pytest.approx(
        (res.center - emp.values.mean()) / math.sqrt(res.scale_sq), rel=1e-12
    )
    with pytest.raises(ValueError):
        run_mc(m, STAT_TRIANGLES, 10, master_seed=4, centering="lemma3", workers=1)


def test_run_mc_rejects_bad_args():
    m = er_model(20, alpha=0.4)
    with pytest.raises(ValueError):
        run_mc(m, "degree", 10, master_seed=0)
    with pytest.raises(ValueError):
        run_mc(m, STAT_CLUSTERING, 1, master_seed=0)


def test_run_mc_worker_count_does_not_change_results():
    m = er_model(25, alpha=0.4)
    res1 = run_mc(m, STAT_CLUSTERING, 12, master_seed=77, workers=1)
    res2 = run_mc(m, STAT_CLUSTERING, 12, master_seed=77, workers=2)
    assert np.array_equal(res1.values, res2.values)


def test_run_mc_honors_env_worker_count(monkeypatch):
    monkeypatch.setenv("HETCLUST_WORKERS", "1")
    m = er_model(20, alpha=0.4)
    res = run_mc(m, STAT_CLUSTERING, 6, master_seed=1)
    assert len(res.values) == 6


# ---------------------------------------------------------------------------
# emission


def test_mc_json_round_trip(tmp_path):
    m = er_model(25, alpha=0.4)
    res = run_mc(m, STAT_CLUSTERING, 8, master_seed=21, workers=1)
    path = tmp_path / "run.json"
    emit_results(res, path, "json")
    back = mc_result_from_json(path.read_text())
    assert back == res


def test_emission_is_deterministic(tmp_path):
    m = er_model(25, alpha=0.4)
    for fmt in ("csv", "json"):
        a, b = tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"
        emit_results(run_mc(m, STAT_TRIANGLES, 10, master_seed=6, workers=1), a, fmt)
        emit_results(run_mc(m, STAT_TRIANGLES, 10, master_seed=6, workers=1), b, fmt)
        assert a.read_bytes() == b.read_bytes()


def test_mc_csv_layout(tmp_path):
    m = er_model(25, alpha=0.4)
    res = run_mc(m, STAT_CLUSTERING, 5, master_seed=2, workers=1)
    path = tmp_path / "run.csv"
    emit_results(res, path, "csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "replicate,value,z"
    assert len(lines) == 6
    row = lines[1].split(",")
    assert int(row[0]) == 0
    assert float(row[1]) == res.values[0]  # 17 significant digits round-trip


def test_phase_csv_header(tmp_path):
    sweep = phase_sweep(100, [0.3, 0.5, 0.7])
    path = tmp_path / "sweep.csv"
    emit_results(sweep, path, "csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "alpha,sigma1_sq,sigma2_sq,ratio,closed_sigma_sq"
    assert len(lines) == 4


def test_default_filename_convention():
    m = er_model(25, alpha=0.4)
    res = run_mc(m, STAT_CLUSTERING, 4, master_seed=11, workers=1)
    assert default_filename(res, "csv") == f"clustering_25_{m.alpha:g}_11.csv"
    sweep = phase_sweep(50, [0.2, 0.8])
    assert default_filename(sweep, "json") == "phase_50_0.2-0.8_0.json"


def test_emit_unknown_format_rejected(tmp_path):
    sweep = phase_sweep(50, [0.4])
    with pytest.raises(ValueError):
        emit_results(sweep, tmp_path / "x.bin", "parquet")


# ---------------------------------------------------------------------------
# phase sweep


def test_phase_ratio_strictly_increasing():
    alphas = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]
    sweep = phase_sweep(1000, alphas)
    ratios = [r.ratio for r in sweep.records]
    assert all(a < b for a, b in zip(ratios, ratios[1:]))
    assert all(r.ratio > 0 for r in sweep.records)


def test_phase_records_carry_closed_forms():
    sweep = phase_sweep(400, [0.3, 0.7])
    rec = sweep.records[0]
    assert rec.closed_sigma2_sq == pytest.approx(2 / 400**2.3, rel=1e-12)
    assert rec.closed_sigma_sq == rec.closed_sigma2_sq
    rec = sweep.records[1]
    assert rec.closed_sigma_sq == rec.closed_sigma1_sq


# ---------------------------------------------------------------------------
# decomposition


def test_decomposition_degenerate_for_homogeneous_triangles():
    m = er_model(40, alpha=0.3)
    rep = decomposition_check(m, STAT_TRIANGLES, 50, master_seed=8, workers=1)
    assert rep.degenerate_linear
    assert rep.correlation is None
    assert rep.regime == "sub_half"


def test_decomposition_rank_one_not_degenerate():
    n = 60
    m = ModelSpec(n=n, alpha=0.3, beta=0.5, weights=RankOneWeights(np.linspace(0.5, 1.0, n)))
    rep = decomposition_check(m, STAT_TRIANGLES, 60, master_seed=8, workers=1)
    assert not rep.degenerate_linear
    assert -1.0 <= rep.correlation <= 1.0
    assert rep.residual_var_fraction >= 0.0


def test_decomposition_super_half_clustering_smoke():
    m = er_model(80, alpha=0.7)
    rep = decomposition_check(m, STAT_CLUSTERING, 150, master_seed=13, workers=1)
    assert rep.regime == "super_half"
    assert rep.correlation > 0.3


def test_decomposition_half_regime_combines_terms():
    m = er_model(60, alpha=0.5)
    rep = decomposition_check(m, STAT_CLUSTERING, 40, master_seed=14, workers=1)
    assert rep.regime == "half"
    assert rep.correlation is not None


def test_decomposition_size_caps():
    with pytest.raises(ValueError):
        decomposition_check(er_model(301, alpha=0.7), STAT_CLUSTERING, 10, master_seed=0)
    with pytest.raises(ValueError):
        decomposition_check(er_model(2001, alpha=0.3), STAT_CLUSTERING, 10, master_seed=0)


def test_decomposition_emission(tmp_path):
    m = er_model(40, alpha=0.7)
    rep = decomposition_check(m, STAT_CLUSTERING, 20, master_seed=5, workers=1)
    path = tmp_path / "dec.csv"
    emit_results(rep, path, "csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "replicate,value,leading"
    assert len(lines) == 21
    jpath = tmp_path / "dec.json"
    emit_results(rep, jpath, "json")
    doc = json.loads(jpath.read_text())
    assert doc["regime"] == "super_half"
    assert len(doc["values"]) == 20


def _leading_terms_literal(model, seed_master, r, stat_kind):
    """Literal-loop evaluation of the regime leading terms for one replicate."""
    import itertools

    from hetclust.sampling import SeedSpec, sample_graph
    from hetclust.theory import clustering_constants, triangle_constants

    g = sample_graph(model, SeedSpec(seed_master, r))
    n = model.n
    mu = np.asarray(model.mu_matrix)
    mu_i = np.asarray(model.mu)
    b = g.adjacency_dense() - mu
    if stat_kind == STAT_CLUSTERING:
        consts = clustering_constants(model)
        cubic = sum(
            (consts.a[i] + consts.a[j] + consts.a[k]) * b[i, j] * b[i, k] * b[j, k]
            for i, j, k in itertools.combinations(range(n), 3)
        ) * (2.0 / n)
        linear = sum(
            consts.e[i, j] * b[i, j] for i, j in itertools.combinations(range(n), 2)
        ) / n
    else:
        cubic = sum(
            b[i, j] * b[j, k] * b[k, i] / (mu_i[i] * mu_i[j] * mu_i[k])
            for i, j, k in itertools.combinations(range(n), 3)
        )
        tc = triangle_constants(model)
        linear = sum(
            (tc.gamma[i, j] - (tc.eta[i] + tc.eta[j]) / 2) * b[i, j]
            for i, j in itertools.combinations(range(n), 2)
        )
    return cubic, linear


@pytest.mark.parametrize(
    "alpha,stat,pick",
    [
        (0.7, STAT_CLUSTERING, "cubic"),
        (0.3, STAT_CLUSTERING, "linear"),
        (0.5, STAT_CLUSTERING, "both"),
        (0.7, STAT_TRIANGLES, "cubic"),
    ],
)
def test_decomposition_leading_terms_match_literal_loops(alpha, stat, pick):
    m = er_model(12, alpha=alpha)
    rep = decomposition_check(m, stat, 3, master_seed=909, workers=1)
    for r in range(3):
        cubic, linear = _leading_terms_literal(m, 909, r, stat)
        expect = {"cubic": cubic, "linear": linear, "both": cubic + linear}[pick]
        assert rep.leading[r] == pytest.approx(expect, rel=1e-10, abs=1e-14)


def test_decomposition_linear_term_rank_one_matches_literal():
    n = 12
    m = ModelSpec(n=n, alpha=0.3, beta=0.5, weights=RankOneWeights(np.linspace(0.5, 1.0, n)))
    rep = decomposition_check(m, STAT_TRIANGLES, 3, master_seed=4242, workers=1)
    for r in range(3):
        _, linear = _leading_terms_literal(m, 4242, r, STAT_TRIANGLES)
        assert rep.leading[r] == pytest.approx(linear, rel=1e-10, abs=1e-14)
