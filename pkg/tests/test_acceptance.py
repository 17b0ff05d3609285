"""Acceptance suite: one test per criterion, each printing a PASS line.

The benchmark grids (criteria 3, 9, 10) run the full eight-method
comparison at a fixed base seed over the bundled fixtures; everything is
deterministic, so these assertions are exact reruns of frozen
computations.  Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import math
import os
from itertools import product
from pathlib import Path

import numpy as np
import pytest

from crowdbench.aggregate import (
    EmOptions,
    accuracy_em,
    bayes_sensspec_em,
    dawid_skene_em,
    filtered_vote_quality,
    glad_em,
    mv_quality,
    spectral_estimate,
    weighted_posterior,
    _glad_q_and_grads,
)
from crowdbench.bench import (
    ExperimentConfig,
    render_report,
    run_experiment,
)
from crowdbench.labels import LabelMatrix, fixture_pool, load_manifest
from crowdbench.selection import adaptive_replay
from crowdbench.sequential import SFilterConfig, sfilter_track

from oracles import exhaustive_bayes_posterior, ds_grid_search_ml
from test_voting import random_instance, random_model
from test_sequential import model_stream

BASE_SEED = 0
METHODS = (
    "majority",
    "entropy-select",
    "uncertainty-select",
    "accuracy",
    "accuracy+uncertainty",
    "sensspec",
    "reliability",
    "glad",
)
GRIDS = {"rte": (1, 3, 5, 7, 9), "temp": (1, 3, 5, 7, 9), "duchenne": (1, 3, 5, 7)}

# Published reference tables (errors in percent).
PUBLISHED = {
    "rte": {
        "majority": [26.84, 19.84, 15.63, 12.94, 10.36],
        "entropy-select": [26.84, 23.48, 20.93, 16.60, 12.22],
        "uncertainty-select": [26.84, 16.29, 11.91, 10.03, 10.74],
        "accuracy": [26.84, 16.63, 11.76, 10.73, 10.56],
        "accuracy+uncertainty": [29.03, 15.32, 14.49, 13.45, 11.43],
        "sensspec": [26.84, 15.27, 11.22, 10.26, 9.74],
        "reliability": [26.84, 19.69, 12.29, 10.25, 8.62],
        "glad": [26.84, 14.77, 10.69, 8.91, 7.76],
    },
    "temp": {
        "majority": [26.37, 16.46, 10.94, 7.44, 6.35],
        "entropy-select": [26.37, 21.37, 17.13, 12.84, 8.39],
        "uncertainty-select": [26.37, 12.78, 7.85, 6.68, 6.26],
        "accuracy": [26.37, 10.49, 8.25, 7.34, 6.94],
        "accuracy+uncertainty": [26.83, 10.31, 9.37, 9.42, 8.02],
        "sensspec": [26.37, 10.90, 7.91, 7.21, 6.94],
        "reliability": [26.37, 11.98, 8.27, 7.12, 6.30],
        "glad": [26.37, 11.14, 7.76, 6.33, 6.06],
    },
    "duchenne": {
        "majority": [37.74, 33.14, 31.76, 30.19],
        "entropy-select": [37.74, 35.28, 33.21, 30.82],
        "uncertainty-select": [37.74, 31.38, 29.59, 28.21],
        "accuracy": [37.74, 31.38, 28.49, 27.89],
        "accuracy+uncertainty": [46.48, 33.74, 32.61, 35.03],
        "sensspec": [37.74, 28.77, 28.11, 28.40],
        "reliability": [37.74, 33.46, 27.45, 26.32],
        "glad": [37.74, 29.72, 26.35, 25.31],
    },
}


def announce(criterion: str, message: str) -> None:
    print(f"\nACCEPTANCE {criterion}: PASS  {message}")


def grid_config(dataset: str) -> ExperimentConfig:
    return ExperimentConfig(
        dataset=dataset,
        methods=METHODS,
        lps_grid=GRIDS[dataset],
        runs=20,
        base_seed=BASE_SEED,
    )


@pytest.fixture(scope="session")
def reports():
    return {name: run_experiment(grid_config(name)) for name in GRIDS}


def test_criterion_01_filtered_vote_reproduction():
    accs = [0.55, 0.85, 0.75, 0.6, 0.8]
    all_five = filtered_vote_quality(accs, range(5))
    best_three = filtered_vote_quality(accs, [1, 4, 2])
    best_one = filtered_vote_quality(accs, [1])
    assert all_five == pytest.approx(0.86, abs=0.005)
    assert best_three == pytest.approx(0.90, abs=0.005)
    assert best_one == pytest.approx(0.85, abs=0.005)
    announce(
        "1",
        f"filtered vote quality {all_five:.4f}/{best_three:.4f}/{best_one:.4f} "
        "matches 0.86/0.90/0.85 within 0.005",
    )


def test_criterion_02_table1_fidelity():
    expected = {"rte": (800, 164, 8000), "temp": (462, 76, 4620), "duchenne": (159, 17, 1950)}
    for name, (n, r, total) in expected.items():
        pool = fixture_pool(name)
        assert pool.n_samples == n
        assert pool.n_workers == r
        assert pool.total_labels == total
    duch = fixture_pool("duchenne")
    assert duch.pool_sizes.min() >= 8 and duch.pool_sizes.max() <= 15
    announce("2", "fixture counts equal the reference table for all three datasets")


def _means(report, method):
    return [report.mean(method, lps) for lps in report.lps_grid]


def test_criterion_03a_glad_beats_majority(reports):
    for name, report in reports.items():
        for lps in GRIDS[name]:
            if lps < 3:
                continue
            glad = report.mean("glad", lps)
            mv = report.mean("majority", lps)
            assert glad <= mv, f"{name}@{lps}: glad {glad:.4f} > majority {mv:.4f}"
    announce("3a", "GLAD mean error <= majority vote at every lps >= 3 on all datasets")


def test_criterion_03b_uncertainty_beats_entropy(reports):
    for name, report in reports.items():
        for lps in GRIDS[name]:
            if lps < 3:
                continue
            unc = report.mean("uncertainty-select", lps)
            ent = report.mean("entropy-select", lps)
            assert unc <= ent, f"{name}@{lps}: uncertainty {unc:.4f} > entropy {ent:.4f}"
    announce("3b", "uncertainty selection <= entropy selection at every lps >= 3")


def test_criterion_03c_entropy_near_worst(reports):
    for name in ("rte", "temp"):
        report = reports[name]
        for lps in (3, 5, 7):
            cells = sorted(report.mean(m, lps) for m in METHODS)
            ent = report.mean("entropy-select", lps)
            assert ent >= cells[-2], f"{name}@{lps}: entropy not in the worst two"
    announce("3c", "entropy selection is worst or second-worst at lps in {3,5,7} on rte and temp")


def test_criterion_03d_absolute_cells(reports):
    # Informational print against the published tables; binding only on real data.
    for name, report in reports.items():
        print(f"\n  {name}: computed vs published (errors %)")
        for method in METHODS:
            got = ", ".join(f"{v * 100:5.2f}" for v in _means(report, method))
            ref = ", ".join(f"{v:5.2f}" for v in PUBLISHED[name][method])
            print(f"    {method:22s} [{got}]  published [{ref}]")
    real_dir = os.environ.get("CROWDBENCH_REAL_DATA")
    if not real_dir:
        pytest.skip(
            "criterion 3d is manual: bundled fixtures are synthetic stand-ins "
            "(real datasets cannot be redistributed; see src/crowdbench/data/REAL_DATA.md). "
            "Set CROWDBENCH_REAL_DATA to a directory of real-data manifests to enable."
        )
    for name in GRIDS:
        manifest = Path(real_dir) / f"{name}_manifest.json"
        pool = load_manifest(manifest)
        cfg = ExperimentConfig(
            dataset=str(manifest), methods=METHODS, lps_grid=GRIDS[name],
            runs=20, base_seed=BASE_SEED,
        )
        report = run_experiment(cfg)
        for method in METHODS:
            for lps, ref in zip(GRIDS[name], PUBLISHED[name][method]):
                got = report.mean(method, lps) * 100
                assert abs(got - ref) <= 3.0, f"{name}/{method}@{lps}: {got:.2f} vs {ref:.2f}"
    announce("3d", "absolute cells within 3 points of the published tables on real data")


def test_criterion_04_vote_quality_shape():
    for big_l in range(0, 11):
        assert mv_quality(0.5, big_l) == pytest.approx(0.5, abs=1e-12)
    for p in (0.6, 0.7, 0.8, 0.9):
        qs = [mv_quality(p, big_l) for big_l in range(0, 11)]
        assert all(b > a for a, b in zip(qs, qs[1:]))
    for big_l in range(1, 6):
        gain_07 = mv_quality(0.7, big_l + 1) - mv_quality(0.7, big_l)
        gain_09 = mv_quality(0.9, big_l + 1) - mv_quality(0.9, big_l)
        assert gain_09 < gain_07
    announce("4", "vote quality fixed at 0.5, increasing in group size, gains shrink for strong workers")


def test_criterion_05_oracle_equivalences():
    # (i) weighted posterior equals exhaustive Bayes across the dimension sweep
    worst = 0.0
    for kind in ("accuracy", "sensspec", "confusion", "glad"):
        rng = np.random.default_rng(abs(hash(kind)) % 2**32)
        for n, r in product(range(1, 7), range(1, 5)):
            for _ in range(3):
                m = random_instance(rng, n, r)
                model = random_model(rng, kind, n, r)
                expected = exhaustive_bayes_posterior(m, model)
                got = weighted_posterior(m, model).posterior
                worst = max(worst, float(np.max(np.abs(got - expected))))
    assert worst < 1e-9
    # (ii) Dawid-Skene hard labels equal the grid-search ML oracle on the 3x4 instance
    dense = np.array([[1, 1, 1], [1, 1, -1], [-1, -1, 1], [-1, -1, -1]], dtype=np.int8)
    m = LabelMatrix.from_dense(dense)
    oracle = ds_grid_search_ml(m)
    _, est = dawid_skene_em(m)
    assert est.labels.tolist() == oracle.tolist()
    # (iii) spectral estimate matches a full decomposition on 50 random matrices
    rng = np.random.default_rng(42)
    worst_cos = 1.0
    for _ in range(50):
        mat = random_instance(rng, 20, 10, density=0.8)
        u1 = np.linalg.svd(mat.to_dense().astype(float))[0][:, 0]
        scores = spectral_estimate(mat, iters=20_000, seed=3).posterior - 0.5
        cos = abs(float(scores @ u1)) / (np.linalg.norm(scores) * np.linalg.norm(u1))
        worst_cos = min(worst_cos, cos)
    assert worst_cos >= 1 - 1e-8
    announce(
        "5",
        f"Bayes oracle max error {worst:.2e}, DS matches grid-search ML, "
        f"spectral cosine >= {worst_cos:.10f}",
    )


def test_criterion_06_em_health():
    rng = np.random.default_rng(99)
    slack = 1e-9
    for i in range(50):
        n = int(rng.integers(5, 25))
        r = int(rng.integers(2, 7))
        m = random_instance(rng, n, r, density=0.8)
        counts = np.bincount(m.samples, minlength=n)
        if counts.min() == 0:
            dense = m.to_dense()
            dense[counts == 0, 0] = 1
            m = LabelMatrix.from_dense(dense)
        ds_model, _ = dawid_skene_em(m, EmOptions(max_iter=80, tol=1e-7))
        bs_model, _ = bayes_sensspec_em(m, opts=EmOptions(max_iter=80, tol=1e-7))
        gl_model, _ = glad_em(m, EmOptions(max_iter=40, tol=1e-6))
        for model, tag in ((ds_model, "ds"), (bs_model, "bayes"), (gl_model, "glad")):
            hist = np.array(model.objective_history)
            if hist.size > 1:
                drop = float(np.min(np.diff(hist)))
                assert drop >= -slack, f"{tag} objective fell by {-drop:.3e} on instance {i}"
    # analytic GLAD gradient vs central differences
    rng = np.random.default_rng(12)
    dense = rng.choice([-1, 0, 1], size=(5, 4), p=[0.4, 0.2, 0.4]).astype(np.int8)
    dense[(dense != 0).sum(axis=1) == 0, 0] = 1
    m = LabelMatrix.from_dense(dense)
    weight = rng.uniform(0.05, 0.95, size=m.n_entries)
    ability = rng.normal(0.5, 1.0, 4)
    log_inv = rng.normal(0.0, 0.5, 5)
    _, g_a, g_b = _glad_q_and_grads(m.samples, m.workers, weight, ability, log_inv, 5, 4)
    h = 1e-6
    worst_rel = 0.0

    def q_at(ab, lb):
        return _glad_q_and_grads(m.samples, m.workers, weight, ab, lb, 5, 4, want_grads=False)[0]

    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        fd = (q_at(ability + e, log_inv) - q_at(ability - e, log_inv)) / (2 * h)
        worst_rel = max(worst_rel, abs(fd - g_a[j]) / max(abs(fd), abs(g_a[j]), 1e-8))
    for i in range(5):
        e = np.zeros(5)
        e[i] = h
        fd = (q_at(ability, log_inv + e) - q_at(ability, log_inv - e)) / (2 * h)
        worst_rel = max(worst_rel, abs(fd - g_b[i]) / max(abs(fd), abs(g_b[i]), 1e-8))
    assert worst_rel < 1e-4
    announce(
        "6",
        f"objectives nondecreasing within 1e-9 on 50 instances; gradient check rel err {worst_rel:.2e}",
    )


def test_criterion_07_sfilter_tracking():
    rng = np.random.default_rng(21)
    static = sfilter_track(model_stream(rng, 0.9, 200), SFilterConfig(sigma=0.02))
    static_gap = abs(float(static.means[-1]) - 0.9)
    assert static_gap < 0.1
    rng = np.random.default_rng(22)
    traj = np.linspace(0.6, 0.95, 300)
    drift = sfilter_track(model_stream(rng, traj, 300), SFilterConfig(sigma=0.02))
    drift_gap = float(np.max(np.abs(drift.means[50:] - traj[50:])))
    assert drift_gap < 0.15
    rng = np.random.default_rng(11)
    stream = model_stream(rng, 0.85, 50)
    grid = sfilter_track(stream, SFilterConfig(sigma=0.02))
    part = sfilter_track(
        stream, SFilterConfig(sigma=0.02, mode="particle", particles=10_000, seed=4)
    )
    mean_gap = float(np.mean(np.abs(grid.means - part.means)))
    assert mean_gap <= 0.02
    announce(
        "7",
        f"static gap {static_gap:.3f} < 0.1, drift gap {drift_gap:.3f} < 0.15, "
        f"particle/grid mean gap {mean_gap:.4f} <= 0.02",
    )


def test_criterion_08_entropy_bias_on_rte():
    pool = fixture_pool("rte")
    budget = 3 * pool.n_samples
    ent_trace, _ = adaptive_replay(pool, budget, selector="entropy", seed=BASE_SEED)
    uni_trace, _ = adaptive_replay(pool, budget, selector="uniform", seed=BASE_SEED)
    ent_counts = np.bincount(ent_trace.samples, minlength=pool.n_samples)
    uni_counts = np.bincount(uni_trace.samples, minlength=pool.n_samples)
    var_ent, var_uni = float(np.var(ent_counts)), float(np.var(uni_counts))
    starved = float(np.mean(ent_counts <= 1))
    assert var_ent > var_uni
    assert starved >= 0.10
    announce(
        "8",
        f"entropy count variance {var_ent:.2f} > uniform {var_uni:.2f}; "
        f"{starved * 100:.1f}% of samples kept <= 1 label",
    )


def test_criterion_09_combining_not_uniformly_better(reports):
    for name, report in reports.items():
        gaps = {
            lps: report.mean("accuracy+uncertainty", lps) - report.mean("accuracy", lps)
            for lps in GRIDS[name]
        }
        worse_cells = [lps for lps, g in gaps.items() if g > 0]
        assert worse_cells, f"{name}: combined never worse than accuracy alone ({gaps})"
    announce(
        "9",
        "model-based selection plus accuracy modeling is worse than accuracy alone "
        "on at least one lps cell per dataset",
    )


def test_criterion_10_byte_identical_reports(reports):
    for name, report in reports.items():
        rerun = run_experiment(grid_config(name))
        for fmt in ("json", "csv", "markdown-table", "plot-data"):
            assert render_report(rerun, fmt) == render_report(report, fmt), (
                f"{name}: {fmt} rendering changed between reruns"
            )
    announce("10", "full bench suite rerun reproduced every report byte for byte")
