import json

import numpy as np
import pytest

from crowdbench.errors import CoverageError, DataFormatError, DomainError
from crowdbench.labels import (
    EstimateSet,
    GoldStandards,
    LabelMatrix,
    LabelPool,
    SynthConfig,
    load_manifest,
    load_pool,
    save_pool_csv,
    score,
    subsample,
    synth_generate,
)


def small_pool():
    return LabelPool(
        name="tiny",
        sample_ids=("a", "b", "c"),
        worker_ids=("u", "v", "w"),
        workers_by_sample=(
            np.array([0, 1, 2]),
            np.array([0, 2]),
            np.array([], dtype=np.int64),
        ),
        labels_by_sample=(
            np.array([1, 1, -1], dtype=np.int8),
            np.array([-1, -1], dtype=np.int8),
            np.array([], dtype=np.int8),
        ),
        gold=GoldStandards(np.array([1, -1, 0], dtype=np.int8)),
    )


class TestLabelMatrix:
    def test_counts(self):
        m = small_pool().flatten()
        r, r_plus = m.counts()
        assert r.tolist() == [3, 2, 0]
        assert r_plus.tolist() == [2, 0, 0]
        assert m.n_entries == 5

    def test_duplicate_entry_rejected(self):
        with pytest.raises(DomainError):
            LabelMatrix(2, 2, [0, 0], [1, 1], [1, -1])

    def test_out_of_range_rejected(self):
        with pytest.raises(DomainError):
            LabelMatrix(2, 2, [0, 2], [1, 1], [1, -1])
        with pytest.raises(DomainError):
            LabelMatrix(2, 2, [0], [0], [2])

    def test_dense_round_trip(self):
        m = small_pool().flatten()
        again = LabelMatrix.from_dense(m.to_dense())
        assert np.array_equal(again.to_dense(), m.to_dense())

    def test_immutable(self):
        m = small_pool().flatten()
        with pytest.raises(ValueError):
            m.labels[0] = -1


class TestEstimateSet:
    def test_tie_goes_positive(self):
        est = EstimateSet.from_posterior([0.5, 0.2, 0.8])
        assert est.labels.tolist() == [1, -1, 1]
        assert est.uncertainty.tolist() == [0.5, 0.2, pytest.approx(0.2)]

    def test_inconsistent_labels_rejected(self):
        with pytest.raises(DomainError):
            EstimateSet(np.array([0.9]), np.array([-1], dtype=np.int8), np.array([0.1]))

    def test_posterior_range_enforced(self):
        with pytest.raises(DomainError):
            EstimateSet.from_posterior([1.2])

    def test_csv_round_shape(self, tmp_path):
        est = EstimateSet.from_posterior([0.5, 0.25])
        out = tmp_path / "est.csv"
        est.to_csv(out, sample_ids=["x", "y"])
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "sample,posterior,label,uncertainty"
        assert len(lines) == 3
        assert lines[1].startswith("x,0.5,1,")


class TestLoadPool:
    def write_csv(self, tmp_path, text, name="pool.csv"):
        p = tmp_path / name
        p.write_text(text)
        return p

    def test_round_trip_with_gold(self, tmp_path):
        pool = small_pool()
        lp, gp = tmp_path / "labels.csv", tmp_path / "gold.csv"
        save_pool_csv(pool, lp, gp)
        back = load_pool(lp, gold_path=gp)
        assert back.sample_ids == pool.sample_ids[:2]  # sample "c" has no rows
        assert back.n_workers == 3
        assert back.total_labels == 5
        assert back.gold.labels.tolist() == [1, -1]

    def test_counts_and_order(self, tmp_path):
        p = self.write_csv(tmp_path, "sample,worker,label\ns1,w1,1\ns1,w2,-1\ns2,w1,1\n")
        pool = load_pool(p)
        assert pool.n_samples == 2
        assert pool.n_workers == 2
        assert pool.total_labels == 3
        assert pool.labels_by_sample[0].tolist() == [1, -1]

    def test_empty_file_rejected(self, tmp_path):
        p = self.write_csv(tmp_path, "")
        with pytest.raises(DataFormatError, match="empty"):
            load_pool(p)

    def test_header_only_rejected(self, tmp_path):
        p = self.write_csv(tmp_path, "sample,worker,label\n")
        with pytest.raises(DataFormatError, match="empty pool"):
            load_pool(p)

    def test_duplicate_pair_rejected(self, tmp_path):
        p = self.write_csv(tmp_path, "sample,worker,label\ns1,w1,1\ns1,w1,-1\n")
        with pytest.raises(DataFormatError, match=r":3: duplicate pair"):
            load_pool(p)

    def test_unknown_token_names_line(self, tmp_path):
        p = self.write_csv(tmp_path, "sample,worker,label\ns1,w1,1\ns2,w1,bogus\n")
        with pytest.raises(DataFormatError, match=r":3"):
            load_pool(p)

    def test_label_map_remaps_native_encoding(self, tmp_path):
        p = self.write_csv(tmp_path, "sample,worker,label\ns1,w1,0\ns1,w2,1\n")
        pool = load_pool(p, label_map={"0": -1, "1": 1})
        assert pool.labels_by_sample[0].tolist() == [-1, 1]

    def test_json_format(self, tmp_path):
        payload = {
            "name": "jpool",
            "samples": [
                {"id": "a", "gold": 1, "labels": [{"worker": "u", "label": 1}]},
                {"id": "b", "labels": []},
            ],
        }
        p = tmp_path / "pool.json"
        p.write_text(json.dumps(payload))
        pool = load_pool(p, format="json")
        assert pool.name == "jpool"
        assert pool.n_samples == 2
        assert pool.pool_sizes.tolist() == [1, 0]
        assert pool.gold.labels.tolist() == [1, 0]

    def test_manifest(self, tmp_path):
        (tmp_path / "labels.csv").write_text("sample,worker,label\ns1,w1,0\ns1,w2,1\n")
        (tmp_path / "gold.csv").write_text("sample,label\ns1,1\n")
        manifest = {
            "name": "native",
            "format": "triples-csv",
            "labels": "labels.csv",
            "gold": "gold.csv",
            "label_map": {"0": -1, "1": 1},
        }
        mp = tmp_path / "m.json"
        mp.write_text(json.dumps(manifest))
        pool = load_manifest(mp)
        assert pool.name == "native"
        assert pool.labels_by_sample[0].tolist() == [-1, 1]
        assert pool.gold.labels.tolist() == [1]

    def test_gold_for_unknown_sample_rejected(self, tmp_path):
        p = self.write_csv(tmp_path, "sample,worker,label\ns1,w1,1\n")
        g = self.write_csv(tmp_path, "sample,label\nsX,1\n", name="gold.csv")
        with pytest.raises(DataFormatError, match="unknown sample"):
            load_pool(p, gold_path=g)


class TestSubsample:
    def test_identity_at_large_lps(self):
        pool = small_pool()
        m = subsample(pool, lps=10, seed=0)
        assert np.array_equal(np.sort(m.to_dense(), axis=None), np.sort(pool.flatten().to_dense(), axis=None))
        assert m.n_entries == pool.total_labels

    def test_one_label_per_nonempty_sample(self):
        m = subsample(small_pool(), lps=1, seed=3)
        r, _ = m.counts()
        assert r.tolist() == [1, 1, 0]

    def test_deterministic(self):
        pool, _ = synth_generate(SynthConfig(30, 8, labels_per_sample=6, seed=11))
        a = subsample(pool, 3, seed=42)
        b = subsample(pool, 3, seed=42)
        assert np.array_equal(a.samples, b.samples)
        assert np.array_equal(a.workers, b.workers)
        assert np.array_equal(a.labels, b.labels)
        c = subsample(pool, 3, seed=43)
        assert not np.array_equal(a.workers, c.workers)

    def test_subset_of_pool(self):
        pool, _ = synth_generate(SynthConfig(25, 9, labels_per_sample=5, seed=2))
        full = pool.flatten().to_dense()
        for lps in (1, 2, 4, 5):
            sub = subsample(pool, lps, seed=7).to_dense()
            mask = sub != 0
            assert np.array_equal(sub[mask], full[mask])

    def test_counts_formula(self):
        pool = small_pool()
        for lps in (1, 2, 3, 4):
            m = subsample(pool, lps, seed=1)
            expected = int(np.minimum(lps, pool.pool_sizes).sum())
            assert m.n_entries == expected

    def test_bad_lps(self):
        with pytest.raises(DomainError):
            subsample(small_pool(), 0, seed=0)


class TestSynthGenerate:
    def test_perfect_workers_match_gold(self):
        cfg = SynthConfig(50, 6, family="accuracy", params={"accuracy": 1.0}, labels_per_sample=4, seed=5)
        pool, gold = synth_generate(cfg)
        for i in range(pool.n_samples):
            assert (pool.labels_by_sample[i] == gold.labels[i]).all()

    def test_coin_flip_workers_agree_half_the_time(self):
        cfg = SynthConfig(2500, 5, family="accuracy", params={"accuracy": 0.5}, labels_per_sample=4, seed=9)
        pool, gold = synth_generate(cfg)
        m = pool.flatten()
        agree = np.mean(m.labels == gold.labels[m.samples])
        assert pool.total_labels == 10_000
        assert 0.45 <= agree <= 0.55

    def test_degenerate_prior(self):
        cfg = SynthConfig(40, 5, positive_prior=1.0, labels_per_sample=2, seed=1)
        _, gold = synth_generate(cfg)
        assert (gold.labels == 1).all()

    def test_budget_exact(self):
        lps = [1, 2, 3, 4, 5]
        cfg = SynthConfig(5, 6, labels_per_sample=lps, seed=4)
        pool, _ = synth_generate(cfg)
        assert pool.pool_sizes.tolist() == lps

    def test_deterministic(self):
        cfg = SynthConfig(20, 7, labels_per_sample=3, seed=77)
        p1, _ = synth_generate(cfg)
        p2, _ = synth_generate(cfg)
        assert all(
            np.array_equal(a, b)
            for a, b in zip(p1.labels_by_sample, p2.labels_by_sample)
        )

    def test_glad_family_runs(self):
        cfg = SynthConfig(30, 8, family="glad", labels_per_sample=5, seed=3)
        pool, gold = synth_generate(cfg)
        assert pool.total_labels == 150

    def test_invalid_distribution(self):
        cfg = SynthConfig(10, 4, family="accuracy", params={"accuracy": 1.5}, seed=0)
        with pytest.raises(DomainError):
            synth_generate(cfg)


class TestScore:
    def test_perfect_and_flipped(self):
        gold = GoldStandards(np.array([1, -1, 1, -1], dtype=np.int8))
        perfect = EstimateSet.from_posterior([0.9, 0.1, 0.8, 0.2])
        flipped = EstimateSet.from_posterior([0.1, 0.9, 0.2, 0.8])
        assert score(perfect, gold) == 0.0
        assert score(flipped, gold) == 1.0

    def test_half(self):
        gold = GoldStandards(np.array([1, 1, -1, -1], dtype=np.int8))
        est = EstimateSet.from_posterior([0.9, 0.1, 0.9, 0.1])
        assert score(est, gold) == 0.5

    def test_ignores_unlabeled(self):
        gold = GoldStandards(np.array([1, 0], dtype=np.int8))
        est = EstimateSet.from_posterior([0.9, 0.1])
        assert score(est, gold) == 0.0

    def test_coverage_error(self):
        gold = GoldStandards(np.array([1, -1, 1], dtype=np.int8))
        est = EstimateSet.from_posterior([0.9, 0.1])
        with pytest.raises(CoverageError):
            score(est, gold)


class TestEstimateJson:
    def test_json_objects(self):
        est = EstimateSet.from_posterior([0.75, 0.5])
        objs = est.to_json_obj(sample_ids=["a", "b"])
        assert objs[0] == {"sample": "a", "posterior": 0.75, "label": 1, "uncertainty": 0.25}
        assert objs[1]["label"] == 1
