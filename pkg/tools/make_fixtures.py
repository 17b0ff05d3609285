#!/usr/bin/env python3
"""Regenerate the bundled fixture datasets.

Each fixture is a synthetic stand-in whose sample/worker/label counts match
the reference dataset shapes exactly (the real MTurk datasets cannot be
bundled; see data/REAL_DATA.md).  Responses follow the logistic
ability x inverse-difficulty observation model with fixed worker tiers
(spammers, average workers, experts).  The duchenne stand-in additionally
marks a subset of items as deceptive: the crowd consistently perceives the
flipped label, which reproduces that dataset's high error floor while
keeping worker quality learnable.

Run from the repository root:

    python3 tools/make_fixtures.py [--out src/crowdbench/data]
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from crowdbench.labels import GoldStandards, LabelPool, save_pool_csv


def tiered(rng, tiers):
    """Concatenate per-tier normal draws, then shuffle: (count, mean, sd)."""
    values = np.concatenate([rng.normal(mu, sd, count) for count, mu, sd in tiers])
    return values[rng.permutation(values.size)]


def tiered_lognormal(rng, tiers):
    values = np.concatenate(
        [rng.lognormal(mu, sd, count) for count, mu, sd in tiers]
    )
    return values[rng.permutation(values.size)]


def generate(
    name: str,
    n_samples: int,
    n_workers: int,
    sizes: np.ndarray,
    worker_tiers,
    item_tiers,
    seed: int,
    deceptive_count: int = 0,
    positive_prior: float = 0.5,
) -> LabelPool:
    rng = np.random.default_rng(seed)
    gold = np.where(rng.uniform(size=n_samples) < positive_prior, 1, -1).astype(np.int8)
    ability = tiered(rng, worker_tiers)
    inv_diff = tiered_lognormal(rng, item_tiers)
    perceived = gold.copy()
    if deceptive_count:
        flip = rng.permutation(n_samples)[:deceptive_count]
        perceived[flip] = -perceived[flip]
    workers_by, labels_by = [], []
    for i in range(n_samples):
        ws = rng.choice(n_workers, size=int(sizes[i]), replace=False)
        p_agree = 1.0 / (1.0 + np.exp(-ability[ws] * inv_diff[i]))
        agree = rng.uniform(size=ws.size) < p_agree
        labels_by.append(np.where(agree, perceived[i], -perceived[i]).astype(np.int8))
        workers_by.append(ws.astype(np.int64))
    return LabelPool(
        name=name,
        sample_ids=tuple(f"{name}-{i:04d}" for i in range(n_samples)),
        worker_ids=tuple(f"{name}-u{j:03d}" for j in range(n_workers)),
        workers_by_sample=tuple(workers_by),
        labels_by_sample=tuple(labels_by),
        gold=GoldStandards(gold),
    )


def duchenne_sizes(rng, n=159, total=1950, lo=8, hi=15) -> np.ndarray:
    sizes = rng.integers(lo, hi + 1, size=n)
    while sizes.sum() != total:
        i = int(rng.integers(n))
        if sizes.sum() < total and sizes[i] < hi:
            sizes[i] += 1
        elif sizes.sum() > total and sizes[i] > lo:
            sizes[i] -= 1
    return sizes


def build_all():
    pools = {}
    pools["rte"] = generate(
        "rte",
        n_samples=800,
        n_workers=164,
        sizes=np.full(800, 10),
        worker_tiers=[(49, 0.05, 0.04), (74, 1.05, 0.30), (41, 2.60, 0.50)],
        item_tiers=[(120, -2.60, 0.50), (680, 0.65, 0.45)],
        seed=101,
    )
    pools["temp"] = generate(
        "temp",
        n_samples=462,
        n_workers=76,
        sizes=np.full(462, 10),
        worker_tiers=[(32, 0.04, 0.03), (27, 1.55, 0.40), (17, 3.20, 0.50)],
        item_tiers=[(56, -2.80, 0.50), (406, 0.70, 0.40)],
        seed=202,
    )
    size_rng = np.random.default_rng(7)
    pools["duchenne"] = generate(
        "duchenne",
        n_samples=159,
        n_workers=17,
        sizes=duchenne_sizes(size_rng),
        worker_tiers=[(6, 0.02, 0.02), (5, 1.20, 0.20), (6, 2.80, 0.35)],
        item_tiers=[(19, -2.80, 0.40), (55, -0.50, 0.30), (85, 0.75, 0.30)],
        deceptive_count=38,
        seed=303,
    )
    return pools


NOTES = {
    "rte": "textual-entailment shape: 800 samples x 164 workers, 8000 labels",
    "temp": "temporal-ordering shape: 462 samples x 76 workers, 4620 labels",
    "duchenne": "smile-classification shape: 159 samples x 17 workers, 1950 labels (8-15 per sample)",
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="src/crowdbench/data")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, pool in build_all().items():
        labels_path = out / f"{name}_labels.csv"
        gold_path = out / f"{name}_gold.csv"
        save_pool_csv(pool, labels_path, gold_path)
        manifest = {
            "name": name,
            "format": "triples-csv",
            "labels": labels_path.name,
            "gold": gold_path.name,
            "synthetic": True,
            "notes": NOTES[name],
            "generator": "tools/make_fixtures.py",
        }
        (out / f"{name}_manifest.json").write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
        print(
            f"{name}: {pool.n_samples} samples, {pool.n_workers} workers, "
            f"{pool.total_labels} labels -> {labels_path}"
        )


if __name__ == "__main__":
    main()
