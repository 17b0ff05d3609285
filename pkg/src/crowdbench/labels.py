"""Canonical data model: response matrices, pools, estimates, synthesis, scoring.

Conventions
-----------
Labels are binary and stored as ``-1``/``+1``; an absent (sample, worker)
pair means "no response" and is represented by sparsity (or 0 in dense
views).  Sample and worker identifiers are arbitrary strings mapped to
dense indices at load time; the mapping is kept on the pool so outputs can
be written back with the original ids.

All containers are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import CoverageError, DataFormatError, DomainError

_VALID_LABELS = (-1, 1)
DEFAULT_LABEL_MAP = {"-1": -1, "1": 1, "+1": 1}

FIXTURE_NAMES = ("rte", "temp", "duchenne")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LabelMatrix:
    """Sparse N x R response matrix over {-1, +1}; absent pair means 0."""

    n_samples: int
    n_workers: int
    samples: np.ndarray
    workers: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        if self.n_samples < 0 or self.n_workers < 0:
            raise DomainError("matrix dimensions must be nonnegative")
        s = np.asarray(self.samples, dtype=np.int64)
        w = np.asarray(self.workers, dtype=np.int64)
        v = np.asarray(self.labels, dtype=np.int8)
        if not (s.shape == w.shape == v.shape) or s.ndim != 1:
            raise DomainError("entry arrays must be 1-d and equally long")
        if s.size:
            if s.min() < 0 or s.max() >= self.n_samples:
                raise DomainError("sample index out of range")
            if w.min() < 0 or w.max() >= self.n_workers:
                raise DomainError("worker index out of range")
            if not np.isin(v, _VALID_LABELS).all():
                raise DomainError("labels must be -1 or +1")
            key = s * max(self.n_workers, 1) + w
            if np.unique(key).size != key.size:
                raise DomainError("duplicate (sample, worker) entry")
        object.__setattr__(self, "samples", _readonly(s))
        object.__setattr__(self, "workers", _readonly(w))
        object.__setattr__(self, "labels", _readonly(v))

    @property
    def n_entries(self) -> int:
        return int(self.samples.size)

    def counts(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-sample response count r_i and positive count r_i+."""
        r = np.bincount(self.samples, minlength=self.n_samples)
        r_plus = np.bincount(
            self.samples, weights=(self.labels > 0).astype(float), minlength=self.n_samples
        )
        return r.astype(np.int64), r_plus.astype(np.int64)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n_samples, self.n_workers), dtype=np.int8)
        dense[self.samples, self.workers] = self.labels
        return dense

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "LabelMatrix":
        dense = np.asarray(dense)
        s, w = np.nonzero(dense)
        return cls(dense.shape[0], dense.shape[1], s, w, dense[s, w])

    def flipped(self) -> "LabelMatrix":
        return LabelMatrix(
            self.n_samples, self.n_workers, self.samples, self.workers, -self.labels
        )


@dataclass(frozen=True)
class GoldStandards:
    """Per-sample true labels in {-1, +1}; 0 marks samples without gold."""

    labels: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.labels, dtype=np.int8)
        if v.ndim != 1:
            raise DomainError("gold labels must be a 1-d array")
        if not np.isin(v, (-1, 0, 1)).all():
            raise DomainError("gold labels must be -1, +1, or 0 (unknown)")
        object.__setattr__(self, "labels", _readonly(v))

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def labeled_mask(self) -> np.ndarray:
        return self.labels != 0

    @property
    def n_labeled(self) -> int:
        return int(np.count_nonzero(self.labels))


@dataclass(frozen=True)
class LabelPool:
    """Full recorded dataset: every collected label per sample, in arrival order."""

    name: str
    sample_ids: tuple[str, ...]
    worker_ids: tuple[str, ...]
    workers_by_sample: tuple[np.ndarray, ...]
    labels_by_sample: tuple[np.ndarray, ...]
    gold: GoldStandards

    def __post_init__(self) -> None:
        n = len(self.sample_ids)
        if len(self.workers_by_sample) != n or len(self.labels_by_sample) != n:
            raise DomainError("per-sample arrays must match the sample count")
        if self.gold.n != n:
            raise DomainError("gold vector length must equal the sample count")
        ws = tuple(_readonly(np.asarray(w, dtype=np.int64)) for w in self.workers_by_sample)
        ls = tuple(_readonly(np.asarray(l, dtype=np.int8)) for l in self.labels_by_sample)
        for w, l in zip(ws, ls):
            if w.shape != l.shape:
                raise DomainError("worker and label arrays must align per sample")
        object.__setattr__(self, "workers_by_sample", ws)
        object.__setattr__(self, "labels_by_sample", ls)
        # flattening must give a valid LabelMatrix (validates index ranges, dupes)
        self.flatten()

    @property
    def n_samples(self) -> int:
        return len(self.sample_ids)

    @property
    def n_workers(self) -> int:
        return len(self.worker_ids)

    @property
    def pool_sizes(self) -> np.ndarray:
        return np.array([len(w) for w in self.workers_by_sample], dtype=np.int64)

    @property
    def total_labels(self) -> int:
        return int(self.pool_sizes.sum())

    def flatten(self) -> LabelMatrix:
        if self.n_samples == 0:
            return LabelMatrix(0, self.n_workers, [], [], [])
        s = np.repeat(np.arange(self.n_samples), self.pool_sizes)
        w = np.concatenate([*self.workers_by_sample]) if self.total_labels else np.array([], dtype=np.int64)
        l = np.concatenate([*self.labels_by_sample]) if self.total_labels else np.array([], dtype=np.int8)
        return LabelMatrix(self.n_samples, self.n_workers, s, w, l)


@dataclass(frozen=True)
class EstimateSet:
    """Per-sample posterior P(y=+1), hard label, and uncertainty.

    The hard label is +1 exactly when the posterior is >= 0.5 (ties go to
    +1 everywhere in this package) and the uncertainty is
    min(posterior, 1 - posterior).
    """

    posterior: np.ndarray
    labels: np.ndarray
    uncertainty: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.posterior, dtype=np.float64)
        if p.ndim != 1 or not np.isfinite(p).all() or (p < 0).any() or (p > 1).any():
            raise DomainError("posterior must be finite values in [0, 1]")
        hard = np.where(p >= 0.5, 1, -1).astype(np.int8)
        if not np.array_equal(np.asarray(self.labels, dtype=np.int8), hard):
            raise DomainError("hard labels inconsistent with posterior tie rule")
        uc = np.minimum(p, 1.0 - p)
        if not np.allclose(np.asarray(self.uncertainty, dtype=np.float64), uc, atol=1e-12):
            raise DomainError("uncertainty must equal min(posterior, 1 - posterior)")
        object.__setattr__(self, "posterior", _readonly(p))
        object.__setattr__(self, "labels", _readonly(hard))
        object.__setattr__(self, "uncertainty", _readonly(uc))

    @classmethod
    def from_posterior(cls, posterior: np.ndarray | Sequence[float]) -> "EstimateSet":
        p = np.asarray(posterior, dtype=np.float64)
        return cls(p, np.where(p >= 0.5, 1, -1), np.minimum(p, 1.0 - p))

    @property
    def n(self) -> int:
        return int(self.posterior.size)

    def to_csv(self, path: str | Path, sample_ids: Sequence[str] | None = None) -> None:
        ids = sample_ids if sample_ids is not None else [str(i) for i in range(self.n)]
        if len(ids) != self.n:
            raise DomainError("sample_ids length must match the estimate count")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["sample", "posterior", "label", "uncertainty"])
            for i in range(self.n):
                writer.writerow(
                    [ids[i], repr(float(self.posterior[i])), int(self.labels[i]), repr(float(self.uncertainty[i]))]
                )

    def to_json_obj(self, sample_ids: Sequence[str] | None = None) -> list[dict]:
        ids = sample_ids if sample_ids is not None else [str(i) for i in range(self.n)]
        return [
            {
                "sample": ids[i],
                "posterior": float(self.posterior[i]),
                "label": int(self.labels[i]),
                "uncertainty": float(self.uncertainty[i]),
            }
            for i in range(self.n)
        ]


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def _normalize_label(token: str, label_map: Mapping[str, int], where: str) -> int:
    token = token.strip()
    if token not in label_map:
        raise DataFormatError(f"unknown label token {token!r} at {where}")
    value = label_map[token]
    if value not in _VALID_LABELS:
        raise DataFormatError(f"label map sends {token!r} to {value}, expected -1 or +1")
    return value


def _load_triples_csv(
    path: Path, label_map: Mapping[str, int]
) -> tuple[list[str], list[str], dict[str, list[tuple[int, int]]]]:
    samples: list[str] = []
    workers: list[str] = []
    sample_index: dict[str, int] = {}
    worker_index: dict[str, int] = {}
    rows: dict[str, list[tuple[int, int]]] = {}
    seen_pairs: set[tuple[str, str]] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty pool (no header)") from None
        if [h.strip().lower() for h in header] != ["sample", "worker", "label"]:
            raise DataFormatError(f"{path}:1: expected header 'sample,worker,label'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise DataFormatError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            sid, wid, tok = row[0].strip(), row[1].strip(), row[2]
            if not sid or not wid:
                raise DataFormatError(f"{path}:{lineno}: empty sample or worker id")
            if (sid, wid) in seen_pairs:
                raise DataFormatError(f"{path}:{lineno}: duplicate pair ({sid}, {wid})")
            seen_pairs.add((sid, wid))
            value = _normalize_label(tok, label_map, f"{path}:{lineno}")
            if sid not in sample_index:
                sample_index[sid] = len(samples)
                samples.append(sid)
                rows[sid] = []
            if wid not in worker_index:
                worker_index[wid] = len(workers)
                workers.append(wid)
            rows[sid].append((worker_index[wid], value))
    if not samples:
        raise DataFormatError(f"{path}: empty pool (no data rows)")
    return samples, workers, rows


def _load_gold_csv(path: Path, label_map: Mapping[str, int]) -> dict[str, int]:
    gold: dict[str, int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty gold file") from None
        if [h.strip().lower() for h in header] != ["sample", "label"]:
            raise DataFormatError(f"{path}:1: expected header 'sample,label'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise DataFormatError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            sid = row[0].strip()
            if sid in gold:
                raise DataFormatError(f"{path}:{lineno}: duplicate gold entry for {sid!r}")
            gold[sid] = _normalize_label(row[1], label_map, f"{path}:{lineno}")
    return gold


def load_pool(
    path: str | Path,
    format: str = "triples-csv",
    gold_path: str | Path | None = None,
    label_map: Mapping[str, int] | None = None,
    name: str | None = None,
) -> LabelPool:
    """Load a recorded dataset from disk.

    ``triples-csv`` expects a header-bearing CSV ``sample,worker,label``
    with an optional sidecar gold CSV ``sample,label``; ``json`` expects an
    object with a ``samples`` array of ``{id, gold?, labels:[{worker,label}]}``.
    Dataset-native label encodings are remapped through ``label_map``.
    """
    path = Path(path)
    lm = dict(DEFAULT_LABEL_MAP if label_map is None else label_map)
    if format == "triples-csv":
        sample_ids, worker_ids, rows = _load_triples_csv(path, lm)
        gold_by_id = _load_gold_csv(Path(gold_path), lm) if gold_path else {}
    elif format == "json":
        with open(path, encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{path}: invalid JSON ({exc})") from exc
        entries = obj.get("samples")
        if not isinstance(entries, list) or not entries:
            raise DataFormatError(f"{path}: empty pool ('samples' missing or empty)")
        sample_ids, worker_ids, rows, gold_by_id = [], [], {}, {}
        worker_index: dict[str, int] = {}
        for k, item in enumerate(entries):
            sid = str(item.get("id", k))
            if sid in rows:
                raise DataFormatError(f"{path}: duplicate sample id {sid!r}")
            sample_ids.append(sid)
            rows[sid] = []
            if "gold" in item and item["gold"] is not None:
                gold_by_id[sid] = _normalize_label(str(item["gold"]), lm, f"{path}#{sid}")
            seen = set()
            for rec in item.get("labels", []):
                wid = str(rec["worker"])
                if wid in seen:
                    raise DataFormatError(f"{path}#{sid}: duplicate pair ({sid}, {wid})")
                seen.add(wid)
                if wid not in worker_index:
                    worker_index[wid] = len(worker_ids)
                    worker_ids.append(wid)
                value = _normalize_label(str(rec["label"]), lm, f"{path}#{sid}")
                rows[sid].append((worker_index[wid], value))
        if name is None:
            name = obj.get("name")
    else:
        raise DomainError(f"unknown pool format {format!r}")

    unknown_gold = set(gold_by_id) - set(sample_ids)
    if unknown_gold:
        raise DataFormatError(f"gold references unknown sample ids: {sorted(unknown_gold)[:5]}")
    gold = np.zeros(len(sample_ids), dtype=np.int8)
    for i, sid in enumerate(sample_ids):
        gold[i] = gold_by_id.get(sid, 0)
    return LabelPool(
        name=name or path.stem,
        sample_ids=tuple(sample_ids),
        worker_ids=tuple(worker_ids),
        workers_by_sample=tuple(
            np.array([w for w, _ in rows[sid]], dtype=np.int64) for sid in sample_ids
        ),
        labels_by_sample=tuple(
            np.array([v for _, v in rows[sid]], dtype=np.int8) for sid in sample_ids
        ),
        gold=GoldStandards(gold),
    )


def load_manifest(path: str | Path) -> LabelPool:
    """Load a pool described by a small JSON manifest.

    Keys: ``name``, ``format``, ``labels`` (path), optional ``gold`` (path)
    and ``label_map``; relative paths resolve against the manifest location.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        m = json.load(fh)
    base = path.parent
    label_map = m.get("label_map")
    return load_pool(
        base / m["labels"],
        format=m.get("format", "triples-csv"),
        gold_path=(base / m["gold"]) if m.get("gold") else None,
        label_map={str(k): int(v) for k, v in label_map.items()} if label_map else None,
        name=m.get("name"),
    )


def fixture_pool(name: str) -> LabelPool:
    """Load one of the bundled fixture datasets: rte, temp, or duchenne."""
    if name not in FIXTURE_NAMES:
        raise DomainError(f"unknown fixture {name!r}; available: {FIXTURE_NAMES}")
    data_dir = resources.files("crowdbench").joinpath("data")
    with resources.as_file(data_dir.joinpath(f"{name}_manifest.json")) as p:
        return load_manifest(p)


def save_pool_csv(pool: LabelPool, labels_path: str | Path, gold_path: str | Path | None) -> None:
    """Write a pool in the canonical triples-csv layout (plus gold sidecar)."""
    with open(labels_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample", "worker", "label"])
        for i, sid in enumerate(pool.sample_ids):
            for w, v in zip(pool.workers_by_sample[i], pool.labels_by_sample[i]):
                writer.writerow([sid, pool.worker_ids[int(w)], int(v)])
    if gold_path is not None:
        with open(gold_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["sample", "label"])
            for i, sid in enumerate(pool.sample_ids):
                g = int(pool.gold.labels[i])
                if g != 0:
                    writer.writerow([sid, g])


# ---------------------------------------------------------------------------
# Subsampling and synthesis
# ---------------------------------------------------------------------------


def subsample(pool: LabelPool, lps: int, seed: int) -> LabelMatrix:
    """Draw min(lps, available) labels per sample uniformly without replacement.

    Deterministic for a given seed: samples are visited in index order with
    a single generator.
    """
    if not isinstance(lps, int) or lps < 1:
        raise DomainError(f"lps must be a positive integer, got {lps!r}")
    rng = np.random.default_rng(seed)
    s_out: list[np.ndarray] = []
    w_out: list[np.ndarray] = []
    l_out: list[np.ndarray] = []
    for i in range(pool.n_samples):
        size = len(pool.workers_by_sample[i])
        k = min(lps, size)
        pick = rng.permutation(size)[:k]
        s_out.append(np.full(k, i, dtype=np.int64))
        w_out.append(pool.workers_by_sample[i][pick])
        l_out.append(pool.labels_by_sample[i][pick])
    cat = lambda parts, dt: np.concatenate(parts) if parts else np.array([], dtype=dt)
    return LabelMatrix(
        pool.n_samples,
        pool.n_workers,
        cat(s_out, np.int64),
        cat(w_out, np.int64),
        cat(l_out, np.int8),
    )


def _sample_dist(rng: np.random.Generator, spec, size: int) -> np.ndarray:
    """Draw `size` values from a small distribution spec.

    Accepted forms: a constant float; ("uniform", lo, hi);
    ("normal", mean, sd); ("lognormal", mean_log, sd_log);
    ("mixture", (weight, spec), ...).
    """
    if isinstance(spec, (int, float)):
        return np.full(size, float(spec))
    if not isinstance(spec, (tuple, list)) or not spec:
        raise DomainError(f"bad distribution spec {spec!r}")
    kind = spec[0]
    if kind == "uniform":
        _, lo, hi = spec
        if not lo <= hi:
            raise DomainError(f"uniform bounds reversed: {spec!r}")
        return rng.uniform(lo, hi, size)
    if kind == "normal":
        _, mean, sd = spec
        if sd < 0:
            raise DomainError(f"normal sd must be nonnegative: {spec!r}")
        return rng.normal(mean, sd, size)
    if kind == "lognormal":
        _, mean_log, sd_log = spec
        if sd_log < 0:
            raise DomainError(f"lognormal sd must be nonnegative: {spec!r}")
        return rng.lognormal(mean_log, sd_log, size)
    if kind == "mixture":
        comps = spec[1:]
        weights = np.array([c[0] for c in comps], dtype=float)
        if (weights < 0).any() or weights.sum() <= 0:
            raise DomainError(f"mixture weights must be nonnegative: {spec!r}")
        weights = weights / weights.sum()
        choice = rng.choice(len(comps), size=size, p=weights)
        out = np.empty(size)
        for ci, (_, sub) in enumerate(comps):
            mask = choice == ci
            if mask.any():
                out[mask] = _sample_dist(rng, sub, int(mask.sum()))
        return out
    raise DomainError(f"unknown distribution kind {kind!r}")


@dataclass(frozen=True)
class SynthConfig:
    """Recipe for a synthetic pool: worker family, parameters, and budget."""

    n_samples: int
    n_workers: int
    family: str = "accuracy"  # accuracy | sensspec | glad
    positive_prior: float = 0.5
    labels_per_sample: int | Sequence[int] = 5
    params: Mapping[str, object] = field(default_factory=dict)
    seed: int = 0
    name: str = "synthetic"

    def __post_init__(self) -> None:
        if self.n_samples < 1 or self.n_workers < 1:
            raise DomainError("n_samples and n_workers must be positive")
        if not 0.0 <= self.positive_prior <= 1.0:
            raise DomainError("positive_prior must lie in [0, 1]")
        if self.family not in ("accuracy", "sensspec", "glad"):
            raise DomainError(f"unknown family {self.family!r}")


def _correct_probability(cfg: SynthConfig, rng: np.random.Generator, gold: np.ndarray):
    """Per-(sample, worker) probability that a response matches gold."""
    n, r = cfg.n_samples, cfg.n_workers
    p = dict(cfg.params)
    if cfg.family == "accuracy":
        acc = _sample_dist(rng, p.get("accuracy", ("uniform", 0.55, 0.95)), r)
        if (acc < 0).any() or (acc > 1).any():
            raise DomainError("accuracy distribution produced values outside [0, 1]")
        return lambda i, j: acc[j], {"accuracy": acc}
    if cfg.family == "sensspec":
        sens = _sample_dist(rng, p.get("sensitivity", ("uniform", 0.6, 0.95)), r)
        spec_ = _sample_dist(rng, p.get("specificity", ("uniform", 0.6, 0.95)), r)
        for arr, label in ((sens, "sensitivity"), (spec_, "specificity")):
            if (arr < 0).any() or (arr > 1).any():
                raise DomainError(f"{label} distribution produced values outside [0, 1]")
        return (
            lambda i, j: sens[j] if gold[i] > 0 else spec_[j],
            {"sensitivity": sens, "specificity": spec_},
        )
    ability = _sample_dist(rng, p.get("ability", ("normal", 1.0, 0.5)), r)
    inv_diff = _sample_dist(rng, p.get("inverse_difficulty", ("lognormal", 0.0, 0.6)), n)
    if (inv_diff <= 0).any():
        raise DomainError("inverse_difficulty distribution must be positive")
    with np.errstate(over="ignore"):
        prob = 1.0 / (1.0 + np.exp(-np.outer(inv_diff, ability)))
    return lambda i, j: prob[i, j], {"ability": ability, "inverse_difficulty": inv_diff}


def synth_generate(cfg: SynthConfig) -> tuple[LabelPool, GoldStandards]:
    """Generate a pool from the configured worker family, deterministically."""
    rng = np.random.default_rng(cfg.seed)
    gold = np.where(rng.uniform(size=cfg.n_samples) < cfg.positive_prior, 1, -1).astype(np.int8)
    correct_prob, _ = _correct_probability(cfg, rng, gold)
    if isinstance(cfg.labels_per_sample, int):
        lps = np.full(cfg.n_samples, cfg.labels_per_sample, dtype=np.int64)
    else:
        lps = np.asarray(cfg.labels_per_sample, dtype=np.int64)
        if lps.shape != (cfg.n_samples,):
            raise DomainError("labels_per_sample sequence must have one entry per sample")
    if (lps < 1).any():
        raise DomainError("labels_per_sample must be at least 1")
    if (lps > cfg.n_workers).any():
        raise DomainError("labels_per_sample cannot exceed the worker count")
    workers_by_sample = []
    labels_by_sample = []
    for i in range(cfg.n_samples):
        ws = rng.choice(cfg.n_workers, size=int(lps[i]), replace=False)
        probs = np.array([correct_prob(i, int(j)) for j in ws])
        correct = rng.uniform(size=len(ws)) < probs
        labels_by_sample.append(np.where(correct, gold[i], -gold[i]).astype(np.int8))
        workers_by_sample.append(ws.astype(np.int64))
    pool = LabelPool(
        name=cfg.name,
        sample_ids=tuple(f"s{i}" for i in range(cfg.n_samples)),
        worker_ids=tuple(f"w{j}" for j in range(cfg.n_workers)),
        workers_by_sample=tuple(workers_by_sample),
        labels_by_sample=tuple(labels_by_sample),
        gold=GoldStandards(gold),
    )
    return pool, pool.gold


def score(estimates: EstimateSet, gold: GoldStandards) -> float:
    """Error rate: fraction of gold-labeled samples whose hard label disagrees."""
    mask = gold.labeled_mask
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        raise DomainError("gold standards contain no labeled samples")
    if estimates.n <= idx.max():
        raise CoverageError(
            f"estimates cover {estimates.n} samples but gold labels sample {int(idx.max())}"
        )
    return float(np.mean(estimates.labels[idx] != gold.labels[idx]))
