"""Experiment orchestration: seeded method x labels-per-sample error grids.

A cell is one (method, lps, run) evaluation.  Cell seeds derive from the
base seed by hashing the cell key, so every cell is independent,
reproducible in isolation, and immune to execution order; running with a
process pool changes wall time, never output bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .aggregate import EmOptions
from .errors import DomainError
from .labels import (
    FIXTURE_NAMES,
    LabelPool,
    fixture_pool,
    load_manifest,
    load_pool,
    score,
    subsample,
)
from .selection import adaptive_replay, integrate

OUTPUT_DIR_ENV = "CROWDBENCH_OUT"

_BATCH_METHODS = {
    "majority": "majority",
    "accuracy": "accuracy",
    "sensspec": "sensspec",
    "glad": "glad",
    "reliability": "reliability",
    "dawid-skene": "dawid-skene",
    "spectral": "spectral",
}
_REPLAY_METHODS = {
    "entropy-select": ("entropy", "majority"),
    "uncertainty-select": ("uncertainty", "majority"),
    "accuracy+uncertainty": ("uncertainty", "accuracy"),
}
METHODS = tuple(_BATCH_METHODS) + tuple(_REPLAY_METHODS)

REPORT_FORMATS = ("csv", "markdown-table", "json", "plot-data")


def cell_seed(base_seed: int, method: str, lps: int, run: int) -> int:
    """Stable per-cell seed: hash of the cell key mixed with the base seed."""
    key = f"{base_seed}|{method}|{lps}|{run}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark grid: dataset, methods, lps values, runs, seeds."""

    dataset: str
    methods: tuple[str, ...] = ("majority", "glad")
    lps_grid: tuple[int, ...] = (1, 3, 5, 7, 9)
    runs: int = 20
    base_seed: int = 0
    refit_every: int = 25
    em_max_iter: int = 100
    em_tol: float = 1e-5
    workers: int = 1
    gold_path: str | None = None
    output_dir: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "lps_grid", tuple(int(x) for x in self.lps_grid))
        if self.runs < 1:
            raise DomainError("runs must be at least 1")
        if any(l < 1 for l in self.lps_grid) or not self.lps_grid:
            raise DomainError("lps grid must contain positive counts")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise DomainError(f"unknown methods {unknown}; known: {sorted(METHODS)}")
        if self.workers < 1:
            raise DomainError("workers must be at least 1")

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise DomainError(f"unknown config keys {sorted(unknown)}")
        return cls(**raw)

    def to_json_obj(self) -> dict:
        return {
            "dataset": self.dataset,
            "methods": list(self.methods),
            "lps_grid": list(self.lps_grid),
            "runs": self.runs,
            "base_seed": self.base_seed,
            "refit_every": self.refit_every,
            "em_max_iter": self.em_max_iter,
            "em_tol": self.em_tol,
            "workers": self.workers,
            "gold_path": self.gold_path,
            "output_dir": self.output_dir,
        }


@dataclass(frozen=True)
class CellResult:
    """All per-run errors of one (method, lps) grid cell."""

    method: str
    lps: int
    errors: tuple[float, ...]

    @property
    def mean(self) -> float:
        return float(np.mean(self.errors))

    @property
    def std(self) -> float:
        return float(np.std(self.errors))


@dataclass(frozen=True)
class ExperimentReport:
    """Deterministic grid of results; runtime metadata never affects equality."""

    dataset: str
    base_seed: int
    methods: tuple[str, ...]
    lps_grid: tuple[int, ...]
    cells: tuple[CellResult, ...]
    runtime: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if len(self.cells) != len(self.methods) * len(self.lps_grid):
            raise DomainError("report must hold one cell per (method, lps) pair")
        for c in self.cells:
            if not c.errors:
                raise DomainError("every cell needs at least one run")
            # 1e-12 slack: averaging twenty equal doubles can round 1 ulp out
            if not min(c.errors) - 1e-12 <= c.mean <= max(c.errors) + 1e-12:
                raise DomainError("cell mean outside its run range")

    def cell(self, method: str, lps: int) -> CellResult:
        for c in self.cells:
            if c.method == method and c.lps == lps:
                return c
        raise DomainError(f"no cell for ({method}, {lps})")

    def mean(self, method: str, lps: int) -> float:
        return self.cell(method, lps).mean

    def to_json_obj(self, include_runtime: bool = False) -> dict:
        obj = {
            "dataset": self.dataset,
            "base_seed": self.base_seed,
            "methods": list(self.methods),
            "lps_grid": list(self.lps_grid),
            "cells": [
                {"method": c.method, "lps": c.lps, "errors": list(c.errors)}
                for c in self.cells
            ],
        }
        if include_runtime:
            obj["runtime"] = dict(self.runtime)
        return obj


def report_from_json_obj(obj: dict) -> ExperimentReport:
    return ExperimentReport(
        dataset=obj["dataset"],
        base_seed=int(obj["base_seed"]),
        methods=tuple(obj["methods"]),
        lps_grid=tuple(int(x) for x in obj["lps_grid"]),
        cells=tuple(
            CellResult(c["method"], int(c["lps"]), tuple(float(e) for e in c["errors"]))
            for c in obj["cells"]
        ),
        runtime=dict(obj.get("runtime", {})),
    )


def load_report(path: str | Path) -> ExperimentReport:
    with open(path, encoding="utf-8") as fh:
        return report_from_json_obj(json.load(fh))


# ---------------------------------------------------------------------------
# Dataset resolution and cell execution
# ---------------------------------------------------------------------------


def resolve_pool(dataset: str, gold_path: str | None = None) -> LabelPool:
    """Interpret a dataset spec: bundled fixture name, manifest, or data file."""
    if dataset in FIXTURE_NAMES:
        return fixture_pool(dataset)
    path = Path(dataset)
    if not path.exists():
        raise FileNotFoundError(f"dataset not found: {path}")
    if path.suffix == ".json":
        with open(path, encoding="utf-8") as fh:
            head = json.load(fh)
        if isinstance(head, dict) and "labels" in head and "samples" not in head:
            return load_manifest(path)
        return load_pool(path, format="json")
    return load_pool(path, format="triples-csv", gold_path=gold_path)


def run_cell(
    pool: LabelPool,
    method: str,
    lps: int,
    seed: int,
    refit_every: int = 25,
    em_options: EmOptions | None = None,
) -> float:
    """Execute one grid cell and return its error rate against the pool gold."""
    opts = em_options or EmOptions(max_iter=100, tol=1e-5)
    if method in _BATCH_METHODS:
        matrix = subsample(pool, lps, seed)
        _, est = integrate(matrix, _BATCH_METHODS[method], opts, seed=seed)
    elif method in _REPLAY_METHODS:
        selector, integrator = _REPLAY_METHODS[method]
        _, est = adaptive_replay(
            pool,
            budget=lps * pool.n_samples,
            selector=selector,
            integrator=integrator,
            refit_every=refit_every,
            seed=seed,
            em_options=opts,
            track_error=False,
        )
    else:
        raise DomainError(f"unknown method {method!r}")
    return score(est, pool.gold)


_WORKER_POOL: LabelPool | None = None
_WORKER_CFG: ExperimentConfig | None = None


def _pool_worker_init(cfg: ExperimentConfig) -> None:
    global _WORKER_POOL, _WORKER_CFG
    _WORKER_CFG = cfg
    _WORKER_POOL = resolve_pool(cfg.dataset, cfg.gold_path)


def _pool_worker_run(job: tuple[str, int, int]) -> tuple[tuple[str, int, int], float]:
    method, lps, run = job
    cfg = _WORKER_CFG
    seed = cell_seed(cfg.base_seed, method, lps, run)
    err = run_cell(
        _WORKER_POOL,
        method,
        lps,
        seed,
        refit_every=cfg.refit_every,
        em_options=EmOptions(max_iter=cfg.em_max_iter, tol=cfg.em_tol),
    )
    return job, err


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Evaluate the full grid; deterministic in content for a fixed base seed."""
    pool = resolve_pool(cfg.dataset, cfg.gold_path)
    jobs = [
        (method, lps, run)
        for method in cfg.methods
        for lps in cfg.lps_grid
        for run in range(cfg.runs)
    ]
    started = time.monotonic()
    results: dict[tuple[str, int, int], float] = {}
    if cfg.workers > 1:
        with ProcessPoolExecutor(
            max_workers=cfg.workers, initializer=_pool_worker_init, initargs=(cfg,)
        ) as pool_exec:
            for job, err in pool_exec.map(_pool_worker_run, jobs, chunksize=1):
                results[job] = err
    else:
        opts = EmOptions(max_iter=cfg.em_max_iter, tol=cfg.em_tol)
        for method, lps, run in jobs:
            seed = cell_seed(cfg.base_seed, method, lps, run)
            results[(method, lps, run)] = run_cell(
                pool, method, lps, seed, refit_every=cfg.refit_every, em_options=opts
            )
    cells = tuple(
        CellResult(
            method,
            lps,
            tuple(results[(method, lps, run)] for run in range(cfg.runs)),
        )
        for method in cfg.methods
        for lps in cfg.lps_grid
    )
    return ExperimentReport(
        dataset=cfg.dataset,
        base_seed=cfg.base_seed,
        methods=cfg.methods,
        lps_grid=cfg.lps_grid,
        cells=cells,
        runtime={"total_seconds": time.monotonic() - started, "workers": cfg.workers},
    )


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------


def _render_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "lps", "mean", "std", "runs"])
    for c in report.cells:
        writer.writerow([c.method, c.lps, repr(c.mean), repr(c.std), len(c.errors)])
    return buf.getvalue()


def _render_markdown(report: ExperimentReport) -> str:
    header = "| Method | " + " | ".join(f"{l} lps" for l in report.lps_grid) + " |"
    rule = "|---" * (len(report.lps_grid) + 1) + "|"
    lines = [f"### {report.dataset} (errors %, mean of {len(report.cells[0].errors)} runs)", "", header, rule]
    for method in report.methods:
        row = [method] + [f"{report.mean(method, l) * 100:.2f}" for l in report.lps_grid]
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def _render_plot_data(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lps"] + list(report.methods))
    for lps in report.lps_grid:
        writer.writerow([lps] + [repr(report.mean(m, lps)) for m in report.methods])
    return buf.getvalue()


_FORMAT_SUFFIX = {
    "csv": ".csv",
    "markdown-table": ".md",
    "json": ".json",
    "plot-data": ".plot.csv",
}


def render_report(report: ExperimentReport, format: str) -> str:
    if format == "csv":
        return _render_csv(report)
    if format == "markdown-table":
        return _render_markdown(report)
    if format == "json":
        return json.dumps(report.to_json_obj(), indent=2, sort_keys=False) + "\n"
    if format == "plot-data":
        return _render_plot_data(report)
    raise DomainError(f"unknown report format {format!r}; known: {REPORT_FORMATS}")


def default_output_dir(explicit: str | None = None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def emit_report(
    report: ExperimentReport,
    format: str,
    path: str | Path | None = None,
    output_dir: str | None = None,
) -> Path:
    """Write one rendering of the report; returns the file written."""
    text = render_report(report, format)
    if path is None:
        stem = f"report_{Path(report.dataset).stem}"
        path = default_output_dir(output_dir) / (stem + _FORMAT_SUFFIX[format])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path
