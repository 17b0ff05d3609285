"""Online worker models: filtered accuracy tracking and interval-based selection.

The accuracy filter follows a random-walk model on (0.5, 1]: the accuracy
drifts by a truncated Gaussian step each round, and each observed response
is explained through the peers' current belief about the true label.  Two
interchangeable representations are provided: an exact discretized filter
on a fixed grid, and a sequential particle filter with systematic
resampling.

Each worker's filter state is independent; a single posterior object is
never mutated (every update returns a fresh one).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DegeneratePosteriorError, DomainError, InsufficientHistoryError
from .numerics import ConfidenceSpec, student_t_quantile, trunc_gauss_density

SUPPORT = (0.5, 1.0)
_MASS_FLOOR = 1e-300


@dataclass(frozen=True)
class SFilterConfig:
    """Filter controls: drift scale, representation, resolution, prior, seed."""

    sigma: float = 0.02
    mode: str = "exact-grid"  # or "particle"
    resolution: int = 256
    particles: int = 2000
    prior: str = "uniform"
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")
        if self.mode not in ("exact-grid", "particle"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.resolution < 16:
            raise DomainError("grid resolution must be at least 16")
        if self.particles < 100:
            raise DomainError("particle count must be at least 100")
        if self.prior != "uniform":
            raise DomainError("only the uniform initial prior is built in")


@dataclass(frozen=True)
class AccuracyPosterior:
    """Belief over a worker's accuracy on (0.5, 1] at time ``t``.

    Grid posteriors carry density values at the cell centers of a uniform
    partition; particle posteriors carry weighted locations.
    """

    kind: str  # "grid" | "particles"
    points: np.ndarray
    density: np.ndarray | None = None
    weights: np.ndarray | None = None
    t: int = 0

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        object.__setattr__(self, "points", pts)
        if (pts <= SUPPORT[0] - 1e-12).any() or (pts > SUPPORT[1] + 1e-12).any():
            raise DomainError("posterior support must lie in (0.5, 1]")
        if self.kind == "grid":
            d = np.asarray(self.density, dtype=np.float64)
            if d.shape != pts.shape or (d < 0).any():
                raise DomainError("grid density must be nonnegative and match the grid")
            if abs(float(d.sum() * self.cell_width) - 1.0) > 1e-6:
                raise DomainError("grid density must integrate to 1")
            object.__setattr__(self, "density", d)
        elif self.kind == "particles":
            w = np.asarray(self.weights, dtype=np.float64)
            if w.shape != pts.shape or (w < 0).any():
                raise DomainError("particle weights must be nonnegative and match")
            if abs(float(w.sum()) - 1.0) > 1e-9:
                raise DomainError("particle weights must sum to 1")
            object.__setattr__(self, "weights", w)
        else:
            raise DomainError(f"unknown posterior kind {self.kind!r}")

    @property
    def cell_width(self) -> float:
        return (SUPPORT[1] - SUPPORT[0]) / self.points.size

    def mean(self) -> float:
        if self.kind == "grid":
            return float((self.points * self.density).sum() * self.cell_width)
        return float((self.points * self.weights).sum())

    def variance(self) -> float:
        m = self.mean()
        if self.kind == "grid":
            return float(((self.points - m) ** 2 * self.density).sum() * self.cell_width)
        return float(((self.points - m) ** 2 * self.weights).sum())


def _grid_points(resolution: int) -> np.ndarray:
    h = (SUPPORT[1] - SUPPORT[0]) / resolution
    return SUPPORT[0] + (np.arange(resolution) + 0.5) * h


@lru_cache(maxsize=16)
def _transition_matrix(sigma: float, resolution: int) -> np.ndarray:
    """T[new, old]: truncated-Gaussian step density between grid centers."""
    pts = _grid_points(resolution)
    t = np.empty((resolution, resolution))
    for k, old in enumerate(pts):
        t[:, k] = [trunc_gauss_density(float(x), float(old), sigma, *SUPPORT) for x in pts]
    return t


def initial_posterior(cfg: SFilterConfig) -> AccuracyPosterior:
    """Uniform prior over (0.5, 1] in the configured representation."""
    if cfg.mode == "exact-grid":
        pts = _grid_points(cfg.resolution)
        density = np.full(cfg.resolution, 1.0 / (SUPPORT[1] - SUPPORT[0]))
        return AccuracyPosterior("grid", pts, density=density)
    rng = np.random.default_rng((cfg.seed, 0))
    pts = rng.uniform(SUPPORT[0], SUPPORT[1], cfg.particles)
    return AccuracyPosterior(
        "particles", pts, weights=np.full(cfg.particles, 1.0 / cfg.particles)
    )


def _sample_truncated_steps(
    rng: np.random.Generator, centers: np.ndarray, sigma: float
) -> np.ndarray:
    """Rejection sampling of the truncated-Gaussian transition, vectorized."""
    out = np.empty_like(centers)
    todo = np.arange(centers.size)
    for _ in range(10_000):
        draw = rng.normal(centers[todo], sigma)
        ok = (draw > SUPPORT[0]) & (draw <= SUPPORT[1])
        out[todo[ok]] = draw[ok]
        todo = todo[~ok]
        if todo.size == 0:
            return out
    raise DegeneratePosteriorError("truncated transition sampling failed to accept")


def _systematic_resample(rng: np.random.Generator, weights: np.ndarray) -> np.ndarray:
    n = weights.size
    positions = (rng.uniform() + np.arange(n)) / n
    return np.searchsorted(np.cumsum(weights), positions)


def _correct_label_probability(response: int, peer_label_posterior: float) -> float:
    """P(true label equals the response), given the peers' belief in +1."""
    if response not in (-1, 1):
        raise DomainError(f"response must be -1 or +1, got {response!r}")
    if not 0.0 <= peer_label_posterior <= 1.0:
        raise DomainError("peer_label_posterior must lie in [0, 1]")
    return peer_label_posterior if response > 0 else 1.0 - peer_label_posterior


def sfilter_observe(
    post: AccuracyPosterior,
    response: int,
    peer_label_posterior: float,
    cfg: SFilterConfig,
) -> AccuracyPosterior:
    """One predict-update cycle of the accuracy filter.

    Prediction convolves the belief with the truncated-Gaussian drift
    kernel; the update multiplies by the label-marginalized response
    likelihood P(z | p, peers) = p * c + (1 - p) * (1 - c), where c is the
    peers' probability that the response matches the truth.  A peer belief
    of 0.5 makes the likelihood flat, leaving the pure prediction.
    """
    c = _correct_label_probability(response, peer_label_posterior)
    if post.kind == "grid":
        trans = _transition_matrix(cfg.sigma, post.points.size)
        predicted = trans @ post.density * post.cell_width
        lik = post.points * c + (1.0 - post.points) * (1.0 - c)
        unnorm = predicted * lik
        mass = float(unnorm.sum() * post.cell_width)
        if mass <= _MASS_FLOOR:
            raise DegeneratePosteriorError("posterior mass underflowed in grid update")
        return AccuracyPosterior("grid", post.points, density=unnorm / mass, t=post.t + 1)
    rng = np.random.default_rng((cfg.seed, post.t + 1))
    moved = _sample_truncated_steps(rng, post.points, cfg.sigma)
    lik = moved * c + (1.0 - moved) * (1.0 - c)
    w = post.weights * lik
    mass = float(w.sum())
    if mass <= _MASS_FLOOR:
        raise DegeneratePosteriorError("posterior mass underflowed in particle update")
    w = w / mass
    ess = 1.0 / float((w**2).sum())
    if ess < post.points.size / 2:
        idx = _systematic_resample(rng, w)
        moved = moved[idx]
        w = np.full(moved.size, 1.0 / moved.size)
    return AccuracyPosterior("particles", moved, weights=w, t=post.t + 1)


@dataclass(frozen=True)
class TrackResult:
    """Posterior-mean trajectory of one worker's accuracy filter."""

    means: np.ndarray
    variances: np.ndarray
    final: AccuracyPosterior

    def __len__(self) -> int:
        return int(self.means.size)


def sfilter_track(
    stream: Sequence[tuple[int, float]], cfg: SFilterConfig
) -> TrackResult:
    """Fold the filter over (response, peer posterior) pairs in order.

    Exact-grid mode is fully deterministic; particle mode derives one
    generator per step from the config seed, so identical inputs give
    identical trajectories.  An empty stream yields an empty trajectory.
    """
    post = initial_posterior(cfg)
    means: list[float] = []
    variances: list[float] = []
    for response, peer in stream:
        post = sfilter_observe(post, int(response), float(peer), cfg)
        means.append(post.mean())
        variances.append(post.variance())
    return TrackResult(np.array(means), np.array(variances), post)


def export_trajectories(
    path: str | Path, tracks: Mapping[str, TrackResult]
) -> None:
    """Write per-worker trajectories as CSV rows worker,step,mean,variance."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["worker", "step", "mean", "variance"])
        for worker, track in tracks.items():
            for step in range(len(track)):
                writer.writerow(
                    [worker, step, repr(float(track.means[step])), repr(float(track.variances[step]))]
                )


# ---------------------------------------------------------------------------
# Interval-estimation worker selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WorkerHistory:
    """Sequence of estimated-correctness indicators for one worker.

    Indicators are 1 for responses that matched the consensus, 0 otherwise;
    fractional values are allowed for weighted scoring.
    """

    indicators: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.indicators, dtype=np.float64)
        if v.ndim != 1 or (v < 0).any() or (v > 1).any():
            raise DomainError("indicators must be a 1-d array of values in [0, 1]")
        object.__setattr__(self, "indicators", v)

    @property
    def r(self) -> int:
        return int(self.indicators.size)

    @property
    def mean(self) -> float:
        return float(self.indicators.mean()) if self.r else 0.0

    @property
    def sd(self) -> float:
        return float(self.indicators.std(ddof=1)) if self.r >= 2 else 0.0


def iethresh_upper(history: WorkerHistory, alpha: float) -> float:
    """Upper confidence bound mu + t_{alpha/2}^{(r-1)} * sd / sqrt(r)."""
    if history.r < 2:
        raise InsufficientHistoryError(
            f"need at least 2 observations for an interval, got {history.r}"
        )
    t = student_t_quantile(ConfidenceSpec(alpha, history.r - 1))
    return history.mean + t * history.sd / np.sqrt(history.r)


def iethresh_select(
    histories: Sequence[WorkerHistory],
    alpha: float,
    seed: int = 0,
    min_history: int = 2,
) -> int:
    """Pick the worker with the highest interval upper bound.

    Workers with fewer than ``min_history`` observations score +inf so they
    are tried before any established worker; ties break uniformly at random
    under the seed.
    """
    if not histories:
        raise DomainError("need at least one worker history")
    bounds = np.array(
        [
            np.inf if h.r < min_history else iethresh_upper(h, alpha)
            for h in histories
        ]
    )
    best = bounds.max()
    candidates = np.nonzero(bounds == best)[0]
    if candidates.size == 1:
        return int(candidates[0])
    return int(np.random.default_rng(seed).choice(candidates))


def worker_histories(matrix) -> list[WorkerHistory]:
    """Score each response against the majority vote of the sample's peers.

    A response with no peer labels carries no signal and is skipped; peer
    ties resolve to +1 like every other vote in the package.
    """
    n_workers = matrix.n_workers
    sums = np.bincount(
        matrix.samples, weights=matrix.labels.astype(float), minlength=matrix.n_samples
    )
    counts = np.bincount(matrix.samples, minlength=matrix.n_samples)
    per_worker: list[list[float]] = [[] for _ in range(n_workers)]
    for s, w, v in zip(matrix.samples, matrix.workers, matrix.labels):
        if counts[s] < 2:
            continue
        peer_sum = sums[s] - v
        consensus = 1 if peer_sum >= 0 else -1
        per_worker[int(w)].append(1.0 if v == consensus else 0.0)
    return [WorkerHistory(np.array(h)) for h in per_worker]
