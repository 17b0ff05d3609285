"""Sample-selection criteria and the budgeted label-acquisition replay loop.

A replay simulates adaptive acquisition against a pre-recorded pool: each
step picks a sample by the configured criterion, draws one of its unseen
labels uniformly without replacement, and periodically refits the
integrator's worker model.  Runs are strictly sequential internally but
fully deterministic per seed, so independent runs parallelize freely.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
import numpy as np
from scipy.special import expit

from . import aggregate as agg
from .errors import DomainError, PoolExhaustedError
from .labels import EstimateSet, LabelMatrix, LabelPool
from .numerics import PROB_EPS, reg_inc_beta

SELECTORS = ("uniform", "entropy", "uncertainty")
INTEGRATORS = (
    "majority",
    "accuracy",
    "sensspec",
    "glad",
    "dawid-skene",
    "reliability",
    "spectral",
)
# integrators whose fits yield a worker model usable by model-based uncertainty
MODEL_BASED = ("accuracy", "sensspec", "glad", "dawid-skene")

_KOS_ROUNDS = 10


@dataclass
class SelectionState:
    """Mutable view of an acquisition run used by the selection criteria."""

    r: np.ndarray
    r_plus: np.ndarray
    remaining_budget: int
    eligible: np.ndarray
    model: agg.WorkerModel | None = None
    posterior: np.ndarray | None = None
    matrix: LabelMatrix | None = None

    @classmethod
    def from_counts(cls, r, r_plus, remaining_budget, eligible=None, **kw):
        r = np.asarray(r, dtype=np.int64)
        r_plus = np.asarray(r_plus, dtype=np.int64)
        if (r_plus > r).any() or (r_plus < 0).any():
            raise DomainError("positive counts cannot exceed totals")
        if eligible is None:
            eligible = np.ones(r.size, dtype=bool)
        return cls(r, r_plus, remaining_budget, np.asarray(eligible, dtype=bool), **kw)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _pick(rng: np.random.Generator, candidates: np.ndarray) -> int:
    if candidates.size == 1:
        return int(candidates[0])
    return int(candidates[int(rng.integers(candidates.size))])


def select_uniform(state: SelectionState, seed=0) -> int:
    """The eligible sample with the fewest labels; ties break at random."""
    rng = _as_rng(seed)
    cand = np.nonzero(state.eligible)[0]
    if cand.size == 0:
        raise PoolExhaustedError("no sample has unseen labels left")
    vals = state.r[cand]
    return _pick(rng, cand[vals == vals.min()])


def _entropy_from_counts(r_plus: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Label entropy in bits; both class ratios derive from the integer
    counts so mirrored splits (k of n vs n-k of n) tie bit for bit."""
    p1 = r_plus / r
    p2 = (r - r_plus) / r
    out = np.zeros_like(p1)
    for p in (p1, p2):
        interior = p > 0
        pi = p[interior]
        out[interior] -= pi * np.log2(pi)
    return out


def select_entropy(state: SelectionState, seed=0) -> int:
    """The labeled eligible sample with maximal label entropy.

    Unlabeled samples are never chosen while any labeled eligible sample
    exists (the criterion's label-count bias is reproduced on purpose);
    with no labeled candidates the choice is uniform over eligible ones.
    """
    rng = _as_rng(seed)
    cand = np.nonzero(state.eligible)[0]
    if cand.size == 0:
        raise PoolExhaustedError("no sample has unseen labels left")
    labeled = cand[state.r[cand] >= 1]
    if labeled.size == 0:
        return _pick(rng, cand)
    ent = _entropy_from_counts(state.r_plus[labeled], state.r[labeled])
    return _pick(rng, labeled[ent == ent.max()])


def _beta_uncertainty(l1: int, l2: int) -> float:
    tail = reg_inc_beta(0.5, l1 + 1.0, l2 + 1.0)
    return min(tail, 1.0 - tail)


def select_uncertainty(
    state: SelectionState, model: agg.WorkerModel | None = None, seed=0
) -> int:
    """The eligible sample whose integrated label is least certain.

    Without a model the uncertainty is the beta-tail mass of the label
    counts; with one it is min_c P(y=c | data, model).  Unlabeled samples
    sit at the maximal 0.5 either way, so cold-start coverage is automatic.
    """
    rng = _as_rng(seed)
    cand = np.nonzero(state.eligible)[0]
    if cand.size == 0:
        raise PoolExhaustedError("no sample has unseen labels left")
    if model is None:
        uc = np.array(
            [
                _beta_uncertainty(int(state.r_plus[i]), int(state.r[i] - state.r_plus[i]))
                for i in cand
            ]
        )
    else:
        if state.posterior is not None:
            post = state.posterior
        elif state.matrix is not None:
            post = agg.weighted_posterior(state.matrix, model).posterior
        else:
            raise DomainError("model-based uncertainty needs a posterior or matrix")
        uc = np.minimum(post, 1.0 - post)[cand]
        uc[state.r[cand] == 0] = 0.5
    return _pick(rng, cand[uc == uc.max()])


# ---------------------------------------------------------------------------
# Integrator dispatch
# ---------------------------------------------------------------------------


def integrate(
    matrix: LabelMatrix,
    integrator: str,
    opts: agg.EmOptions | None = None,
    seed: int = 0,
) -> tuple[agg.WorkerModel | None, EstimateSet]:
    """Run one batch integrator on a matrix, tolerating unlabeled samples.

    Estimators that require every sample to carry a label (GLAD,
    Dawid-Skene) are fitted on the labeled subset; unlabeled samples get
    the neutral 0.5 posterior.
    """
    if integrator not in INTEGRATORS:
        raise DomainError(f"unknown integrator {integrator!r}; known: {INTEGRATORS}")
    if integrator == "majority":
        return None, agg.majority_vote(matrix)
    if integrator == "accuracy":
        return agg.accuracy_em(matrix, opts)
    if integrator == "sensspec":
        return agg.bayes_sensspec_em(matrix, opts=opts)
    if integrator == "reliability":
        _, est = agg.kos_iterate(matrix, k_max=_KOS_ROUNDS, seed=seed)
        return None, est
    if integrator == "spectral":
        return None, agg.spectral_estimate(matrix, seed=seed)

    r = np.bincount(matrix.samples, minlength=matrix.n_samples)
    labeled = np.nonzero(r > 0)[0]
    if labeled.size == 0:
        return None, EstimateSet.from_posterior(np.full(matrix.n_samples, 0.5))
    remap = -np.ones(matrix.n_samples, dtype=np.int64)
    remap[labeled] = np.arange(labeled.size)
    sub = LabelMatrix(
        labeled.size, matrix.n_workers, remap[matrix.samples], matrix.workers, matrix.labels
    )
    posterior = np.full(matrix.n_samples, 0.5)
    if integrator == "glad":
        model, est = agg.glad_em(sub, opts)
        inv_diff = np.ones(matrix.n_samples)
        inv_diff[labeled] = model.inverse_difficulty
        model = agg.GladModel(
            model.ability,
            inv_diff,
            model.positive_prior,
            converged=model.converged,
            n_iter=model.n_iter,
            objective_history=model.objective_history,
        )
    else:  # dawid-skene
        model, est = agg.dawid_skene_em(sub, opts)
    posterior[labeled] = est.posterior
    return model, EstimateSet.from_posterior(posterior)


# ---------------------------------------------------------------------------
# Replay
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReplayTrace:
    """Per-step acquisition log: chosen sample, drawn label, running error."""

    samples: np.ndarray
    labels: np.ndarray
    errors: np.ndarray
    budget: int
    exhausted: bool

    def __len__(self) -> int:
        return int(self.samples.size)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["step", "sample", "label", "error"])
            for k in range(len(self)):
                err = self.errors[k]
                writer.writerow(
                    [k, int(self.samples[k]), int(self.labels[k]), "" if math.isnan(err) else repr(float(err))]
                )


def _scalar_edge_terms(model: agg.WorkerModel, i: int, j: int, v: int) -> tuple[float, float]:
    """log P(v | y=+1), log P(v | y=-1) for one response under the model."""
    clamp = lambda x: min(max(x, PROB_EPS), 1.0 - PROB_EPS)
    if isinstance(model, agg.AccuracyModel):
        p = clamp(float(model.accuracies[j]))
        lp, ln = (math.log(p), math.log1p(-p)) if v > 0 else (math.log1p(-p), math.log(p))
        return lp, ln
    if isinstance(model, agg.SensSpecModel):
        al = clamp(float(model.sensitivity[j]))
        be = clamp(float(model.specificity[j]))
        if v > 0:
            return math.log(al), math.log1p(-be)
        return math.log1p(-al), math.log(be)
    if isinstance(model, agg.ConfusionModel):
        col = 1 if v > 0 else 0
        return (
            math.log(clamp(float(model.confusion[j, 1, col]))),
            math.log(clamp(float(model.confusion[j, 0, col]))),
        )
    if isinstance(model, agg.GladModel):
        sig = clamp(
            float(expit(model.ability[j] * model.inverse_difficulty[i]))
        )
        if v > 0:
            return math.log(sig), math.log1p(-sig)
        return math.log1p(-sig), math.log(sig)
    raise DomainError(f"unsupported worker model {type(model).__name__}")


class _ReplayRun:
    """Incremental state for one replay: counts, logits, running estimates."""

    def __init__(self, pool: LabelPool, selector: str, integrator: str, rng):
        self.pool = pool
        self.selector = selector
        self.integrator = integrator
        n = pool.n_samples
        self.order = [rng.permutation(len(w)) for w in pool.workers_by_sample]
        self.drawn = np.zeros(n, dtype=np.int64)
        self.r = np.zeros(n, dtype=np.int64)
        self.r_plus = np.zeros(n, dtype=np.int64)
        self.eligible = pool.pool_sizes > 0
        self.acq_samples: list[int] = []
        self.acq_workers: list[int] = []
        self.acq_labels: list[int] = []
        self.model: agg.WorkerModel | None = None
        self.lpos = np.zeros(n)
        self.lneg = np.zeros(n)
        self.posterior = np.full(n, 0.5)
        self.uc = np.full(n, 0.5)
        gold = pool.gold
        self.gold_mask = gold.labeled_mask
        self.gold_labels = gold.labels
        self.n_gold = int(self.gold_mask.sum())
        self.wrong = int((self.gold_labels[self.gold_mask] != 1).sum())  # all start at +1

    def matrix(self) -> LabelMatrix:
        return LabelMatrix(
            self.pool.n_samples,
            self.pool.n_workers,
            np.array(self.acq_samples, dtype=np.int64),
            np.array(self.acq_workers, dtype=np.int64),
            np.array(self.acq_labels, dtype=np.int8),
        )

    def _set_posterior(self, idx: int, value: float) -> None:
        old_hard = 1 if self.posterior[idx] >= 0.5 else -1
        new_hard = 1 if value >= 0.5 else -1
        self.posterior[idx] = value
        if old_hard != new_hard and self.gold_mask[idx]:
            truth = int(self.gold_labels[idx])
            if new_hard != truth and old_hard == truth:
                self.wrong += 1
            elif new_hard == truth and old_hard != truth:
                self.wrong -= 1

    def absorb(self, idx: int, worker: int, label: int) -> None:
        self.acq_samples.append(idx)
        self.acq_workers.append(worker)
        self.acq_labels.append(label)
        self.drawn[idx] += 1
        if self.drawn[idx] >= len(self.pool.workers_by_sample[idx]):
            self.eligible[idx] = False
        self.r[idx] += 1
        if label > 0:
            self.r_plus[idx] += 1
        if self.model is not None:
            lp, ln = _scalar_edge_terms(self.model, idx, worker, label)
            self.lpos[idx] += lp
            self.lneg[idx] += ln
            self._set_posterior(idx, float(expit(self.lpos[idx] - self.lneg[idx])))
            self.uc[idx] = min(self.posterior[idx], 1.0 - self.posterior[idx])
        else:
            self._set_posterior(idx, self.r_plus[idx] / self.r[idx])
            self.uc[idx] = _beta_uncertainty(
                int(self.r_plus[idx]), int(self.r[idx] - self.r_plus[idx])
            )

    def refit(self, opts: agg.EmOptions | None, seed: int) -> None:
        matrix = self.matrix()
        model, est = integrate(matrix, self.integrator, opts, seed=seed)
        self.model = model
        if model is not None:
            self.lpos, self.lneg = agg._sample_logits(matrix, model)
        self.posterior = est.posterior.copy()
        if self.n_gold:
            hard = np.where(self.posterior >= 0.5, 1, -1)
            self.wrong = int(
                (hard[self.gold_mask] != self.gold_labels[self.gold_mask]).sum()
            )
        self.uc = np.minimum(self.posterior, 1.0 - self.posterior)
        self.uc[self.r == 0] = 0.5

    def running_error(self) -> float:
        if self.n_gold == 0:
            return float("nan")
        return self.wrong / self.n_gold

    def select(self, rng) -> int:
        cand = np.nonzero(self.eligible)[0]
        if cand.size == 0:
            raise PoolExhaustedError("no sample has unseen labels left")
        if self.selector == "uniform":
            vals = self.r[cand]
            return _pick(rng, cand[vals == vals.min()])
        if self.selector == "entropy":
            labeled = cand[self.r[cand] >= 1]
            if labeled.size == 0:
                return _pick(rng, cand)
            ent = _entropy_from_counts(self.r_plus[labeled], self.r[labeled])
            return _pick(rng, labeled[ent == ent.max()])
        uc = self.uc[cand].copy()
        uc[self.r[cand] == 0] = 0.5
        return _pick(rng, cand[uc == uc.max()])


def adaptive_replay(
    pool: LabelPool,
    budget: int,
    selector: str = "uniform",
    integrator: str = "majority",
    refit_every: int = 25,
    seed: int = 0,
    em_options: agg.EmOptions | None = None,
    track_error: bool = True,
) -> tuple[ReplayTrace, EstimateSet]:
    """Simulate budgeted adaptive labeling against a recorded pool.

    Each step selects a sample, draws one unseen label for it uniformly
    without replacement, and updates the running estimates; model-based
    integrators are refitted every ``refit_every`` acquisitions (the
    uncertainty criterion uses the fitted model once one exists, and the
    count-based form before that).  The loop stops when the budget is
    spent or every pool is empty, and the final estimate comes from a
    fresh fit of the chosen integrator on the acquired matrix.
    """
    if selector not in SELECTORS:
        raise DomainError(f"unknown selector {selector!r}; known: {SELECTORS}")
    if integrator not in INTEGRATORS:
        raise DomainError(f"unknown integrator {integrator!r}; known: {INTEGRATORS}")
    if budget < 0:
        raise DomainError("budget must be nonnegative")
    if refit_every < 1:
        raise DomainError("refit_every must be positive")
    if pool.n_samples == 0:
        raise DomainError("pool is empty")
    rng = np.random.default_rng(seed)
    run = _ReplayRun(pool, selector, integrator, rng)
    model_based = integrator in MODEL_BASED
    trace_samples: list[int] = []
    trace_labels: list[int] = []
    trace_errors: list[float] = []
    exhausted = False
    for step in range(budget):
        if not run.eligible.any():
            exhausted = True
            break
        idx = run.select(rng)
        pos = run.order[idx][run.drawn[idx]]
        worker = int(pool.workers_by_sample[idx][pos])
        label = int(pool.labels_by_sample[idx][pos])
        run.absorb(idx, worker, label)
        if model_based and (step + 1) % refit_every == 0:
            run.refit(em_options, seed=seed)
        trace_samples.append(idx)
        trace_labels.append(label)
        trace_errors.append(run.running_error() if track_error else float("nan"))
    acquired = len(trace_samples)
    assert acquired == min(budget, int(pool.pool_sizes.sum()))  # budget conservation
    _, final = integrate(run.matrix(), integrator, em_options, seed=seed)
    trace = ReplayTrace(
        samples=np.array(trace_samples, dtype=np.int64),
        labels=np.array(trace_labels, dtype=np.int8),
        errors=np.array(trace_errors, dtype=np.float64),
        budget=budget,
        exhausted=exhausted,
    )
    return trace, final
