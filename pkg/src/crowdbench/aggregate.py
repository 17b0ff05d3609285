"""Batch label-integration algorithms and their worker-expertise models.

Every estimator is a pure function of (inputs, seed): identical seeds give
bit-identical runs, and distinct runs may execute in parallel.  Estimators
operate in log space with probabilities clamped to [PROB_EPS, 1 - PROB_EPS]
so degenerate parameters never produce -inf likelihoods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

from .errors import DomainError
from .labels import EstimateSet, LabelMatrix
from .numerics import PROB_EPS


def _clamp(p: np.ndarray) -> np.ndarray:
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


def _posterior_from_logits(lpos: np.ndarray, lneg: np.ndarray) -> np.ndarray:
    return expit(lpos - lneg)


# ---------------------------------------------------------------------------
# Worker models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmOptions:
    """Shared EM controls: iteration cap, parameter-change tolerance, seed."""

    max_iter: int = 500
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_iter < 1:
            raise DomainError("max_iter must be at least 1")
        if not self.tol > 0:
            raise DomainError("tol must be positive")


@dataclass(frozen=True)
class AccuracyModel:
    """Per-worker response accuracy; the uniform variant shares one value."""

    accuracies: np.ndarray
    converged: bool = True
    n_iter: int = 0
    objective_history: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        a = np.asarray(self.accuracies, dtype=np.float64)
        if a.ndim != 1 or (a < 0).any() or (a > 1).any():
            raise DomainError("accuracies must be a 1-d array of values in [0, 1]")
        object.__setattr__(self, "accuracies", a)

    @classmethod
    def uniform(cls, p: float, n_workers: int) -> "AccuracyModel":
        return cls(np.full(n_workers, float(p)))

    def to_dict(self) -> dict:
        return {
            "kind": "accuracy",
            "accuracies": self.accuracies.tolist(),
            "converged": self.converged,
            "n_iter": self.n_iter,
            "objective_history": list(self.objective_history),
        }


@dataclass(frozen=True)
class SensSpecPriors:
    """Beta hyperparameters for the Bayesian sensitivity/specificity fit.

    Defaults encode a weak prior favoring better-than-chance workers.  The
    update formulas subtract 1 from a1/b1/p1 and 2 from the pair sums, so
    each first parameter must be >= 1 and each pair sum must exceed 2.
    """

    a1: float = 2.0
    a2: float = 1.0
    b1: float = 2.0
    b2: float = 1.0
    p1: float = 2.0
    p2: float = 2.0

    def __post_init__(self) -> None:
        vals = (self.a1, self.a2, self.b1, self.b2, self.p1, self.p2)
        if any(not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 1.0) for v in vals):
            raise DomainError("all hyperparameters must be finite and >= 1")
        for first, second, name in (
            (self.a1, self.a2, "a"),
            (self.b1, self.b2, "b"),
            (self.p1, self.p2, "p"),
        ):
            if first + second <= 2.0:
                raise DomainError(f"{name}1 + {name}2 must exceed 2 (updates subtract 2)")


@dataclass(frozen=True)
class SensSpecModel:
    """Per-worker sensitivity/specificity with a shared positive-class prior."""

    sensitivity: np.ndarray
    specificity: np.ndarray
    positive_prior: float
    priors: SensSpecPriors = field(default_factory=SensSpecPriors)
    converged: bool = True
    n_iter: int = 0
    objective_history: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        sens = np.asarray(self.sensitivity, dtype=np.float64)
        spec = np.asarray(self.specificity, dtype=np.float64)
        if sens.shape != spec.shape or sens.ndim != 1:
            raise DomainError("sensitivity and specificity must be 1-d and aligned")
        for arr, name in ((sens, "sensitivity"), (spec, "specificity")):
            if (arr < 0).any() or (arr > 1).any():
                raise DomainError(f"{name} values must lie in [0, 1]")
        if not 0.0 <= self.positive_prior <= 1.0:
            raise DomainError("positive_prior must lie in [0, 1]")
        object.__setattr__(self, "sensitivity", sens)
        object.__setattr__(self, "specificity", spec)

    def to_dict(self) -> dict:
        return {
            "kind": "sensspec",
            "sensitivity": self.sensitivity.tolist(),
            "specificity": self.specificity.tolist(),
            "positive_prior": self.positive_prior,
            "converged": self.converged,
            "n_iter": self.n_iter,
            "objective_history": list(self.objective_history),
        }


@dataclass(frozen=True)
class ConfusionModel:
    """Per-worker row-stochastic confusion matrices plus class priors."""

    confusion: np.ndarray  # (R, J, J): P(report l | true j) at [.., j, l]
    class_priors: np.ndarray
    classes: tuple = (-1, 1)
    converged: bool = True
    n_iter: int = 0
    objective_history: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        pi = np.asarray(self.confusion, dtype=np.float64)
        pr = np.asarray(self.class_priors, dtype=np.float64)
        if pi.ndim != 3 or pi.shape[1] != pi.shape[2]:
            raise DomainError("confusion must have shape (R, J, J)")
        j = pi.shape[1]
        if pr.shape != (j,) or len(self.classes) != j:
            raise DomainError("class priors and class list must match J")
        if (pi < 0).any() or (pr < 0).any():
            raise DomainError("confusion entries and priors must be nonnegative")
        if pi.size and np.abs(pi.sum(axis=2) - 1.0).max() > 1e-9:
            raise DomainError("confusion rows must sum to 1")
        if abs(pr.sum() - 1.0) > 1e-9:
            raise DomainError("class priors must sum to 1")
        object.__setattr__(self, "confusion", pi)
        object.__setattr__(self, "class_priors", pr)
        object.__setattr__(self, "classes", tuple(self.classes))

    def to_dict(self) -> dict:
        return {
            "kind": "confusion",
            "classes": list(self.classes),
            "class_priors": self.class_priors.tolist(),
            "confusion": self.confusion.tolist(),
            "converged": self.converged,
            "n_iter": self.n_iter,
            "objective_history": list(self.objective_history),
        }


@dataclass(frozen=True)
class GladModel:
    """Worker ability (negative means adversarial) and per-sample inverse difficulty."""

    ability: np.ndarray
    inverse_difficulty: np.ndarray
    positive_prior: float = 0.5
    converged: bool = True
    n_iter: int = 0
    objective_history: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        a = np.asarray(self.ability, dtype=np.float64)
        b = np.asarray(self.inverse_difficulty, dtype=np.float64)
        if a.ndim != 1 or b.ndim != 1:
            raise DomainError("ability and inverse_difficulty must be 1-d")
        if (b <= 0).any():
            raise DomainError("inverse difficulty must be positive")
        if not 0.0 <= self.positive_prior <= 1.0:
            raise DomainError("positive_prior must lie in [0, 1]")
        object.__setattr__(self, "ability", a)
        object.__setattr__(self, "inverse_difficulty", b)

    def to_dict(self) -> dict:
        return {
            "kind": "glad",
            "ability": self.ability.tolist(),
            "inverse_difficulty": self.inverse_difficulty.tolist(),
            "positive_prior": self.positive_prior,
            "converged": self.converged,
            "n_iter": self.n_iter,
            "objective_history": list(self.objective_history),
        }


WorkerModel = AccuracyModel | SensSpecModel | ConfusionModel | GladModel


@dataclass(frozen=True)
class ReliabilityMessages:
    """Final message state of the reliability message-passing run.

    ``sample_to_worker`` and ``worker_to_sample`` hold the last-round edge
    messages; ``totals`` aggregates the worker messages of the round before,
    exactly as the final aggregation step of the algorithm prescribes.
    """

    samples: np.ndarray
    workers: np.ndarray
    sample_to_worker: np.ndarray
    worker_to_sample: np.ndarray
    totals: np.ndarray


@dataclass(frozen=True)
class MulticlassLabels:
    """Raw multi-class responses; repeated (sample, worker) pairs allowed."""

    n_samples: int
    n_workers: int
    n_classes: int
    samples: np.ndarray
    workers: np.ndarray
    classes: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=np.int64)
        w = np.asarray(self.workers, dtype=np.int64)
        c = np.asarray(self.classes, dtype=np.int64)
        if not (s.shape == w.shape == c.shape) or s.ndim != 1:
            raise DomainError("entry arrays must be 1-d and equally long")
        if s.size:
            if s.min() < 0 or s.max() >= self.n_samples:
                raise DomainError("sample index out of range")
            if w.min() < 0 or w.max() >= self.n_workers:
                raise DomainError("worker index out of range")
            if c.min() < 0 or c.max() >= self.n_classes:
                raise DomainError("class index out of range")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "workers", w)
        object.__setattr__(self, "classes", c)


# ---------------------------------------------------------------------------
# Voting
# ---------------------------------------------------------------------------


def majority_vote(a: LabelMatrix) -> EstimateSet:
    """Posterior r_i+/r_i per sample; samples with no labels sit at 0.5."""
    r, r_plus = a.counts()
    posterior = np.where(r > 0, r_plus / np.maximum(r, 1), 0.5)
    return EstimateSet.from_posterior(posterior)


def mv_quality(p: float, big_l: int) -> float:
    """Probability that a 2L+1 vote of equally accurate workers is correct."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if not isinstance(big_l, int) or big_l < 0:
        raise DomainError(f"L must be a nonnegative integer, got {big_l!r}")
    n = 2 * big_l + 1
    return float(
        sum(math.comb(n, k) * p ** (n - k) * (1.0 - p) ** k for k in range(big_l + 1))
    )


def filtered_vote_quality(accuracies: Sequence[float], subset: Sequence[int]) -> float:
    """Exact probability the majority of the selected workers is correct.

    Computed by convolving the per-worker correct/incorrect outcomes, which
    enumerates the same 2^|subset| event space as a direct sweep.
    """
    acc = np.asarray(accuracies, dtype=np.float64)
    if acc.ndim != 1 or (acc < 0).any() or (acc > 1).any():
        raise DomainError("accuracies must be values in [0, 1]")
    idx = list(subset)
    if not idx:
        raise DomainError("subset must be nonempty")
    if len(set(idx)) != len(idx):
        raise DomainError("subset indices must be unique")
    if any(i < 0 or i >= acc.size for i in idx):
        raise DomainError("subset index out of range")
    if len(idx) % 2 == 0:
        raise DomainError("subset must have odd size so the majority is well defined")
    dist = np.array([1.0])
    for i in idx:
        p = acc[i]
        dist = np.convolve(dist, [1.0 - p, p])
    need = (len(idx) + 1) // 2
    return float(dist[need:].sum())


# ---------------------------------------------------------------------------
# Model-weighted posterior
# ---------------------------------------------------------------------------


def _edge_log_likelihoods(a: LabelMatrix, model: WorkerModel):
    """Per-edge log P(A_e | y=+1) and log P(A_e | y=-1) plus the log prior pair."""
    s, w, v = a.samples, a.workers, a.labels
    pos = v > 0
    if isinstance(model, AccuracyModel):
        if model.accuracies.size != a.n_workers:
            raise DomainError("accuracy model does not match the matrix worker count")
        p = _clamp(model.accuracies)[w]
        lp = np.where(pos, np.log(p), np.log1p(-p))
        ln = np.where(pos, np.log1p(-p), np.log(p))
        prior = 0.5
    elif isinstance(model, SensSpecModel):
        if model.sensitivity.size != a.n_workers:
            raise DomainError("sens/spec model does not match the matrix worker count")
        al = _clamp(model.sensitivity)[w]
        be = _clamp(model.specificity)[w]
        lp = np.where(pos, np.log(al), np.log1p(-al))
        ln = np.where(pos, np.log1p(-be), np.log(be))
        prior = model.positive_prior
    elif isinstance(model, ConfusionModel):
        if model.confusion.shape[0] != a.n_workers:
            raise DomainError("confusion model does not match the matrix worker count")
        if model.confusion.shape[1] != 2 or tuple(model.classes) != (-1, 1):
            raise DomainError("binary weighted posterior needs classes (-1, +1)")
        pi = _clamp(model.confusion)
        col = pos.astype(np.int64)
        lp = np.log(pi[w, 1, col])
        ln = np.log(pi[w, 0, col])
        prior = float(model.class_priors[1])
    elif isinstance(model, GladModel):
        if model.ability.size != a.n_workers or model.inverse_difficulty.size != a.n_samples:
            raise DomainError("GLAD model does not match the matrix dimensions")
        sig = _clamp(expit(model.ability[w] * model.inverse_difficulty[s]))
        lp = np.where(pos, np.log(sig), np.log1p(-sig))
        ln = np.where(pos, np.log1p(-sig), np.log(sig))
        prior = model.positive_prior
    else:
        raise DomainError(f"unsupported worker model {type(model).__name__}")
    prior = float(np.clip(prior, PROB_EPS, 1.0 - PROB_EPS))
    return lp, ln, math.log(prior), math.log1p(-prior)


def _sample_logits(a: LabelMatrix, model: WorkerModel):
    lp, ln, log_prior_pos, log_prior_neg = _edge_log_likelihoods(a, model)
    lpos = np.full(a.n_samples, log_prior_pos) + np.bincount(
        a.samples, weights=lp, minlength=a.n_samples
    )
    lneg = np.full(a.n_samples, log_prior_neg) + np.bincount(
        a.samples, weights=ln, minlength=a.n_samples
    )
    return lpos, lneg


def weighted_posterior(a: LabelMatrix, model: WorkerModel) -> EstimateSet:
    """Posterior proportional to prior times the per-response model likelihoods."""
    lpos, lneg = _sample_logits(a, model)
    return EstimateSet.from_posterior(_posterior_from_logits(lpos, lneg))


# ---------------------------------------------------------------------------
# Accuracy EM (one accuracy parameter per worker)
# ---------------------------------------------------------------------------


def accuracy_em(a: LabelMatrix, opts: EmOptions | None = None) -> tuple[AccuracyModel, EstimateSet]:
    """Fit per-worker accuracies by EM, starting from the majority vote."""
    opts = opts or EmOptions()
    s, w, v = a.samples, a.workers, a.labels
    pos = v > 0
    n_per_worker = np.bincount(w, minlength=a.n_workers).astype(np.float64)
    mu = majority_vote(a).posterior
    acc = np.full(a.n_workers, 0.5)
    history: list[float] = []
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        # M step: expected fraction of correct responses per worker
        correct_weight = np.where(pos, mu[s], 1.0 - mu[s])
        new_acc = np.bincount(w, weights=correct_weight, minlength=a.n_workers)
        new_acc = np.divide(
            new_acc, n_per_worker, out=np.full(a.n_workers, 0.5), where=n_per_worker > 0
        )
        new_acc = _clamp(new_acc)
        delta = float(np.max(np.abs(new_acc - acc))) if acc.size else 0.0
        acc = new_acc
        # E step and observed-data log-likelihood under the fresh parameters
        lpos, lneg = _sample_logits(a, AccuracyModel(acc))
        mu = _posterior_from_logits(lpos, lneg)
        history.append(float(np.logaddexp(lpos, lneg).sum()))
        if delta < opts.tol:
            converged = True
            break
    model = AccuracyModel(acc, converged=converged, n_iter=it, objective_history=tuple(history))
    return model, EstimateSet.from_posterior(mu)


# ---------------------------------------------------------------------------
# Dawid-Skene confusion-matrix EM
# ---------------------------------------------------------------------------


def _binary_to_multiclass(a: LabelMatrix) -> MulticlassLabels:
    return MulticlassLabels(
        n_samples=a.n_samples,
        n_workers=a.n_workers,
        n_classes=2,
        samples=a.samples,
        workers=a.workers,
        classes=(a.labels > 0).astype(np.int64),  # class 0 = -1, class 1 = +1
    )


def dawid_skene_em_multiclass(
    data: MulticlassLabels,
    opts: EmOptions | None = None,
    classes: tuple | None = None,
    hard_init: bool = False,
    init_diagonal: float = 0.8,
) -> tuple[ConfusionModel, np.ndarray]:
    """Confusion-matrix EM over J classes; returns the model and class posteriors.

    Initialization puts ``init_diagonal`` on the diagonal of every confusion
    matrix (uniform off-diagonal) and 1/J on the class priors; ``hard_init``
    restores the identity-matrix start, softened only by the log clamp.
    """
    opts = opts or EmOptions()
    n, r, j = data.n_samples, data.n_workers, data.n_classes
    s, w, c = data.samples, data.workers, data.classes
    if n < 1 or np.bincount(s, minlength=n).min() < 1:
        raise DomainError("every sample needs at least one label")
    diag = 1.0 if hard_init else float(init_diagonal)
    if not 0.0 < diag <= 1.0 or (j > 1 and diag < 1.0 / j):
        raise DomainError("init_diagonal must lie in (1/J, 1]")
    off = (1.0 - diag) / (j - 1) if j > 1 else 0.0
    pi = np.full((r, j, j), off)
    pi[:, np.arange(j), np.arange(j)] = diag
    priors = np.full(j, 1.0 / j)
    flat_key = w * j + c
    history: list[float] = []
    converged = False
    t_post = np.full((n, j), 1.0 / j)
    it = 0
    for it in range(1, opts.max_iter + 1):
        # E step: class posteriors per sample
        log_pi = np.log(_clamp(pi))
        lt = np.empty((n, j))
        for q in range(j):
            lt[:, q] = np.bincount(s, weights=log_pi[w, q, c], minlength=n)
        lt += np.log(_clamp(priors))[None, :]
        m = lt.max(axis=1, keepdims=True)
        norm = m[:, 0] + np.log(np.exp(lt - m).sum(axis=1))
        history.append(float(norm.sum()))
        t_post = np.exp(lt - norm[:, None])
        # M step: confusion rows and class priors from the posterior counts
        numer = np.empty((r, j, j))
        for q in range(j):
            numer[:, q, :] = np.bincount(
                flat_key, weights=t_post[s, q], minlength=r * j
            ).reshape(r, j)
        denom = numer.sum(axis=2, keepdims=True)
        new_pi = np.divide(numer, denom, out=np.full_like(numer, 1.0 / j), where=denom > 0)
        new_pi = _clamp(new_pi)
        new_pi /= new_pi.sum(axis=2, keepdims=True)
        new_priors = t_post.mean(axis=0)
        delta = max(float(np.abs(new_pi - pi).max()), float(np.abs(new_priors - priors).max()))
        pi, priors = new_pi, new_priors
        if delta < opts.tol:
            converged = True
            break
    model = ConfusionModel(
        pi,
        priors,
        classes=classes if classes is not None else tuple(range(j)),
        converged=converged,
        n_iter=it,
        objective_history=tuple(history),
    )
    return model, t_post


def dawid_skene_em(
    a: LabelMatrix,
    opts: EmOptions | None = None,
    hard_init: bool = False,
    init_diagonal: float = 0.8,
) -> tuple[ConfusionModel, EstimateSet]:
    """Binary Dawid-Skene: classes are (-1, +1) and the posterior is P(+1)."""
    model, t_post = dawid_skene_em_multiclass(
        _binary_to_multiclass(a),
        opts=opts,
        classes=(-1, 1),
        hard_init=hard_init,
        init_diagonal=init_diagonal,
    )
    return model, EstimateSet.from_posterior(t_post[:, 1])


# ---------------------------------------------------------------------------
# Bayesian sensitivity/specificity EM
# ---------------------------------------------------------------------------


def bayes_sensspec_em(
    a: LabelMatrix,
    priors: SensSpecPriors | None = None,
    opts: EmOptions | None = None,
) -> tuple[SensSpecModel, EstimateSet]:
    """MAP-EM for per-worker sensitivity/specificity under beta priors.

    The closed-form updates use indicator semantics: a response counts
    toward sensitivity when it equals +1 and toward specificity when it
    equals -1, each weighted by the sample's class responsibility.  The
    recorded objective is the log posterior (likelihood plus prior terms),
    which MAP-EM never decreases.
    """
    pri = priors or SensSpecPriors()
    opts = opts or EmOptions()
    s, w, v = a.samples, a.workers, a.labels
    pos = v > 0
    n = a.n_samples
    alpha = np.full(a.n_workers, pri.a1 / (pri.a1 + pri.a2))
    beta = np.full(a.n_workers, pri.b1 / (pri.b1 + pri.b2))
    p_plus = pri.p1 / (pri.p1 + pri.p2)
    labeled = np.bincount(w, minlength=a.n_workers) > 0

    def log_posterior_terms(mu_free: np.ndarray) -> float:
        lpos, lneg = _sample_logits(a, SensSpecModel(alpha, beta, p_plus, pri))
        ll = float(np.logaddexp(lpos, lneg).sum())
        al, be = _clamp(alpha[labeled]), _clamp(beta[labeled])
        lp = float(
            ((pri.a1 - 1) * np.log(al) + (pri.a2 - 1) * np.log1p(-al)).sum()
            + ((pri.b1 - 1) * np.log(be) + (pri.b2 - 1) * np.log1p(-be)).sum()
        )
        pp = float(np.clip(p_plus, PROB_EPS, 1 - PROB_EPS))
        lp += (pri.p1 - 1) * math.log(pp) + (pri.p2 - 1) * math.log1p(-pp)
        return ll + lp

    history: list[float] = []
    converged = False
    mu = np.full(n, p_plus)
    it = 0
    for it in range(1, opts.max_iter + 1):
        # E step
        lpos, lneg = _sample_logits(a, SensSpecModel(alpha, beta, p_plus, pri))
        mu = _posterior_from_logits(lpos, lneg)
        # M step (beta-posterior modes)
        mu_e = mu[s]
        sens_num = pri.a1 - 1.0 + np.bincount(w, weights=np.where(pos, mu_e, 0.0), minlength=a.n_workers)
        sens_den = pri.a1 + pri.a2 - 2.0 + np.bincount(w, weights=mu_e, minlength=a.n_workers)
        spec_num = pri.b1 - 1.0 + np.bincount(
            w, weights=np.where(pos, 0.0, 1.0 - mu_e), minlength=a.n_workers
        )
        spec_den = pri.b1 + pri.b2 - 2.0 + np.bincount(w, weights=1.0 - mu_e, minlength=a.n_workers)
        new_alpha = _clamp(sens_num / sens_den)
        new_beta = _clamp(spec_num / spec_den)
        new_p = float(
            np.clip((pri.p1 - 1.0 + mu.sum()) / (pri.p1 + pri.p2 - 2.0 + n), PROB_EPS, 1 - PROB_EPS)
        )
        delta = max(
            float(np.abs(new_alpha - alpha).max()) if alpha.size else 0.0,
            float(np.abs(new_beta - beta).max()) if beta.size else 0.0,
            abs(new_p - p_plus),
        )
        alpha, beta, p_plus = new_alpha, new_beta, new_p
        history.append(log_posterior_terms(mu))
        if delta < opts.tol:
            converged = True
            break
    model = SensSpecModel(
        alpha,
        beta,
        p_plus,
        pri,
        converged=converged,
        n_iter=it,
        objective_history=tuple(history),
    )
    lpos, lneg = _sample_logits(a, model)
    return model, EstimateSet.from_posterior(_posterior_from_logits(lpos, lneg))


# ---------------------------------------------------------------------------
# GLAD EM (ability x inverse difficulty logistic model)
# ---------------------------------------------------------------------------


def _glad_q_and_grads(
    s: np.ndarray,
    w: np.ndarray,
    agrees_weight: np.ndarray,
    ability: np.ndarray,
    log_inv_diff: np.ndarray,
    n_samples: int,
    n_workers: int,
    want_grads: bool = True,
):
    """Expected complete-data log-likelihood term and its analytic gradients.

    ``agrees_weight`` is per edge the posterior probability that the response
    matches the latent label; the gradient wrt the product alpha*beta is then
    (weight - sigma).  The class-prior part of Q is constant in the
    parameters and omitted.
    """
    inv_diff = np.exp(log_inv_diff)
    x = ability[w] * inv_diff[s]
    sig = expit(x)
    sig_c = _clamp(sig)
    q = float((agrees_weight * np.log(sig_c) + (1.0 - agrees_weight) * np.log1p(-sig_c)).sum())
    if not want_grads:
        return q, None, None
    resid = agrees_weight - sig
    g_ability = np.bincount(w, weights=resid * inv_diff[s], minlength=n_workers)
    g_log_inv_diff = np.bincount(s, weights=resid * ability[w], minlength=n_samples) * inv_diff
    return q, g_ability, g_log_inv_diff


def glad_em(
    a: LabelMatrix,
    opts: EmOptions | None = None,
    positive_prior: float = 0.5,
    max_inner_steps: int = 25,
) -> tuple[GladModel, EstimateSet]:
    """EM for the logistic ability/difficulty model.

    The E step is the closed-form posterior over latent labels; the M step
    runs gradient ascent with a backtracking line search on worker abilities
    and log inverse difficulties (keeping difficulties positive).  The
    recorded objective is the observed-data log-likelihood, which every
    accepted step can only improve.
    """
    opts = opts or EmOptions()
    if not 0.0 < positive_prior < 1.0:
        raise DomainError("positive_prior must lie strictly inside (0, 1)")
    s, w, v = a.samples, a.workers, a.labels
    if a.n_samples < 1 or np.bincount(s, minlength=a.n_samples).min() < 1:
        raise DomainError("every sample needs at least one label")
    pos = v > 0
    ability = np.ones(a.n_workers)
    log_inv_diff = np.zeros(a.n_samples)

    def observed_ll() -> float:
        lpos, lneg = _sample_logits(
            a, GladModel(ability, np.exp(log_inv_diff), positive_prior)
        )
        return float(np.logaddexp(lpos, lneg).sum())

    history: list[float] = []
    converged = False
    mu = np.full(a.n_samples, positive_prior)
    it = 0
    for it in range(1, opts.max_iter + 1):
        # E step
        lpos, lneg = _sample_logits(
            a, GladModel(ability, np.exp(log_inv_diff), positive_prior)
        )
        mu = _posterior_from_logits(lpos, lneg)
        agrees_weight = np.where(pos, mu[s], 1.0 - mu[s])
        # M step: ascent on Q with backtracking
        prev_ability = ability.copy()
        prev_log_inv_diff = log_inv_diff.copy()
        step = 1.0
        q_cur, g_a, g_b = _glad_q_and_grads(
            s, w, agrees_weight, ability, log_inv_diff, a.n_samples, a.n_workers
        )
        for _ in range(max_inner_steps):
            grad_norm = max(
                float(np.abs(g_a).max()) if g_a.size else 0.0, float(np.abs(g_b).max())
            )
            if grad_norm < 1e-8:
                break
            accepted = False
            while step > 1e-12:
                cand_a = ability + step * g_a
                cand_b = log_inv_diff + step * g_b
                q_new, _, _ = _glad_q_and_grads(
                    s, w, agrees_weight, cand_a, cand_b, a.n_samples, a.n_workers, want_grads=False
                )
                if q_new >= q_cur:
                    ability, log_inv_diff = cand_a, cand_b
                    q_cur = q_new
                    accepted = True
                    step *= 1.5
                    break
                step *= 0.5
            if not accepted:
                break
            q_cur, g_a, g_b = _glad_q_and_grads(
                s, w, agrees_weight, ability, log_inv_diff, a.n_samples, a.n_workers
            )
        history.append(observed_ll())
        delta = max(
            float(np.abs(ability - prev_ability).max()) if ability.size else 0.0,
            float(np.abs(log_inv_diff - prev_log_inv_diff).max()),
        )
        if delta < opts.tol:
            converged = True
            break
    model = GladModel(
        ability,
        np.exp(log_inv_diff),
        positive_prior,
        converged=converged,
        n_iter=it,
        objective_history=tuple(history),
    )
    lpos, lneg = _sample_logits(a, model)
    return model, EstimateSet.from_posterior(_posterior_from_logits(lpos, lneg))


# ---------------------------------------------------------------------------
# Reliability message passing and its spectral simplification
# ---------------------------------------------------------------------------


def kos_iterate(
    a: LabelMatrix,
    k_max: int,
    seed: int = 0,
    init: np.ndarray | None = None,
) -> tuple[ReliabilityMessages, EstimateSet]:
    """Iterative reliability message passing on the sample/worker graph.

    Messages start from N(1, 1) draws (or an explicit ``init`` vector, one
    value per entry of the matrix).  Each round updates sample-to-worker and
    worker-to-sample messages with the destination edge excluded; the final
    per-sample total aggregates the worker messages of the round before the
    last, and the hard label is its sign (0 counts as +1).  Messages are not
    renormalized, matching the procedure exactly, so magnitudes grow with
    ``k_max``.
    """
    if not isinstance(k_max, int) or k_max < 1:
        raise DomainError(f"k_max must be a positive integer, got {k_max!r}")
    s, w = a.samples, a.workers
    av = a.labels.astype(np.float64)
    n_e = av.size
    if init is not None:
        p = np.asarray(init, dtype=np.float64)
        if p.shape != (n_e,):
            raise DomainError("init must provide one message per matrix entry")
        p = p.copy()
    else:
        p = np.random.default_rng(seed).normal(1.0, 1.0, n_e)
    p_prev = p.copy()
    s_msg = np.zeros(n_e)
    for _ in range(k_max):
        p_prev = p
        ap = av * p
        totals_s = np.bincount(s, weights=ap, minlength=a.n_samples)
        s_msg = totals_s[s] - ap
        asg = av * s_msg
        totals_w = np.bincount(w, weights=asg, minlength=a.n_workers)
        p = totals_w[w] - asg
    totals = np.bincount(s, weights=av * p_prev, minlength=a.n_samples)
    messages = ReliabilityMessages(
        samples=s.copy(), workers=w.copy(), sample_to_worker=s_msg,
        worker_to_sample=p, totals=totals,
    )
    peak = np.abs(totals).max()
    posterior = np.full(a.n_samples, 0.5) if peak == 0 else 0.5 + 0.5 * totals / peak
    return messages, EstimateSet.from_posterior(posterior)


def spectral_estimate(a: LabelMatrix, iters: int = 1000, seed: int = 0) -> EstimateSet:
    """Leading singular pair by power iteration, signs fixed by the mass rule.

    The right singular vector's positive-coordinate mass decides the global
    sign: when it dominates, labels are sign(u); otherwise sign(-u).
    """
    if not isinstance(iters, int) or iters < 1:
        raise DomainError(f"iters must be a positive integer, got {iters!r}")
    dense = a.to_dense().astype(np.float64)
    if a.n_entries == 0:
        raise DomainError("spectral estimate needs a nonzero matrix")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(a.n_workers)
    v /= np.linalg.norm(v)
    u = np.zeros(a.n_samples)
    for _ in range(iters):
        u = dense @ v
        nu = np.linalg.norm(u)
        if nu == 0.0:
            v = rng.standard_normal(a.n_workers)
            v /= np.linalg.norm(v)
            continue
        u /= nu
        v_new = dense.T @ u
        nv = np.linalg.norm(v_new)
        if nv == 0.0:
            break
        v_new /= nv
        if np.linalg.norm(v_new - v) < 1e-13:
            v = v_new
            break
        v = v_new
    mass_pos = float((v[v >= 0] ** 2).sum())
    mass_neg = float((v[v < 0] ** 2).sum())
    scores = u if mass_pos >= mass_neg else -u
    peak = np.abs(scores).max()
    posterior = np.full(a.n_samples, 0.5) if peak == 0 else 0.5 + 0.5 * scores / peak
    return EstimateSet.from_posterior(posterior)
