"""Scalar special-function kernels shared by the estimators.

Everything here is a pure function of its arguments and safe to call from
any thread.  The kernels are deliberately scalar: vectorized callers wrap
them or use the closed-form expressions directly on arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

# Probabilities entering a log are clamped to this band so EM likelihoods
# never produce -inf; the clamp is far below any tolerance used by the fits.
PROB_EPS = 1e-12

_CF_MAX_ITER = 300
_CF_EPS = 1e-15
_CF_FLOOR = 1e-300


@dataclass(frozen=True)
class ConfidenceSpec:
    """Two-sided confidence request: significance level and degrees of freedom.

    ``alpha`` is the total two-sided significance; ``alpha = 1`` is the
    degenerate midpoint request (quantile 0.5, i.e. t = 0).
    """

    alpha: float
    dof: int

    def __post_init__(self) -> None:
        if not (isinstance(self.alpha, (int, float)) and math.isfinite(self.alpha)):
            raise DomainError(f"alpha must be a finite number, got {self.alpha!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"alpha must be in (0, 1], got {self.alpha}")
        if not isinstance(self.dof, int) or self.dof < 1:
            raise DomainError(f"dof must be a positive integer, got {self.dof!r}")


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_FLOOR:
        d = _CF_FLOOR
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FLOOR:
            d = _CF_FLOOR
        c = 1.0 + aa / c
        if abs(c) < _CF_FLOOR:
            c = _CF_FLOOR
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_FLOOR:
            d = _CF_FLOOR
        c = 1.0 + aa / c
        if abs(c) < _CF_FLOOR:
            c = _CF_FLOOR
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise DomainError(
        f"incomplete beta continued fraction failed to converge for a={a}, b={b}, x={x}"
    )


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta function I_x(a, b).

    This is the CDF of a Beta(a, b) variate at ``x``.  Evaluated through the
    continued fraction with the symmetry switch I_x(a,b) = 1 - I_{1-x}(b,a)
    applied past the crossover point, which keeps the fraction convergent on
    both ends of the domain.
    """
    if not (math.isfinite(a) and math.isfinite(b) and a > 0.0 and b > 0.0):
        raise DomainError(f"shape parameters must be positive, got a={a}, b={b}")
    if not (isinstance(x, (int, float)) and math.isfinite(x)) or x < 0.0 or x > 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        value = front * _betacf(a, b, x) / a
    else:
        value = 1.0 - front * _betacf(b, a, 1.0 - x) / b
    return min(1.0, max(0.0, value))


def _student_t_cdf(t: float, dof: int) -> float:
    """CDF of Student's t with ``dof`` degrees of freedom."""
    if t == 0.0:
        return 0.5
    tail = 0.5 * reg_inc_beta(dof / (dof + t * t), 0.5 * dof, 0.5)
    return 1.0 - tail if t > 0.0 else tail


def student_t_quantile(spec: ConfidenceSpec) -> float:
    """Upper two-sided t quantile: the t with P(T_dof <= t) = 1 - alpha/2.

    Positive for alpha < 1 and decreasing in ``dof`` toward the Gaussian
    quantile.  Solved by bracketed bisection on the t CDF.
    """
    p = 1.0 - spec.alpha / 2.0
    if p == 0.5:
        return 0.0
    hi = 1.0
    while _student_t_cdf(hi, spec.dof) < p:
        hi *= 2.0
        if hi > 1e12:
            raise DomainError(f"t quantile out of range for alpha={spec.alpha}")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _student_t_cdf(mid, spec.dof) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _std_normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def trunc_gauss_density(
    p_new: float, p_old: float, sigma: float, lo: float, hi: float
) -> float:
    """Density of a Gaussian step from ``p_old`` truncated to [lo, hi].

    phi((p_new - p_old)/sigma)/sigma renormalized to integrate to 1 over
    the window; zero outside it.
    """
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError(f"window must satisfy lo < hi, got [{lo}, {hi}]")
    if not (math.isfinite(sigma) and sigma > 0.0):
        raise DomainError(f"sigma must be positive, got {sigma}")
    if p_new < lo or p_new > hi:
        return 0.0
    z = _std_normal_cdf((hi - p_old) / sigma) - _std_normal_cdf((lo - p_old) / sigma)
    if z <= 0.0:
        raise DomainError(
            f"truncation normalizer underflowed for p_old={p_old}, sigma={sigma}"
        )
    u = (p_new - p_old) / sigma
    phi = math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
    return phi / (sigma * z)


def binary_entropy(p: float) -> float:
    """Entropy of a Bernoulli(p) in bits; 0*lg(0) is taken as 0."""
    if not (isinstance(p, (int, float)) and math.isfinite(p)) or p < 0.0 or p > 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    if p == 0.0 or p == 1.0:
        return 0.0
    q = 1.0 - p
    return -(p * math.log2(p)) - (q * math.log2(q))


def sigmoid(t: float) -> float:
    """Logistic function 1/(1 + exp(-t)), stable for large |t|."""
    if t >= 0.0:
        z = math.exp(-t)
        return 1.0 / (1.0 + z)
    z = math.exp(t)
    return z / (1.0 + z)
