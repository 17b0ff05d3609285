#!/usr/bin/env python3
"""Adaptive label acquisition: how the selection criterion spends a budget.

Replays budgeted acquisition against the temp-shaped fixture with the
uniform, entropy, and uncertainty criteria, then shows the entropy
criterion's label-count concentration and each criterion's error as the
budget grows.
"""

import numpy as np

from crowdbench import adaptive_replay, fixture_pool, score

pool = fixture_pool("temp")
n = pool.n_samples
print(f"dataset: {pool.name}  ({n} samples, pool of {pool.total_labels} labels)")

budget = 3 * n
print(f"\nbudget = 3 labels per sample on average ({budget} draws)")
print(f"{'criterion':<13} {'error':>7}  {'count variance':>15}  {'samples <= 1 label':>19}")
for criterion in ("uniform", "entropy", "uncertainty"):
    trace, est = adaptive_replay(pool, budget, selector=criterion, seed=7)
    counts = np.bincount(trace.samples, minlength=n)
    err = score(est, pool.gold)
    starved = np.mean(counts <= 1)
    print(f"{criterion:<13} {err * 100:6.2f}%  {np.var(counts):15.2f}  {starved * 100:18.1f}%")

print("\nerror vs budget (majority integration):")
budgets = [n, 3 * n, 5 * n, 7 * n, 9 * n]
header = "budget/N   " + "  ".join(f"{b // n:>7d}" for b in budgets)
print(header)
for criterion in ("uniform", "entropy", "uncertainty"):
    errs = []
    for b in budgets:
        _, est = adaptive_replay(pool, b, selector=criterion, seed=11)
        errs.append(score(est, pool.gold))
    print(f"{criterion:<10} " + "  ".join(f"{e * 100:6.2f}%" for e in errs))

print("\nmodel-based uncertainty (accuracy integrator, refit every 25 draws):")
for b in (3 * n, 5 * n):
    trace, est = adaptive_replay(
        pool, b, selector="uncertainty", integrator="accuracy", refit_every=25, seed=11
    )
    print(f"  budget {b // n}N -> error {score(est, pool.gold) * 100:.2f}%")
