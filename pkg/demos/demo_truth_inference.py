#!/usr/bin/env python3
"""Batch truth inference: run every integrator on one fixture and compare.

Loads the bundled rte-shaped fixture, integrates the full label matrix with
each estimator, and prints the resulting error rates plus a peek at what
the fitted models learned about the workers.
"""

import numpy as np

from crowdbench import (
    EmOptions,
    fixture_pool,
    integrate,
    score,
)

pool = fixture_pool("rte")
matrix = pool.flatten()
print(f"dataset: {pool.name}  ({pool.n_samples} samples, {pool.n_workers} workers, "
      f"{pool.total_labels} labels)")
print()

opts = EmOptions(max_iter=200, tol=1e-6)
print(f"{'integrator':<14} {'error':>7}  notes")
models = {}
for name in ("majority", "accuracy", "sensspec", "dawid-skene", "reliability", "spectral", "glad"):
    model, est = integrate(matrix, name, opts, seed=0)
    models[name] = model
    err = score(est, pool.gold)
    note = ""
    if model is not None and hasattr(model, "n_iter"):
        note = f"converged={model.converged} after {model.n_iter} EM iterations"
    print(f"{name:<14} {err * 100:6.2f}%  {note}")

print()
acc_model = models["accuracy"]
order = np.argsort(acc_model.accuracies)
print("least reliable workers by fitted accuracy:")
for j in order[:5]:
    print(f"  {pool.worker_ids[j]}: accuracy {acc_model.accuracies[j]:.3f}")
print("most reliable workers:")
for j in order[-5:]:
    print(f"  {pool.worker_ids[j]}: accuracy {acc_model.accuracies[j]:.3f}")

glad_model = models["glad"]
hardest = np.argsort(glad_model.inverse_difficulty)[:5]
print()
print("hardest samples by fitted inverse difficulty (smaller = harder):")
for i in hardest:
    print(f"  {pool.sample_ids[i]}: 1/difficulty {glad_model.inverse_difficulty[i]:.4f}")
