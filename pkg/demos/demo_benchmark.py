#!/usr/bin/env python3
"""A reduced benchmark grid rendered as a paper-style markdown table.

Runs four methods at three budgets with five seeded repetitions on the
duchenne-shaped fixture (the smallest one), prints the markdown rendering,
and emits the machine-readable formats next to this script.
"""

from pathlib import Path

from crowdbench import ExperimentConfig, emit_report, render_report, run_experiment

cfg = ExperimentConfig(
    dataset="duchenne",
    methods=("majority", "uncertainty-select", "sensspec", "glad"),
    lps_grid=(1, 3, 7),
    runs=5,
    base_seed=42,
)
report = run_experiment(cfg)

print(render_report(report, "markdown-table"))
print(f"grid of {len(report.cells)} cells took {report.runtime['total_seconds']:.1f}s")

out_dir = Path(__file__).parent / "out"
for fmt in ("json", "csv", "plot-data"):
    path = emit_report(report, fmt, output_dir=str(out_dir))
    print(f"wrote {path}")
print("\nre-render later with: crowdbench report --input demos/out/report_duchenne.json "
      "--format markdown-table --out table.md")
