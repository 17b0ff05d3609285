"""Command-line entry points.

Exit codes: 0 on success, 1 on usage errors, 2 on data errors (unreadable
or malformed inputs).  Every subcommand accepts --seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .aggregate import EmOptions
from .bench import (
    REPORT_FORMATS,
    ExperimentConfig,
    default_output_dir,
    emit_report,
    load_report,
    resolve_pool,
    run_experiment,
)
from .errors import CrowdBenchError
from .labels import SynthConfig, save_pool_csv, score, subsample, synth_generate
from .selection import INTEGRATORS, SELECTORS, adaptive_replay, integrate


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="crowdbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    agg = sub.add_parser("aggregate", parents=[], help="integrate one dataset with one method")
    agg.add_argument("--method", required=True, choices=sorted(INTEGRATORS))
    agg.add_argument("--input", required=True, help="fixture name, CSV, manifest, or pool JSON")
    agg.add_argument("--gold", default=None, help="gold sidecar CSV (for raw label CSVs)")
    agg.add_argument("--output", default=None, help="estimates CSV path")
    agg.add_argument("--model-json", default=None, help="write the fitted model here")
    agg.add_argument("--lps", type=int, default=None, help="subsample to this many labels per sample")
    agg.add_argument("--seed", type=int, default=0)
    agg.add_argument("--max-iter", type=int, default=500)
    agg.add_argument("--tol", type=float, default=1e-6)

    sim = sub.add_parser("simulate", help="adaptive budgeted label-acquisition replay")
    sim.add_argument("--input", required=True)
    sim.add_argument("--gold", default=None)
    sim.add_argument("--selector", default="uniform", choices=sorted(SELECTORS))
    sim.add_argument("--integrator", default="majority", choices=sorted(INTEGRATORS))
    group = sim.add_mutually_exclusive_group(required=True)
    group.add_argument("--budget", type=int, default=None)
    group.add_argument("--lps", type=int, default=None, help="budget = lps x n_samples")
    sim.add_argument("--refit-every", type=int, default=25)
    sim.add_argument("--trace", default=None, help="write the acquisition trace CSV here")
    sim.add_argument("--output", default=None, help="estimates CSV path")
    sim.add_argument("--seed", type=int, default=0)

    ben = sub.add_parser("bench", help="run a (method x lps x run) experiment grid")
    ben.add_argument("--config", default=None, help="JSON experiment config")
    ben.add_argument("--dataset", default=None)
    ben.add_argument("--gold", default=None)
    ben.add_argument("--methods", default=None, help="comma-separated method list")
    ben.add_argument("--lps", default=None, help="comma-separated lps grid")
    ben.add_argument("--runs", type=int, default=None)
    ben.add_argument("--refit-every", type=int, default=None)
    ben.add_argument("--workers", type=int, default=None)
    ben.add_argument("--seed", type=int, default=None)
    ben.add_argument("--out", default=None, help="output directory")
    ben.add_argument(
        "--formats",
        default="csv,markdown-table,json",
        help=f"comma-separated subset of {REPORT_FORMATS}",
    )

    syn = sub.add_parser("synth", help="generate a synthetic pool")
    syn.add_argument("--items", type=int, required=True)
    syn.add_argument("--workers", type=int, required=True)
    syn.add_argument("--lps", type=int, default=5)
    syn.add_argument("--family", default="accuracy", choices=["accuracy", "sensspec", "glad"])
    syn.add_argument("--positive-prior", type=float, default=0.5)
    syn.add_argument("--params", default=None, help="JSON distribution overrides")
    syn.add_argument("--name", default="synthetic")
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--out", default=None, help="output directory")

    rep = sub.add_parser("report", help="re-render a saved JSON report")
    rep.add_argument("--input", required=True)
    rep.add_argument("--format", required=True, choices=sorted(REPORT_FORMATS))
    rep.add_argument("--out", default=None, help="output file path")
    rep.add_argument("--seed", type=int, default=0, help="accepted for uniformity; unused")
    return parser


def _cmd_aggregate(args) -> int:
    pool = resolve_pool(args.input, args.gold)
    matrix = subsample(pool, args.lps, args.seed) if args.lps else pool.flatten()
    opts = EmOptions(max_iter=args.max_iter, tol=args.tol, seed=args.seed)
    model, est = integrate(matrix, args.method, opts, seed=args.seed)
    out = Path(args.output) if args.output else default_output_dir() / f"estimates_{pool.name}_{args.method}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    est.to_csv(out, sample_ids=pool.sample_ids)
    print(f"wrote {out} ({est.n} samples)")
    if args.model_json and model is not None:
        Path(args.model_json).write_text(json.dumps(model.to_dict(), indent=2), encoding="utf-8")
        print(f"wrote {args.model_json}")
    if pool.gold.n_labeled:
        print(f"error vs gold: {score(est, pool.gold):.4f}")
    return 0


def _cmd_simulate(args) -> int:
    pool = resolve_pool(args.input, args.gold)
    budget = args.budget if args.budget is not None else args.lps * pool.n_samples
    trace, est = adaptive_replay(
        pool,
        budget=budget,
        selector=args.selector,
        integrator=args.integrator,
        refit_every=args.refit_every,
        seed=args.seed,
    )
    if args.trace:
        trace.to_csv(args.trace)
        print(f"wrote {args.trace} ({len(trace)} steps)")
    if args.output:
        est_path = Path(args.output)
        est_path.parent.mkdir(parents=True, exist_ok=True)
        est.to_csv(est_path, sample_ids=pool.sample_ids)
        print(f"wrote {est_path}")
    if trace.exhausted:
        print(f"pool exhausted after {len(trace)} of {budget} requested labels")
    if pool.gold.n_labeled:
        print(f"error vs gold: {score(est, pool.gold):.4f}")
    return 0


def _cmd_bench(args) -> int:
    if args.config:
        cfg = ExperimentConfig.from_json(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["base_seed"] = args.seed
        if args.workers is not None:
            overrides["workers"] = args.workers
        if overrides:
            cfg = ExperimentConfig(**{**cfg.to_json_obj(), **overrides})
    else:
        if not (args.dataset and args.methods and args.lps):
            raise CrowdBenchError("bench needs --config or --dataset/--methods/--lps")
        cfg = ExperimentConfig(
            dataset=args.dataset,
            methods=tuple(m.strip() for m in args.methods.split(",") if m.strip()),
            lps_grid=tuple(int(x) for x in args.lps.split(",")),
            runs=args.runs if args.runs is not None else 20,
            base_seed=args.seed if args.seed is not None else 0,
            refit_every=args.refit_every if args.refit_every is not None else 25,
            workers=args.workers if args.workers is not None else 1,
            gold_path=args.gold,
        )
    report = run_experiment(cfg)
    out_dir = args.out or cfg.output_dir
    for fmt in (f.strip() for f in args.formats.split(",") if f.strip()):
        path = emit_report(report, fmt, output_dir=out_dir)
        print(f"wrote {path}")
    return 0


def _cmd_synth(args) -> int:
    params = json.loads(args.params) if args.params else {}
    params = {k: tuple(v) if isinstance(v, list) else v for k, v in params.items()}
    cfg = SynthConfig(
        n_samples=args.items,
        n_workers=args.workers,
        family=args.family,
        positive_prior=args.positive_prior,
        labels_per_sample=args.lps,
        params=params,
        seed=args.seed,
        name=args.name,
    )
    pool, _ = synth_generate(cfg)
    out_dir = default_output_dir(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels_path = out_dir / f"{args.name}_labels.csv"
    gold_path = out_dir / f"{args.name}_gold.csv"
    save_pool_csv(pool, labels_path, gold_path)
    manifest = {
        "name": args.name,
        "format": "triples-csv",
        "labels": labels_path.name,
        "gold": gold_path.name,
        "synthetic": True,
        "generator": {"family": args.family, "seed": args.seed},
    }
    manifest_path = out_dir / f"{args.name}_manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    for p in (labels_path, gold_path, manifest_path):
        print(f"wrote {p}")
    return 0


def _cmd_report(args) -> int:
    report = load_report(args.input)
    path = emit_report(report, args.format, path=args.out)
    print(f"wrote {path}")
    return 0


_HANDLERS = {
    "aggregate": _cmd_aggregate,
    "simulate": _cmd_simulate,
    "bench": _cmd_bench,
    "synth": _cmd_synth,
    "report": _cmd_report,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except SystemExit as exc:  # argparse --help (0) and usage errors (1)
        return exc.code if isinstance(exc.code, int) else 1
    except (CrowdBenchError, OSError, json.JSONDecodeError) as exc:
        print(f"crowdbench: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
