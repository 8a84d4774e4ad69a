"""Command-line experiment runner.

Subcommands: run (single condition), compare (full plan), report (re-render
from a saved experiment), bench (objective suite sweep, optionally timing
the kernel backends against each other). Exit codes: 0 success, 2
configuration error, 3 evaluator failure.
"""

from __future__ import annotations

import argparse
import shlex
import statistics
import sys
import time
from pathlib import Path

from . import kernels
from .harness import (
    DEFAULT_CONDITIONS,
    REPORT_FORMATS,
    ComparisonReport,
    Condition,
    ExperimentPlan,
    render_report,
    resolve_objective,
    run_comparison,
)
from .protocol import SubprocessEvaluator
from .runlog import RunLog
from .space import EvaluatorFailure, make_space
from .strategies import STRATEGY_IDS, run as run_search

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EVALUATOR = 3


def _parse_space(text: str):
    try:
        n_models, n_layers = (int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected --space N,L (e.g. 2,96)")
    return n_models, n_layers


def _parse_seeds(text: str):
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected --seeds n,m,...")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mergebbo")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one strategy against one objective")
    run_p.add_argument("--objective", default="toy-merge")
    run_p.add_argument("--strategy", default="structured", choices=STRATEGY_IDS)
    run_p.add_argument("--budget", type=int, default=10)
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--space", type=_parse_space, default=(2, 4))
    run_p.add_argument("--instance-seed", type=int, default=0)
    run_p.add_argument("--out", default="runs")
    run_p.add_argument(
        "--evaluator-cmd",
        default=None,
        help="argv of an external evaluator; replaces --objective",
    )

    cmp_p = sub.add_parser("compare", help="run the full condition comparison")
    cmp_p.add_argument("--objective", default="toy-merge")
    cmp_p.add_argument("--budget", type=int, default=10)
    cmp_p.add_argument("--seed", type=int, default=None)
    cmp_p.add_argument("--seeds", type=_parse_seeds, default=(0,))
    cmp_p.add_argument("--space", type=_parse_space, default=(2, 4))
    cmp_p.add_argument("--instance-seed", type=int, default=0)
    cmp_p.add_argument("--out", default="runs")
    cmp_p.add_argument(
        "--conditions",
        default=",".join(label for label, _ in DEFAULT_CONDITIONS),
        help="comma-separated strategy ids (baseline, ps, unstructured, structured, cma, conditional)",
    )
    cmp_p.add_argument("--format", default="table-text", choices=REPORT_FORMATS)

    rep_p = sub.add_parser("report", help="re-render a saved experiment report")
    rep_p.add_argument("--dir", required=True, help="experiment directory (exp-*)")
    rep_p.add_argument("--format", default="table-text", choices=REPORT_FORMATS)

    bench_p = sub.add_parser("bench", help="sweep strategies over the objective suite")
    bench_p.add_argument("--sizes", type=_parse_seeds, default=(8, 32))
    bench_p.add_argument("--budget-multiplier", type=int, default=10)
    bench_p.add_argument("--seeds", type=_parse_seeds, default=(0, 1, 2))
    bench_p.add_argument("--kernels", action="store_true", help="time the kernel backends")
    return parser


def _cmd_run(args) -> int:
    n_models, n_layers = args.space
    space = make_space(n_models, n_layers)
    objective = None
    try:
        if args.evaluator_cmd:
            objective = SubprocessEvaluator(
                shlex.split(args.evaluator_cmd), space, objective_id=args.objective
            )
        else:
            objective = resolve_objective(args.objective, space, args.instance_seed)
        log = run_search(args.strategy, objective, args.budget, args.seed)
    except EvaluatorFailure as failure:
        print(f"evaluator failure: {failure}", file=sys.stderr)
        if failure.partial_log is not None:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            failure.partial_log.save(out / f"{args.strategy}-seed{args.seed}-partial.jsonl")
        return EXIT_EVALUATOR
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    finally:
        if objective is not None:
            objective.close()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{args.strategy}-seed{args.seed}.jsonl"
    log.save(path)
    best = min(r.objective for r in log.records)
    print(f"wrote {path} ({len(log)} evaluations, best objective {best:.6g})")
    return EXIT_OK


def _cmd_compare(args) -> int:
    seeds = (args.seed,) if args.seed is not None else args.seeds
    n_models, n_layers = args.space
    try:
        conditions = tuple(
            Condition(label=cid, strategy_id=cid, objective_id=args.objective)
            for cid in args.conditions.split(",")
        )
        plan = ExperimentPlan(
            conditions=conditions,
            budget=args.budget,
            seeds=seeds,
            output_dir=args.out,
            n_models=n_models,
            n_layers=n_layers,
            instance_seed=args.instance_seed,
        )
        report = run_comparison(plan)
    except (ValueError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(render_report(report, args.format), end="")
    print(f"\nexperiment directory: {Path(args.out) / ('exp-' + plan.plan_hash())}")
    return EXIT_OK


def _cmd_report(args) -> int:
    exp_dir = Path(args.dir)
    report_path = exp_dir / "report.json"
    if not report_path.exists():
        logs_dir = exp_dir / "logs"
        if not logs_dir.exists():
            print(f"configuration error: {exp_dir} has no report.json or logs/", file=sys.stderr)
            return EXIT_CONFIG
        logs = {}
        for path in sorted(logs_dir.glob("*.jsonl")):
            label = path.stem.rsplit("-seed", 1)[0]
            logs.setdefault(label, []).append(RunLog.load(path))
        rows = []
        for label, condition_logs in logs.items():
            scores = [log.best_score for log in condition_logs if len(log)]
            best = None
            if scores and all(s is not None for s in scores):
                best = float(statistics.median(scores))
            rows.append(
                {
                    "label": label,
                    "strategy_id": condition_logs[0].header.get("strategy", label),
                    "best_score": best,
                    "evaluations": condition_logs[0].header.get("budget", len(condition_logs[0])),
                }
            )
        report = ComparisonReport(rows=rows, deltas={}, reduction=None, active_trace=None)
    else:
        report = ComparisonReport.from_json(report_path.read_text(encoding="utf-8"))
    print(render_report(report, args.format), end="")
    return EXIT_OK


def _bench_kernels() -> None:
    import numpy as np

    from .objectives import make_teacher_instance

    instance = make_teacher_instance(0, n_layers=96)
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, instance.space.m).astype(np.int8)
    x = rng.uniform(0.0, 2.0, instance.space.m)
    print("kernel backends:", ", ".join(kernels.available_backends()))
    for name in kernels.available_backends():
        backend = kernels.get_backend(name)
        start = time.perf_counter()
        reps = 200
        for _ in range(reps):
            backend.merged_mse(
                bits, x, instance.weights, instance.biases, instance.inputs, instance.targets
            )
        elapsed = (time.perf_counter() - start) / reps
        print(f"  {name:7s} merged stack eval (m=192, d=4, 16 points): {1e6 * elapsed:8.1f} us")


def _cmd_bench(args) -> int:
    if args.kernels:
        _bench_kernels()
        return EXIT_OK
    print("objective,m,strategy,median_best_objective,budget")
    for size in args.sizes:
        if size % 2 != 0:
            print(f"configuration error: suite sizes must be even, got {size}", file=sys.stderr)
            return EXIT_CONFIG
        space = make_space(2, size // 2)
        budget = args.budget_multiplier * space.m
        for objective_id in ("masked-sphere", "toy-merge"):
            for strategy_id in ("unstructured", "structured", "conditional"):
                bests = []
                for seed in args.seeds:
                    objective = resolve_objective(objective_id, space, instance_seed=0)
                    log = run_search(strategy_id, objective, budget, seed)
                    bests.append(log.best_objective)
                print(
                    f"{objective_id},{space.m},{strategy_id},"
                    f"{statistics.median(bests):.6g},{budget}"
                )
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "compare":
        return _cmd_compare(args)
    if args.command == "report":
        return _cmd_report(args)
    if args.command == "bench":
        return _cmd_bench(args)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
