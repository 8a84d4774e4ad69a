"""Experiment harness: planned condition comparisons, reports and traces.

A plan runs every condition with the same seed list, aggregates best scores
as medians across seeds, and persists everything needed to regenerate the
report: a header, one JSON-lines log per (condition, seed), and the report
itself. Baseline and weight-averaging rows are single fixed evaluations
(reported as "N/A" and 1 evaluations respectively); search rows consume the
plan budget.
"""

from __future__ import annotations

import hashlib
import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .objectives import ToyMergeObjective, make_teacher_instance, random_masked_sphere
from .runlog import RunLog, RunRecord
from .space import EvaluatorFailure, MixedSpace, effective_reduction, make_space
from .strategies import STRATEGY_IDS, run

__all__ = [
    "Condition",
    "ExperimentPlan",
    "ComparisonReport",
    "resolve_objective",
    "run_comparison",
    "finding_metrics",
    "render_report",
    "emit_traces",
    "DEFAULT_CONDITIONS",
]

OBJECTIVE_IDS = ("toy-merge", "masked-sphere")
SPECIAL_CONDITION_IDS = ("baseline", "ps")
REPORT_FORMATS = ("table-text", "csv", "json")

DEFAULT_CONDITIONS = (
    ("baseline", "baseline"),
    ("ps", "ps"),
    ("unstructured", "unstructured"),
    ("structured", "structured"),
)


@dataclass(frozen=True)
class Condition:
    label: str
    strategy_id: str
    objective_id: str


@dataclass(frozen=True)
class ExperimentPlan:
    conditions: tuple[Condition, ...]
    budget: int
    seeds: tuple[int, ...]
    output_dir: str
    n_models: int = 2
    n_layers: int = 4
    instance_seed: int = 0

    def __post_init__(self):
        if not self.conditions:
            raise ValueError("plan needs at least one condition")
        if not self.seeds:
            raise ValueError("plan needs at least one seed")
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        labels = [c.label for c in self.conditions]
        if len(set(labels)) != len(labels):
            raise ValueError("condition labels must be unique")
        for cond in self.conditions:
            if cond.strategy_id not in STRATEGY_IDS + SPECIAL_CONDITION_IDS:
                raise ValueError(f"unknown strategy {cond.strategy_id!r}")
            if cond.objective_id not in OBJECTIVE_IDS:
                raise ValueError(f"unknown objective {cond.objective_id!r}")

    def space(self) -> MixedSpace:
        return make_space(self.n_models, self.n_layers)

    def to_obj(self) -> dict:
        return {
            "conditions": [
                {"label": c.label, "strategy_id": c.strategy_id, "objective_id": c.objective_id}
                for c in self.conditions
            ],
            "budget": self.budget,
            "seeds": list(self.seeds),
            "n_models": self.n_models,
            "n_layers": self.n_layers,
            "instance_seed": self.instance_seed,
        }

    def plan_hash(self) -> str:
        payload = json.dumps(self.to_obj(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


@dataclass
class ComparisonReport:
    rows: list[dict]
    deltas: dict
    reduction: Optional[dict]
    active_trace: Optional[dict]
    meta: dict = field(default_factory=dict)

    def to_obj(self) -> dict:
        return {
            "rows": self.rows,
            "deltas": self.deltas,
            "reduction": self.reduction,
            "active_trace": self.active_trace,
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), indent=1, sort_keys=True)

    @classmethod
    def from_obj(cls, obj: dict) -> "ComparisonReport":
        return cls(
            rows=obj["rows"],
            deltas=obj["deltas"],
            reduction=obj.get("reduction"),
            active_trace=obj.get("active_trace"),
            meta=obj.get("meta", {}),
        )

    @classmethod
    def from_json(cls, text: str) -> "ComparisonReport":
        return cls.from_obj(json.loads(text))


def resolve_objective(objective_id: str, space: MixedSpace, instance_seed: int = 0):
    if objective_id == "toy-merge":
        return make_teacher_instance(instance_seed, n_layers=space.n_layers)
    if objective_id == "masked-sphere":
        return random_masked_sphere(instance_seed, space)
    raise ValueError(f"unknown objective {objective_id!r}")


def _special_run(condition: Condition, objective, seed: int) -> RunLog:
    """Single fixed evaluation for the baseline and weight-averaging rows."""
    if not isinstance(objective, ToyMergeObjective):
        raise ValueError(
            f"condition {condition.label!r} needs a layer-merge objective, "
            f"got {condition.objective_id!r}"
        )
    header = {
        "strategy": condition.strategy_id,
        "seed": seed,
        "budget": 1,
        "space": {
            "n_models": objective.space.n_models,
            "n_layers": objective.space.n_layers,
            "x_lower": objective.space.x_lower,
            "x_upper": objective.space.x_upper,
        },
        "objective": type(objective).__name__,
        "fixture_hash": objective.fingerprint(),
    }
    log = RunLog(header)
    if condition.strategy_id == "baseline":
        cand = objective.baseline_candidate()
        result = objective.evaluate(cand)
        digest = cand.digest()
        active = cand.z.active
    else:
        result = objective.ps_objective().evaluate(0.5)
        digest = "ps-alpha-0.5"
        active = objective.space.m
    log.append(
        RunRecord(
            iter=0,
            eval_id=0,
            objective=result.objective,
            score=result.score,
            active=active,
            best_objective=result.objective,
            candidate_digest=digest,
        )
    )
    return log


def run_comparison(plan: ExperimentPlan, objectives: Optional[dict] = None) -> ComparisonReport:
    """Run all (condition, seed) pairs, aggregate and persist the report.

    Every condition consumes the identical seed list. A failing external
    evaluator marks its condition as failed; other conditions still run.
    """
    space = plan.space()
    resolved: dict = dict(objectives or {})
    for cond in plan.conditions:
        if cond.objective_id not in resolved:
            resolved[cond.objective_id] = resolve_objective(
                cond.objective_id, space, plan.instance_seed
            )

    out_root = Path(plan.output_dir) / f"exp-{plan.plan_hash()}"
    logs_dir = out_root / "logs"
    logs_dir.mkdir(parents=True, exist_ok=True)

    logs_by_label: dict[str, list[RunLog]] = {}
    rows = []
    for cond in plan.conditions:
        objective = resolved[cond.objective_id]
        logs: list[RunLog] = []
        try:
            if cond.strategy_id in SPECIAL_CONDITION_IDS:
                logs.append(_special_run(cond, objective, plan.seeds[0]))
                evaluations: object = "N/A" if cond.strategy_id == "baseline" else 1
            else:
                for seed in plan.seeds:
                    logs.append(run(cond.strategy_id, objective, plan.budget, seed))
                evaluations = plan.budget
        except EvaluatorFailure as failure:
            if failure.partial_log is not None:
                logs.append(failure.partial_log)
            rows.append(
                {
                    "label": cond.label,
                    "strategy_id": cond.strategy_id,
                    "best_score": None,
                    "evaluations": "failed",
                }
            )
            logs_by_label[cond.label] = logs
            for i, log in enumerate(logs):
                log.save(logs_dir / f"{cond.label}-seed{log.header.get('seed', i)}.jsonl")
            continue

        logs_by_label[cond.label] = logs
        for log in logs:
            log.save(logs_dir / f"{cond.label}-seed{log.header['seed']}.jsonl")
        scores = [log.best_score for log in logs]
        best_score = None
        if all(s is not None for s in scores):
            best_score = float(statistics.median(scores))
        rows.append(
            {
                "label": cond.label,
                "strategy_id": cond.strategy_id,
                "best_score": best_score,
                # median across seeds plus the raw per-seed values
                "best_score_per_seed": scores,
                "evaluations": evaluations,
            }
        )

    deltas = {}
    by_strategy = {row["strategy_id"]: row for row in rows}
    structured = by_strategy.get("structured")
    unstructured = by_strategy.get("unstructured")
    if (
        structured
        and unstructured
        and structured["best_score"] is not None
        and unstructured["best_score"] is not None
    ):
        deltas["structured_minus_unstructured"] = 100.0 * (
            structured["best_score"] - unstructured["best_score"]
        )

    reduction = None
    active_trace = None
    structured_logs = [
        log
        for cond in plan.conditions
        if cond.strategy_id == "structured"
        for log in logs_by_label.get(cond.label, [])
    ]
    if structured_logs and all(len(log) > 0 for log in structured_logs):
        metrics = finding_metrics(structured_logs)
        reduction = {
            "mean_active": metrics["mean_active"],
            "effective_reduction_pct": metrics["reduction_pct"],
        }
        active_trace = {
            "per_iteration": _per_iteration_active(structured_logs[0]),
            "min": metrics["min_active"],
            "max": metrics["max_active"],
        }

    report = ComparisonReport(
        rows=rows,
        deltas=deltas,
        reduction=reduction,
        active_trace=active_trace,
        meta={
            "plan_hash": plan.plan_hash(),
            "budget": plan.budget,
            "seeds": list(plan.seeds),
            "space": {"n_models": plan.n_models, "n_layers": plan.n_layers},
        },
    )

    (out_root / "header.json").write_text(
        json.dumps(plan.to_obj(), indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )
    (out_root / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    emit_traces(logs_by_label, out_root / "traces")
    return report


def _per_iteration_active(log: RunLog) -> list[float]:
    actives: dict[int, list[int]] = {}
    for record in log.records:
        actives.setdefault(record.iter, []).append(record.active)
    return [
        sum(vals) / len(vals) for _, vals in sorted(actives.items())
    ]


def finding_metrics(logs: Sequence[RunLog]) -> dict:
    """Mean/min/max active slots and the search-space reduction they imply."""
    if not logs or all(len(log) == 0 for log in logs):
        raise ValueError("no evaluation records to summarize")
    actives = [a for log in logs for a in log.active_counts()]
    header = logs[0].header
    space = make_space(
        header["space"]["n_models"],
        header["space"]["n_layers"],
        (header["space"]["x_lower"], header["space"]["x_upper"]),
    )
    mean_active = sum(actives) / len(actives)
    return {
        "mean_active": mean_active,
        "reduction_pct": effective_reduction(space, mean_active),
        "min_active": min(actives),
        "max_active": max(actives),
    }


def _fmt_score(score) -> str:
    if score is None:
        return "n/a"
    return f"{100.0 * score:.1f}%"


def render_report(report: ComparisonReport, format: str = "table-text") -> str:
    """Render a report as a text table, CSV, or JSON."""
    if format == "json":
        return report.to_json()
    if format == "csv":
        lines = ["method,best_accuracy,evaluations"]
        for row in report.rows:
            acc = "" if row["best_score"] is None else f"{100.0 * row['best_score']:.4f}"
            lines.append(f"{row['label']},{acc},{row['evaluations']}")
        lines.append("")
        lines.append("metric,value")
        delta = report.deltas.get("structured_minus_unstructured")
        lines.append(
            "structured_minus_unstructured_pp,"
            + ("" if delta is None else f"{delta:.4f}")
        )
        if report.reduction:
            lines.append(f"mean_active,{report.reduction['mean_active']:.4f}")
            lines.append(
                f"effective_reduction_pct,{report.reduction['effective_reduction_pct']:.4f}"
            )
        if report.active_trace:
            lines.append(f"min_active,{report.active_trace['min']}")
            lines.append(f"max_active,{report.active_trace['max']}")
        return "\n".join(lines) + "\n"
    if format == "table-text":
        header = ("Method", "Best Accuracy", "Evaluations")
        body = [
            (row["label"], _fmt_score(row["best_score"]), str(row["evaluations"]))
            for row in report.rows
        ]
        widths = [
            max(len(header[i]), *(len(r[i]) for r in body)) if body else len(header[i])
            for i in range(3)
        ]
        def fmt(cells):
            return "  ".join(c.ljust(widths[i]) for i, c in enumerate(cells)).rstrip()
        lines = [fmt(header), fmt(tuple("-" * w for w in widths))]
        lines.extend(fmt(r) for r in body)
        lines.append("")
        delta = report.deltas.get("structured_minus_unstructured")
        lines.append(
            "structured minus unstructured: "
            + ("n/a" if delta is None else f"{delta:+.1f} points")
        )
        if report.reduction:
            lines.append(
                f"mean active slots: {report.reduction['mean_active']:.1f} "
                f"(search-space reduction {report.reduction['effective_reduction_pct']:.1f}%)"
            )
        else:
            lines.append("mean active slots: n/a")
        if report.active_trace:
            lines.append(
                f"active slots per iteration: min {report.active_trace['min']}, "
                f"max {report.active_trace['max']}"
            )
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {format!r}")


def emit_traces(logs_by_label: dict[str, list[RunLog]], out_dir: str | Path) -> list[Path]:
    """Write per-condition convergence and active-count traces as CSV.

    Uses each condition's first-seed log; one row per iteration. Population
    iterations record the mean active count of the iteration.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for label, logs in logs_by_label.items():
        if not logs or len(logs[0]) == 0:
            continue
        log = logs[0]
        best_by_iter: list[tuple[int, Optional[float]]] = []
        best_score: Optional[float] = None
        current_iter = None
        for record in log.records:
            if record.score is not None:
                best_score = record.score if best_score is None else max(best_score, record.score)
            if current_iter is None or record.iter != current_iter:
                best_by_iter.append((record.iter, best_score))
                current_iter = record.iter
            else:
                best_by_iter[-1] = (record.iter, best_score)
        score_path = out_dir / f"{label}-score.csv"
        lines = ["iteration,best_so_far_score"]
        for it, score in best_by_iter:
            lines.append(f"{it},{'' if score is None else repr(score)}")
        score_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

        active_path = out_dir / f"{label}-active.csv"
        lines = ["iteration,active_count"]
        for it, mean_active in zip(
            (it for it, _ in best_by_iter), _per_iteration_active(log)
        ):
            lines.append(f"{it},{repr(mean_active)}")
        active_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.extend([score_path, active_path])
    return written
