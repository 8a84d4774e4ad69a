"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Tolerances are fixed here and nowhere else.
"""

import json
import shutil
import statistics
import subprocess
from pathlib import Path

import numpy as np
import pytest

import oracles
from mergebbo import (
    BinaryMask,
    Candidate,
    Condition,
    ExperimentPlan,
    ScalingVector,
    SubprocessEvaluator,
    effective_reduction,
    make_space,
    make_teacher_instance,
    random_masked_sphere,
    run_comparison,
)
from mergebbo.cma import CmaCore
from mergebbo.conditional import ConditionalMixedSearch
from mergebbo.strategies import STRATEGY_IDS, StructuredSampler, run
from mergebbo.space import EvalResult

REPO_ROOT = Path(__file__).parent.parent
EVALUATOR_DIR = REPO_ROOT / "evaluator"


def report(name):
    print(f"\nACCEPTANCE PASS: {name}")


class TestC1ConditionalInertness:
    """Inactive scaling coordinates never change the objective, bit for bit."""

    def _triples(self, objective, trials, rng):
        space = objective.space
        checked = 0
        while checked < trials:
            bits = rng.integers(0, 2, space.m)
            inactive = np.flatnonzero(bits == 0)
            if len(inactive) == 0:
                continue
            x = rng.uniform(space.x_lower, space.x_upper, space.n)
            cand = Candidate(
                z=BinaryMask.from_bits(bits), x=ScalingVector.from_values(x)
            )
            base = objective.evaluate(cand).objective
            coord = int(rng.choice(inactive))
            replacement = float(rng.uniform(space.x_lower, space.x_upper))
            moved = cand.with_scaling(coord, replacement)
            assert objective.evaluate(moved).objective == base
            checked += 1

    def test_inertness_exact(self):
        rng = np.random.default_rng(2024)
        sphere = random_masked_sphere(0, make_space(2, 8))
        self._triples(sphere, 1000, rng)
        toy = make_teacher_instance(0, n_layers=8)
        self._triples(toy, 1000, rng)
        report(
            "conditional inertness: 1000 bit-identical triples per family "
            "(masked-sphere, toy-merge), tolerance exact"
        )


class TestC2BruteForceOracleEquivalence:
    """Conditional optimizer reaches the enumeration-optimal mask on m=8."""

    def test_oracle_mask_found_in_18_of_20_runs(self):
        space = make_space(2, 4, (0.0, 4.0))
        reference = random_masked_sphere(0, space)
        ranked = oracles.masked_sphere_best(
            targets=list(reference.targets),
            preferred=list(reference.preferred_mask.bits),
            lam=reference.subset_penalty,
            bounds=space.x_bounds,
        )
        oracle_value, oracle_mask = ranked[0]
        assert oracle_mask == reference.preferred_mask.bits
        assert oracle_value == 0.0
        assert ranked[1][0] == pytest.approx(reference.subset_penalty, abs=1e-12)

        hits = 0
        for seed in range(20):
            objective = random_masked_sphere(0, space)
            strategy = ConditionalMixedSearch(space, seed)
            evals, hit = 0, False
            while evals < 2000:
                population = strategy.ask()
                batch = []
                for cand in population:
                    if evals >= 2000:
                        break
                    result = objective.evaluate(cand)
                    if cand.z.bits == oracle_mask:
                        hit = True
                    batch.append((cand, result))
                    evals += 1
                if len(batch) == len(population):
                    strategy.tell(batch)
            hits += hit
        assert hits >= 18, f"only {hits}/20 runs sampled the oracle mask"
        report(
            f"brute-force oracle equivalence: 256-mask enumeration confirmed, "
            f"oracle mask reached in {hits}/20 runs within 2000 evaluations"
        )


class TestC3StructuredBeatsUnstructured:
    """Median best score: structured >= unstructured per suite member."""

    def test_finding_one_analog(self):
        seeds = range(20)
        diffs = []
        lines = []
        for family in ("masked-sphere", "toy-merge"):
            for m in (8, 32, 192):
                space = make_space(2, m // 2)
                budget = 10 * m
                medians = {}
                for strategy in ("structured", "unstructured"):
                    bests = []
                    for seed in seeds:
                        if family == "masked-sphere":
                            objective = random_masked_sphere(0, space)
                        else:
                            objective = make_teacher_instance(0, n_layers=m // 2)
                        bests.append(run(strategy, objective, budget, seed).best_score)
                    medians[strategy] = statistics.median(bests)
                diff = medians["structured"] - medians["unstructured"]
                lines.append(f"{family} m={m}: {diff:+.4f}")
                assert medians["structured"] >= medians["unstructured"], (
                    f"{family} m={m}: structured {medians['structured']:.4f} "
                    f"< unstructured {medians['unstructured']:.4f}"
                )
                diffs.append(diff)
        aggregate = sum(diffs) / len(diffs)
        assert aggregate > 0.0, f"aggregate difference {aggregate} not strictly positive"
        report(
            "structured vs unstructured: median best score ordered on all six "
            f"suite members ({'; '.join(lines)}), aggregate {aggregate:+.4f}"
        )


class TestC4EffectiveReductionArithmetic:
    def test_reported_value_and_sampler_statistics(self):
        space = make_space(2, 96)
        reduction = effective_reduction(space, 93.3)
        assert reduction == pytest.approx(51.4, abs=0.05)

        sampler = StructuredSampler(space, seed=0)
        actives = []
        for _ in range(100):
            (cand,) = sampler.ask()
            actives.append(cand.z.active)
            sampler.tell([(cand, EvalResult(objective=0.0))])
        mean_active = sum(actives) / len(actives)
        assert abs(mean_active - 96) <= 5
        sampled_reduction = effective_reduction(space, mean_active)
        assert abs(sampled_reduction - 50.0) <= 3.0
        report(
            f"effective reduction arithmetic: reduction(192, 93.3) = {reduction:.5f} "
            f"(51.4 +- 0.05); sampler mean active {mean_active:.2f} (96 +- 5), "
            f"reduction {sampled_reduction:.2f}% (50 +- 3)"
        )


class TestC5ComparisonProtocolShape:
    def test_four_condition_report(self, tmp_path):
        plan = ExperimentPlan(
            conditions=tuple(
                Condition(label=cid, strategy_id=cid, objective_id="toy-merge")
                for cid in ("baseline", "ps", "unstructured", "structured")
            ),
            budget=10,
            seeds=(0,),
            output_dir=str(tmp_path),
            n_layers=4,
        )
        objective = make_teacher_instance(plan.instance_seed, n_layers=4)
        ps = objective.ps_objective()
        comparison = run_comparison(plan, objectives={"toy-merge": objective})
        assert [row["evaluations"] for row in comparison.rows] == ["N/A", 1, 10, 10]
        # the weight-averaging row consumed exactly one evaluation
        assert ps.evaluations == 0  # independent instance untouched
        logs = (tmp_path / f"exp-{plan.plan_hash()}" / "logs").glob("ps-*.jsonl")
        ps_records = [
            line for path in logs for line in path.read_text().strip().splitlines()
        ]
        assert len(ps_records) == 1
        report(
            "comparison protocol shape: four rows with evaluation counts "
            "[N/A, 1, 10, 10], weight-averaging row evaluated exactly once"
        )


class TestC6CmaCoreSanity:
    def test_sphere_convergence_and_monotonicity(self):
        core = CmaCore(dim=10, mean=np.full(10, 3.0), step_size=2.0, seed=0)
        snapshots = {}
        bests = []
        evals = 0
        while evals < 5000:
            points = core.ask()
            core.tell([(p, float(p @ p)) for p in points])
            evals += len(points)
            bests.append(core.best_value)
            for mark in (1000, 2000, 3000, 4000, 5000):
                if evals >= mark and mark not in snapshots:
                    snapshots[mark] = core.best_value
            if core.best_value < 1e-8:
                break
        assert core.best_value < 1e-8, f"best {core.best_value} after {evals} evals"
        assert all(b2 <= b1 for b1, b2 in zip(bests, bests[1:]))
        marks = sorted(snapshots)
        for prev, nxt in zip(marks, marks[1:]):
            if snapshots[prev] < 1e-8:
                break
            assert snapshots[nxt] <= snapshots[prev] / 10, (
                f"best only improved from {snapshots[prev]:.3e} to "
                f"{snapshots[nxt]:.3e} between {prev} and {nxt} evaluations"
            )
        report(
            f"cma-es core sanity: 10-d sphere best {core.best_value:.2e} < 1e-8 "
            f"after {evals} <= 5000 evaluations, best-so-far monotone, "
            ">= 10x drop per 1000 evaluations"
        )


class TestC7Determinism:
    def test_repeated_runs_bit_identical(self, tmp_path):
        for strategy in STRATEGY_IDS:
            paths = []
            for attempt in range(2):
                objective = make_teacher_instance(2, n_layers=4)
                log = run(strategy, objective, 30, seed=5)
                path = tmp_path / f"{strategy}-{attempt}.jsonl"
                log.save(path)
                paths.append(path)
            assert paths[0].read_bytes() == paths[1].read_bytes(), strategy
            meta = [
                p.with_suffix(p.suffix + ".meta.json").read_bytes() for p in paths
            ]
            assert meta[0] == meta[1]
        report(
            "determinism: repeated (strategy, objective, budget, seed) runs "
            "produce byte-identical logs for all four strategies"
        )


NODE = shutil.which("node")
REFERENCE_EVALUATOR = EVALUATOR_DIR / "dist" / "main.js"
CHECKPOINT_A = EVALUATOR_DIR / "data" / "model_a.json"
CHECKPOINT_B = EVALUATOR_DIR / "data" / "model_b.json"
QUESTIONS = EVALUATOR_DIR / "data" / "questions.json"

reference_available = (
    NODE is not None
    and REFERENCE_EVALUATOR.exists()
    and CHECKPOINT_A.exists()
    and QUESTIONS.exists()
)


@pytest.mark.skipif(
    not reference_available,
    reason="reference evaluator not built (cd evaluator && npm install && npm run build && npm run gen)",
)
class TestC8SecondaryProtocolConformance:
    def reference_cmd(self):
        return [
            NODE,
            str(REFERENCE_EVALUATOR),
            "--checkpoints",
            str(CHECKPOINT_A),
            str(CHECKPOINT_B),
            "--questions",
            str(QUESTIONS),
        ]

    def space(self):
        config = json.loads(CHECKPOINT_A.read_text())
        return make_space(2, len(config["layers"]))

    def test_hundred_requests_in_order_with_inertness(self):
        space = self.space()
        rng = np.random.default_rng(0)
        with SubprocessEvaluator(self.reference_cmd(), space) as evaluator:
            assert evaluator.handshake["space"]["n_layers"] == space.n_layers
            baseline = evaluator.evaluate(
                Candidate(
                    z=BinaryMask.from_bits(
                        [1 if k % 2 == 0 else 0 for k in range(space.m)]
                    ),
                    x=ScalingVector.from_values([1.0] * space.m),
                )
            )
            assert 0.0 <= baseline.score <= 1.0
            for _ in range(104):
                bits = rng.integers(0, 2, space.m)
                x = rng.uniform(0.0, 2.0, space.m)
                result = evaluator.evaluate(
                    Candidate(
                        z=BinaryMask.from_bits(bits), x=ScalingVector.from_values(x)
                    )
                )
                assert np.isfinite(result.objective)
            # end-to-end inertness on the stub model
            bits = [1, 0] * (space.m // 2)
            x1 = list(rng.uniform(0.0, 2.0, space.m))
            x2 = list(x1)
            for k in range(1, space.m, 2):
                x2[k] = float(rng.uniform(0.0, 2.0))
            r1 = evaluator.evaluate(
                Candidate(z=BinaryMask.from_bits(bits), x=ScalingVector.from_values(x1))
            )
            r2 = evaluator.evaluate(
                Candidate(z=BinaryMask.from_bits(bits), x=ScalingVector.from_values(x2))
            )
            assert r1.objective == r2.objective
            total = evaluator.evaluations
        assert total >= 100
        report(
            f"secondary protocol conformance: {total} in-order requests against "
            "the reference evaluator, end-to-end inertness held"
        )

    def test_malformed_lines_get_error_responses(self):
        proc = subprocess.Popen(
            self.reference_cmd(),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        try:
            handshake = json.loads(proc.stdout.readline())
            assert handshake["protocol"] == "merge-bbo/1"
            proc.stdin.write("{not json\n")
            proc.stdin.flush()
            response = json.loads(proc.stdout.readline())
            assert response["id"] == -1
            assert "error" in response
            space = self.space()
            request = {
                "id": 7,
                "z": [1] * space.m,
                "x": [1.0] * space.m,
                "meta": {
                    "space": {"n_models": 2, "n_layers": space.n_layers},
                    "objective_id": "reference",
                },
            }
            proc.stdin.write(json.dumps(request) + "\n")
            proc.stdin.flush()
            response = json.loads(proc.stdout.readline())
            assert response["id"] == 7
            assert "objective" in response
        finally:
            proc.stdin.close()
            assert proc.wait(timeout=10) == 0
        report(
            "secondary protocol conformance: malformed lines answered with "
            "id -1 parse errors, serving continues, clean exit on stdin close"
        )
