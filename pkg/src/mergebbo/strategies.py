"""Ask/tell search strategies over a mixed space.

The two random samplers mirror the experiment conditions: the unstructured
one touches every slot every iteration, the structured one first draws the
selection bits and only then scaling weights for the selected slots. The
continuous strategy runs CMA-ES on the scaling weights with all slots
active. Every strategy is a pure function of (seed, history): candidates
drawn by the samplers depend only on (seed, iteration).
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .cma import CmaCore
from .runlog import RunLog, RunRecord
from .space import (
    BinaryMask,
    Candidate,
    CandidateOrigin,
    EvalResult,
    EvaluatorFailure,
    MixedSpace,
    ScalingVector,
)

__all__ = [
    "Strategy",
    "UnstructuredSampler",
    "StructuredSampler",
    "CmaSearch",
    "make_strategy",
    "run",
    "STRATEGY_IDS",
]


def _iteration_rng(seed: int, iteration: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, iteration)))


class Strategy:
    """Base ask/tell strategy; subclasses fill in ``ask``.

    State is single-writer: one owner calls ask/tell alternately. ``tell``
    receives the complete evaluated population from the matching ``ask``.
    """

    strategy_id = "base"

    def __init__(self, space: MixedSpace, seed: int):
        self.space = space
        self.seed = seed
        self.iteration = 0
        self.budget_spent = 0
        self.best: Optional[tuple[Candidate, EvalResult]] = None

    def ask(self) -> list[Candidate]:
        raise NotImplementedError

    def tell(self, evaluated: Sequence[tuple[Candidate, EvalResult]]) -> None:
        self._observe(evaluated)
        self.iteration += 1

    def _observe(self, evaluated: Sequence[tuple[Candidate, EvalResult]]) -> None:
        self.budget_spent += len(evaluated)
        for cand, res in evaluated:
            if self.best is None or res.objective < self.best[1].objective:
                self.best = (cand, res)

    def _origin(self) -> CandidateOrigin:
        return CandidateOrigin(
            seed=self.seed, iteration=self.iteration, strategy_id=self.strategy_id
        )


class UnstructuredSampler(Strategy):
    """Every slot active, all scaling weights redrawn uniformly each ask."""

    strategy_id = "unstructured"

    def ask(self) -> list[Candidate]:
        rng = _iteration_rng(self.seed, self.iteration)
        x = rng.uniform(self.space.x_lower, self.space.x_upper, self.space.n)
        return [
            Candidate(
                z=BinaryMask.all_ones(self.space.m),
                x=ScalingVector.from_values(x),
                origin=self._origin(),
            )
        ]


class StructuredSampler(Strategy):
    """Draw selection bits first, then scaling weights for selected slots only.

    Unselected slots keep the neutral scaling value; their weights are inert
    anyway, the neutral fill just keeps logs readable.
    """

    strategy_id = "structured"

    def __init__(self, space: MixedSpace, seed: int, p_active: float = 0.5):
        super().__init__(space, seed)
        if not 0.0 <= p_active <= 1.0:
            raise ValueError("selection probability must lie in [0, 1]")
        self.p_active = p_active

    def ask(self) -> list[Candidate]:
        rng = _iteration_rng(self.seed, self.iteration)
        bits = (rng.random(self.space.m) < self.p_active).astype(int)
        x = rng.uniform(self.space.x_lower, self.space.x_upper, self.space.n)
        neutral = self.space.neutral_scale()
        x = np.where(bits == 1, x, neutral)
        return [
            Candidate(
                z=BinaryMask.from_bits(bits),
                x=ScalingVector.from_values(x),
                origin=self._origin(),
            )
        ]


class CmaSearch(Strategy):
    """CMA-ES over the scaling weights with every slot active."""

    strategy_id = "cma"

    def __init__(
        self,
        space: MixedSpace,
        seed: int,
        population_size: Optional[int] = None,
    ):
        super().__init__(space, seed)
        self.core = CmaCore(
            dim=space.n,
            bounds=space.x_bounds,
            population_size=population_size,
            seed=seed,
        )

    def ask(self) -> list[Candidate]:
        points = self.core.ask()
        mask = BinaryMask.all_ones(self.space.m)
        return [
            Candidate(z=mask, x=ScalingVector.from_values(p), origin=self._origin())
            for p in points
        ]

    def tell(self, evaluated: Sequence[tuple[Candidate, EvalResult]]) -> None:
        self.core.tell(
            [(np.asarray(c.x.values), r.objective) for c, r in evaluated]
        )
        super().tell(evaluated)


StrategyFactory = Callable[[MixedSpace, int], Strategy]

STRATEGY_IDS = ("unstructured", "structured", "cma", "conditional")


def make_strategy(strategy_id: str, space: MixedSpace, seed: int, **options) -> Strategy:
    if strategy_id == "unstructured":
        return UnstructuredSampler(space, seed, **options)
    if strategy_id == "structured":
        return StructuredSampler(space, seed, **options)
    if strategy_id == "cma":
        return CmaSearch(space, seed, **options)
    if strategy_id == "conditional":
        from .conditional import ConditionalMixedSearch

        return ConditionalMixedSearch(space, seed, **options)
    raise ValueError(f"unknown strategy {strategy_id!r}")


def run(
    strategy: Union[str, StrategyFactory],
    objective,
    budget: int,
    seed: int,
    strategy_options: Optional[dict] = None,
) -> RunLog:
    """Run ask/evaluate/tell until the budget is exhausted.

    The strategy is rebuilt from the seed, so identical arguments always
    produce byte-identical logs. An evaluator failure propagates with the
    partial log attached.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    space = objective.space
    if isinstance(strategy, str):
        strat = make_strategy(strategy, space, seed, **(strategy_options or {}))
    else:
        strat = strategy(space, seed)

    header = {
        "strategy": strat.strategy_id,
        "seed": seed,
        "budget": budget,
        "space": {
            "n_models": space.n_models,
            "n_layers": space.n_layers,
            "x_lower": space.x_lower,
            "x_upper": space.x_upper,
        },
        "objective": type(objective).__name__,
        "fixture_hash": objective.fingerprint(),
    }
    log = RunLog(header)
    best = math.inf
    evals = 0
    while evals < budget:
        population = strat.ask()
        batch = []
        for cand in population:
            if evals >= budget:
                break
            try:
                result = objective.evaluate(cand)
            except EvaluatorFailure as failure:
                failure.partial_log = log
                raise
            if result.objective < best:
                best = result.objective
            log.append(
                RunRecord(
                    iter=strat.iteration,
                    eval_id=evals,
                    objective=result.objective,
                    score=result.score,
                    active=cand.z.active,
                    best_objective=best,
                    candidate_digest=cand.digest(),
                )
            )
            evals += 1
            batch.append((cand, result))
        if len(batch) == len(population):
            strat.tell(batch)
        else:
            # budget ran out mid-population; the partial batch is logged
            # but not told back (tell requires the complete population)
            strat._observe(batch)
    return log
