"""Joint selection-bit and scaling-weight optimizer with conditional masking.

Selection bits follow per-coordinate Bernoulli probabilities updated by a
rank-weighted frequency rule; scaling weights follow a Gaussian whose mean,
covariance and step size adapt only from coordinates that were active in the
sampled candidates. Inactive coordinates carry the current mean, contribute
nothing to any distribution update, and (because objectives never read them)
cost nothing to leave unadapted.

The covariance uses a rank-mu update with per-entry masked decay
C += cmu * sum_k w_k (y_k y_k^T - (a_k a_k^T) . C), so a coordinate inactive
in the whole population leaves its row and column exactly untouched. Step
size uses cumulative adaptation normalized by the tracked expected number of
active path coordinates instead of the full dimension.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .cma import DegenerateCovariance, default_population_size, recombination_weights
from .space import (
    BinaryMask,
    Candidate,
    EvalResult,
    MixedSpace,
    ScalingVector,
)
from .strategies import Strategy

__all__ = ["MaskDistribution", "ConditionalMixedSearch"]

_RESAMPLE_CAP = 10
_EIG_FLOOR = 1e-30


class MaskDistribution:
    """Independent Bernoulli distribution over selection bits with margins.

    Probabilities never leave [1/m, 1 - 1/m], so no bit can collapse
    irreversibly. The update moves p toward the rank-weighted frequency of
    active bits; a coordinate that was inactive in the entire population
    carries no selection signal and keeps its probability unchanged.
    """

    def __init__(self, m: int, p_init: float = 0.5, learning_rate: Optional[float] = None):
        if m < 2:
            raise ValueError("mask distribution needs at least 2 coordinates")
        self.m = m
        self.p_min = 1.0 / m
        self.p_max = 1.0 - 1.0 / m
        self.learning_rate = learning_rate if learning_rate is not None else 1.0 / math.sqrt(m)
        self.p = np.full(m, float(p_init))
        self._clamp()

    def _clamp(self) -> None:
        np.clip(self.p, self.p_min, self.p_max, out=self.p)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return (rng.random(self.m) < self.p).astype(np.int8)

    def update(self, ranked_bits: np.ndarray, weights: np.ndarray) -> None:
        """Move p toward the weighted bit frequency of the ranked population."""
        freq = weights @ ranked_bits
        seen_active = ranked_bits.any(axis=0)
        lr = self.learning_rate
        self.p = np.where(seen_active, (1.0 - lr) * self.p + lr * freq, self.p)
        self._clamp()


class ConditionalMixedSearch(Strategy):
    """Ask/tell optimizer for the joint bit/weight space.

    With ``masked=False`` the conditional structure is ignored: scaling
    weights are sampled and updated on every coordinate regardless of the
    bits, which is the ablation used in the paired benchmark.
    """

    strategy_id = "conditional"

    def __init__(
        self,
        space: MixedSpace,
        seed: int,
        population_size: Optional[int] = None,
        p_init: float = 0.5,
        masked: bool = True,
    ):
        super().__init__(space, seed)
        n = space.n
        if space.m < 2:
            raise ValueError("conditional search needs at least 2 slots")
        self.masked = masked
        if not masked:
            self.strategy_id = "conditional-unmasked"
        self.population_size = population_size or default_population_size(space.m + n)
        self.weights, self.mu, self.mueff = recombination_weights(self.population_size)
        self.mask_dist = MaskDistribution(space.m, p_init=p_init)

        mueff = self.mueff
        self.cs = (mueff + 2) / (n + mueff + 5)
        self.cmu = min(1.0, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
        self.damps = 2 * mueff / self.population_size + 0.3 + self.cs

        lo, hi = space.x_bounds
        self.mean = np.full(n, 0.5 * (lo + hi))
        self.sigma = 0.3 * (hi - lo)
        self.C = np.eye(n)
        self.ps = np.zeros(n)
        self._path_mass = np.zeros(n)
        self._rng = np.random.default_rng(np.random.SeedSequence((0x4358, seed)))
        self._refresh_decomposition()

    def _refresh_decomposition(self) -> None:
        if not np.all(np.isfinite(self.C)):
            raise DegenerateCovariance("covariance contains non-finite entries")
        C = (self.C + self.C.T) / 2.0
        eigvals, eigvecs = np.linalg.eigh(C)
        if not np.all(np.isfinite(eigvals)):
            raise DegenerateCovariance("covariance eigenvalues are not finite")
        # masked decay can transiently nudge an eigenvalue below zero; repair
        floor = max(_EIG_FLOOR, float(eigvals[-1]) * 1e-14)
        if eigvals[0] < floor:
            eigvals = np.maximum(eigvals, floor)
            C = (eigvecs * eigvals) @ eigvecs.T
            C = (C + C.T) / 2.0
        self.C = C
        self._D = np.sqrt(eigvals)
        self._B = eigvecs
        self._invsqrt = eigvecs @ np.diag(1.0 / self._D) @ eigvecs.T

    def _draw_x(self, bits: np.ndarray) -> np.ndarray:
        lo, hi = self.space.x_bounds
        active = bits != 0
        for _ in range(_RESAMPLE_CAP + 1):
            x = self.mean + self.sigma * (self._B @ (self._D * self._rng.standard_normal(self.space.n)))
            checked = x[active] if self.masked else x
            if np.all(checked >= lo) and np.all(checked <= hi):
                break
        x = np.clip(x, lo, hi)
        if self.masked:
            x = np.where(active, x, self.mean)
        return x

    def ask(self) -> list[Candidate]:
        self._refresh_decomposition()
        out = []
        for _ in range(self.population_size):
            bits = self.mask_dist.sample(self._rng)
            x = self._draw_x(bits)
            out.append(
                Candidate(
                    z=BinaryMask.from_bits(bits),
                    x=ScalingVector.from_values(x),
                    origin=self._origin(),
                )
            )
        return out

    def tell(self, evaluated: Sequence[tuple[Candidate, EvalResult]]) -> None:
        if len(evaluated) != self.population_size:
            raise ValueError(
                f"expected {self.population_size} evaluated candidates, got {len(evaluated)}"
            )
        order = sorted(
            range(len(evaluated)), key=lambda i: (evaluated[i][1].objective, i)
        )
        bits = np.array(
            [evaluated[i][0].z.bits for i in order], dtype=np.float64
        )
        xs = np.array([evaluated[i][0].x.values for i in order])
        if not self.masked:
            activity = np.ones_like(bits)
        else:
            activity = bits

        self.mask_dist.update(bits.astype(np.int8), self.weights)

        w_top = self.weights[: self.mu]
        a_top = activity[: self.mu]
        old_mean = self.mean
        # per-candidate masked displacement: inactive coordinates contribute
        # exactly zero to the mean shift and the covariance update
        disp = (xs[: self.mu] - old_mean) * a_top
        delta = w_top @ disp
        self.mean = old_mean + delta

        y = disp / self.sigma
        second_moment = (y.T * w_top) @ y
        decay_mass = (a_top.T * w_top) @ a_top
        self.C = self.C + self.cmu * (second_moment - decay_mass * self.C)

        z_path = self._invsqrt @ (delta / self.sigma)
        self.ps = (1 - self.cs) * self.ps + math.sqrt(
            self.cs * (2 - self.cs) * self.mueff
        ) * z_path
        self._path_mass = (1 - self.cs) ** 2 * self._path_mass + self.cs * (
            2 - self.cs
        ) * np.diag(decay_mass)
        expected = float(self._path_mass.sum())
        if expected > 1e-12:
            ratio = float(self.ps @ self.ps) / expected
            self.sigma *= math.exp(min(1.0, (self.cs / self.damps) * (ratio - 1) / 2))

        self._refresh_decomposition()
        super().tell(evaluated)
