"""Covariance matrix adaptation evolution strategy, standard settings.

Implements the (mu/mu_w, lambda) scheme with cumulative step-size adaptation
and rank-one plus rank-mu covariance updates, positive recombination weights
only. Defaults follow the usual published rules of thumb: population
4 + floor(3 ln n), mean at the box center, initial step size 0.3 times the
box width.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "DegenerateCovariance",
    "CmaCore",
    "default_population_size",
    "recombination_weights",
]


class DegenerateCovariance(RuntimeError):
    """Covariance lost positive definiteness; reinitialize the state."""


def default_population_size(dim: int) -> int:
    return 4 + int(3 * math.log(dim))


def recombination_weights(population_size: int) -> tuple[np.ndarray, int, float]:
    """Positive log-rank weights over the top half; returns (w, mu, mueff)."""
    mu = population_size // 2
    raw = np.array(
        [math.log(population_size / 2 + 0.5) - math.log(i + 1) for i in range(mu)]
    )
    weights = np.zeros(population_size)
    weights[:mu] = raw / raw.sum()
    mueff = float(raw.sum() ** 2 / (raw**2).sum())
    return weights, mu, mueff


_RESAMPLE_CAP = 10


class CmaCore:
    """Minimal ask/tell CMA-ES over a continuous box (or unbounded space).

    Out-of-box samples are redrawn up to a retry cap, then clamped
    coordinate-wise. ``tell`` expects the complete population from the
    matching ``ask``; ties are broken by evaluation order (stable sort).
    """

    def __init__(
        self,
        dim: int,
        mean: Optional[Sequence[float]] = None,
        step_size: Optional[float] = None,
        bounds: Optional[tuple[float, float]] = None,
        population_size: Optional[int] = None,
        seed: int = 0,
    ):
        if dim < 1:
            raise ValueError("dimension must be at least 1")
        self.dim = dim
        self.bounds = bounds
        if mean is None:
            if bounds is None:
                raise ValueError("either an initial mean or bounds are required")
            mean = np.full(dim, 0.5 * (bounds[0] + bounds[1]))
        self.mean = np.asarray(mean, dtype=np.float64).copy()
        if self.mean.shape != (dim,):
            raise ValueError("mean must have one entry per dimension")
        if step_size is None:
            if bounds is None:
                raise ValueError("either an initial step size or bounds are required")
            step_size = 0.3 * (bounds[1] - bounds[0])
        if step_size <= 0:
            raise ValueError("step size must be positive")
        self.sigma = float(step_size)

        self.population_size = population_size or default_population_size(dim)
        self.weights, self.mu, self.mueff = recombination_weights(self.population_size)

        n, mueff = dim, self.mueff
        self.cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
        self.cs = (mueff + 2) / (n + mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + mueff)
        self.cmu = min(1 - self.c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
        self.damps = 2 * mueff / self.population_size + 0.3 + self.cs

        self.C = np.eye(dim)
        self.ps = np.zeros(dim)
        self.pc = np.zeros(dim)
        self.generation = 0
        self.evaluations = 0
        self.best_point: Optional[np.ndarray] = None
        self.best_value = math.inf
        self._rng = np.random.default_rng(np.random.SeedSequence((0x434D, seed)))
        self._pending: Optional[np.ndarray] = None
        self._refresh_decomposition()

    def _refresh_decomposition(self) -> None:
        if not np.all(np.isfinite(self.C)):
            raise DegenerateCovariance("covariance contains non-finite entries")
        C = (self.C + self.C.T) / 2.0
        eigvals, eigvecs = np.linalg.eigh(C)
        if eigvals[0] <= 0 or not np.all(np.isfinite(eigvals)):
            raise DegenerateCovariance(
                f"covariance eigenvalues not strictly positive (min {eigvals[0]:.3e})"
            )
        self.C = C
        self._eigvals = eigvals
        self._B = eigvecs
        self._D = np.sqrt(eigvals)
        self._invsqrt = eigvecs @ np.diag(1.0 / self._D) @ eigvecs.T

    @property
    def condition_number(self) -> float:
        return float(self._eigvals[-1] / self._eigvals[0])

    def _draw(self) -> np.ndarray:
        y = self._B @ (self._D * self._rng.standard_normal(self.dim))
        return self.mean + self.sigma * y

    def ask(self) -> list[np.ndarray]:
        """Sample the current population; resample then clamp into the box."""
        self._refresh_decomposition()
        points = []
        for _ in range(self.population_size):
            x = self._draw()
            if self.bounds is not None:
                lo, hi = self.bounds
                for _ in range(_RESAMPLE_CAP):
                    if np.all(x >= lo) and np.all(x <= hi):
                        break
                    x = self._draw()
                x = np.clip(x, lo, hi)
            points.append(x)
        self._pending = np.array(points)
        return points

    def tell(self, ranked: Sequence[tuple[np.ndarray, float]]) -> None:
        """Update mean, paths, covariance and step size from evaluated points."""
        if len(ranked) != self.population_size:
            raise ValueError(
                f"expected {self.population_size} ranked points, got {len(ranked)}"
            )
        order = sorted(range(len(ranked)), key=lambda i: (ranked[i][1], i))
        xs = np.array([np.asarray(ranked[i][0], dtype=np.float64) for i in order])
        values = [ranked[i][1] for i in order]
        self.evaluations += len(ranked)
        self.generation += 1
        if values[0] < self.best_value:
            self.best_value = values[0]
            self.best_point = xs[0].copy()

        n = self.dim
        old_mean = self.mean
        # displacement form: a population sitting exactly on the mean moves it
        # by exactly zero
        self.mean = old_mean + self.weights[: self.mu] @ (xs[: self.mu] - old_mean)

        y = self._invsqrt @ (self.mean - old_mean)
        csn = math.sqrt(self.cs * (2 - self.cs) * self.mueff) / self.sigma
        self.ps = (1 - self.cs) * self.ps + csn * y
        ccn = math.sqrt(self.cc * (2 - self.cc) * self.mueff) / self.sigma
        ps_norm2 = float(self.ps @ self.ps)
        hsig = ps_norm2 / n / (
            1 - (1 - self.cs) ** (2 * self.evaluations / self.population_size)
        ) < 2 + 4.0 / (n + 1)
        self.pc = (1 - self.cc) * self.pc + ccn * hsig * (self.mean - old_mean)

        c1a = self.c1 * (1 - (1 - hsig**2) * self.cc * (2 - self.cc))
        self.C *= 1 - c1a - self.cmu * self.weights.sum()
        self.C += self.c1 * np.outer(self.pc, self.pc)
        dx = (xs[: self.mu] - old_mean) / self.sigma
        self.C += self.cmu * (dx.T * self.weights[: self.mu]) @ dx

        cn = self.cs / self.damps
        self.sigma *= math.exp(min(1.0, cn * (ps_norm2 / n - 1) / 2))
        self._refresh_decomposition()
        self._pending = None
