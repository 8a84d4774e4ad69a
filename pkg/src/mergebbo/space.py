"""Mixed binary-continuous search space primitives.

A merged-stack search point is a pair (z, x): selection bits z decide which
layer slots are active, scaling weights x decide how active slots are scaled.
Both vectors have one entry per (model, layer) slot, flattened in stack
execution order A1, B1, A2, B2, ...

All types here are immutable value objects and safe to share across threads.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

__all__ = [
    "DimensionMismatch",
    "EvaluatorFailure",
    "MixedSpace",
    "BinaryMask",
    "ScalingVector",
    "CandidateOrigin",
    "Candidate",
    "EvalResult",
    "Objective",
    "make_space",
    "active_count",
    "effective_reduction",
]


class DimensionMismatch(ValueError):
    """Candidate vectors do not match the objective's space."""


class EvaluatorFailure(RuntimeError):
    """An external evaluator failed at the process or protocol level."""

    def __init__(self, message: str, partial_log=None):
        super().__init__(message)
        self.partial_log = partial_log


@dataclass(frozen=True)
class MixedSpace:
    """Joint space of m selection bits and n scaling weights, m == n.

    Flat index k maps to (model i, layer j) via k = j * n_models + i, which
    is also the execution order of the merged stack.
    """

    n_models: int
    n_layers: int
    x_lower: float = 0.0
    x_upper: float = 2.0

    def __post_init__(self):
        if self.n_models < 1 or self.n_layers < 1:
            raise ValueError(
                f"space needs at least one model and one layer, "
                f"got n_models={self.n_models}, n_layers={self.n_layers}"
            )
        if not (math.isfinite(self.x_lower) and math.isfinite(self.x_upper)):
            raise ValueError("scaling bounds must be finite")
        if not self.x_lower < self.x_upper:
            raise ValueError(
                f"invalid scaling bounds: lower {self.x_lower} must be "
                f"strictly below upper {self.x_upper}"
            )

    @property
    def m(self) -> int:
        """Number of binary selection coordinates."""
        return self.n_models * self.n_layers

    @property
    def n(self) -> int:
        """Number of continuous scaling coordinates (equals ``m``)."""
        return self.m

    @property
    def x_bounds(self) -> tuple[float, float]:
        return (self.x_lower, self.x_upper)

    def flat_index(self, model: int, layer: int) -> int:
        if not (0 <= model < self.n_models and 0 <= layer < self.n_layers):
            raise IndexError(f"slot ({model}, {layer}) outside space")
        return layer * self.n_models + model

    def model_layer(self, k: int) -> tuple[int, int]:
        if not 0 <= k < self.m:
            raise IndexError(f"flat index {k} outside space of size {self.m}")
        return (k % self.n_models, k // self.n_models)

    def neutral_scale(self) -> float:
        """Identity pass-through scaling, clipped into the box."""
        return min(max(1.0, self.x_lower), self.x_upper)

    def clip(self, value: float) -> float:
        return min(max(value, self.x_lower), self.x_upper)


def make_space(
    n_models: int, n_layers: int, x_bounds: tuple[float, float] = (0.0, 2.0)
) -> MixedSpace:
    """Build a MixedSpace with m = n = n_models * n_layers."""
    lower, upper = x_bounds
    return MixedSpace(n_models=n_models, n_layers=n_layers, x_lower=float(lower), x_upper=float(upper))


@dataclass(frozen=True)
class BinaryMask:
    """Selection bits, one per layer slot."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("mask bits must be 0 or 1")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BinaryMask":
        return cls(tuple(int(b) for b in bits))

    @classmethod
    def all_ones(cls, m: int) -> "BinaryMask":
        return cls((1,) * m)

    @classmethod
    def all_zeros(cls, m: int) -> "BinaryMask":
        return cls((0,) * m)

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def active(self) -> int:
        return sum(self.bits)

    def hamming(self, other: "BinaryMask") -> int:
        if len(other) != len(self):
            raise DimensionMismatch("masks of different length")
        return sum(a != b for a, b in zip(self.bits, other.bits))

    def with_bit(self, k: int, value: int) -> "BinaryMask":
        bits = list(self.bits)
        bits[k] = int(value)
        return BinaryMask(tuple(bits))


def active_count(z: BinaryMask) -> int:
    """Number of selected slots in a mask."""
    return z.active


@dataclass(frozen=True)
class ScalingVector:
    """Scaling weights, one per layer slot.

    Box membership is the sampler's responsibility; the type only requires
    finite values.
    """

    values: tuple[float, ...]

    def __post_init__(self):
        if any(not math.isfinite(v) for v in self.values):
            raise ValueError("scaling values must be finite")

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "ScalingVector":
        return cls(tuple(float(v) for v in values))

    def __len__(self) -> int:
        return len(self.values)

    def with_value(self, k: int, value: float) -> "ScalingVector":
        vals = list(self.values)
        vals[k] = float(value)
        return ScalingVector(tuple(vals))


@dataclass(frozen=True)
class CandidateOrigin:
    seed: int
    iteration: int
    strategy_id: str


@dataclass(frozen=True)
class Candidate:
    """One search point (z, x), optionally tagged with its provenance."""

    z: BinaryMask
    x: ScalingVector
    origin: Optional[CandidateOrigin] = None

    def __post_init__(self):
        if len(self.z) != len(self.x):
            raise DimensionMismatch(
                f"mask length {len(self.z)} != scaling length {len(self.x)}"
            )

    def matches(self, space: MixedSpace) -> bool:
        return len(self.z) == space.m

    def to_wire(self) -> dict:
        """Wire representation, shared verbatim with the evaluator protocol."""
        return {"z": list(self.z.bits), "x": list(self.x.values)}

    def digest(self) -> str:
        payload = json.dumps(self.to_wire(), separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def with_scaling(self, k: int, value: float) -> "Candidate":
        return Candidate(z=self.z, x=self.x.with_value(k, value), origin=self.origin)


@dataclass(frozen=True)
class EvalResult:
    """Scalar objective (minimized) plus auxiliary metrics.

    ``score`` is the higher-is-better companion in [0, 1] where the objective
    family defines a normalizer; report tables print it as accuracy.
    """

    objective: float
    score: Optional[float] = None
    aux: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.objective):
            raise ValueError("objective must be finite")
        if self.score is not None and not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")


class Objective(ABC):
    """Black-box objective over candidates of one MixedSpace.

    Subclasses implement ``_evaluate``. Evaluation must be deterministic for
    a fixed (instance, candidate) pair; the evaluation counter increments by
    exactly one per call and is atomic under concurrent use. ``concurrency``
    declares whether concurrent ``evaluate`` calls are safe.
    """

    concurrency: str = "concurrent"

    def __init__(self, space: MixedSpace):
        self._space = space
        self._evals = 0
        self._counter_lock = threading.Lock()

    @property
    def space(self) -> MixedSpace:
        return self._space

    @property
    def evaluations(self) -> int:
        return self._evals

    def evaluate(self, candidate: Candidate) -> EvalResult:
        if not candidate.matches(self._space):
            raise DimensionMismatch(
                f"candidate of length {len(candidate.z)} against space of size {self._space.m}"
            )
        result = self._evaluate(candidate)
        with self._counter_lock:
            self._evals += 1
        return result

    @abstractmethod
    def _evaluate(self, candidate: Candidate) -> EvalResult: ...

    def config(self) -> dict:
        """JSON-safe description of the instance, used for fingerprinting."""
        return {"type": type(self).__name__, "m": self._space.m}

    def fingerprint(self) -> str:
        payload = json.dumps(self.config(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def close(self) -> None:
        """Release external resources, if any."""


def effective_reduction(space: MixedSpace, mean_active: float) -> float:
    """Search-space reduction in percent for a mean active-slot count."""
    if not 0.0 <= mean_active <= space.m:
        raise ValueError(
            f"mean_active {mean_active} outside [0, {space.m}]"
        )
    return 100.0 * (space.m - mean_active) / space.m


def neutral_fill(space: MixedSpace, bits: Sequence[int], values: Sequence[float]) -> ScalingVector:
    """Replace inactive coordinates with the neutral scaling value."""
    neutral = space.neutral_scale()
    return ScalingVector.from_values(
        v if b else neutral for b, v in zip(bits, values)
    )
