"""Synthetic objective families for merged-stack search.

Every family with selection bits has the conditional-dependency property by
construction: a coordinate whose bit is 0 is never read, so its scaling
value is exactly inert. Instances are deterministic for a fixed seed and
serialize to versioned JSON with floats as decimal strings (repr strings
round-trip exactly).
"""

from __future__ import annotations

import hashlib
import json
import threading
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .space import (
    BinaryMask,
    Candidate,
    EvalResult,
    MixedSpace,
    Objective,
    ScalingVector,
    make_space,
)

__all__ = [
    "MaskedSphere",
    "ToyMergeObjective",
    "PSMergeObjective",
    "make_teacher_instance",
    "random_masked_sphere",
    "masked_sphere_eval",
    "toy_merge_eval",
    "ps_merge_eval",
]

TOY_FORMAT = "mergebbo-toy/1"
SPHERE_FORMAT = "mergebbo-sphere/1"


def _mask_array(mask: BinaryMask) -> np.ndarray:
    return np.asarray(mask.bits, dtype=np.int8)


def _x_array(x: ScalingVector) -> np.ndarray:
    return np.asarray(x.values, dtype=np.float64)


def _f2s(value: float) -> str:
    return repr(float(value))


def _s2f(text: str) -> float:
    return float(text)


def _array_to_strings(arr: np.ndarray):
    if arr.ndim == 1:
        return [_f2s(v) for v in arr]
    return [_array_to_strings(sub) for sub in arr]


def _strings_to_array(obj) -> np.ndarray:
    def convert(node):
        if isinstance(node, list):
            return [convert(child) for child in node]
        return _s2f(node)

    return np.asarray(convert(obj), dtype=np.float64)


class MaskedSphere(Objective):
    """Sum of squared errors on active coordinates plus a mask penalty.

    f(x, z) = sum_{j: z_j=1} (x_j - t_j)^2 + lam * hamming(z, z*).
    The score normalizer is an upper bound on f over in-box candidates, so
    scores stay in [0, 1] without clipping for in-box x.
    """

    def __init__(
        self,
        space: MixedSpace,
        targets: Sequence[float],
        subset_penalty: float = 0.1,
        preferred_mask: Optional[BinaryMask] = None,
    ):
        super().__init__(space)
        if len(targets) != space.n:
            raise ValueError(f"need {space.n} targets, got {len(targets)}")
        if subset_penalty < 0:
            raise ValueError("subset penalty must be non-negative")
        self.targets = tuple(float(t) for t in targets)
        self.subset_penalty = float(subset_penalty)
        self.preferred_mask = preferred_mask or BinaryMask.all_ones(space.m)
        if len(self.preferred_mask) != space.m:
            raise ValueError("preferred mask length mismatch")
        self._targets_arr = np.asarray(self.targets, dtype=np.float64)
        self._preferred_arr = _mask_array(self.preferred_mask)
        worst = np.maximum(
            (space.x_upper - self._targets_arr) ** 2,
            (self._targets_arr - space.x_lower) ** 2,
        )
        self.objective_bound = float(worst.sum() + self.subset_penalty * space.m)

    def _evaluate(self, candidate: Candidate) -> EvalResult:
        value, active = kernels.masked_sphere_value(
            _mask_array(candidate.z),
            _x_array(candidate.x),
            self._targets_arr,
            self._preferred_arr,
            self.subset_penalty,
        )
        score = 1.0 - min(value, self.objective_bound) / self.objective_bound
        return EvalResult(
            objective=value, score=score, aux={"active_layer_count": float(active)}
        )

    def config(self) -> dict:
        return {
            "format": SPHERE_FORMAT,
            "n_models": self.space.n_models,
            "n_layers": self.space.n_layers,
            "bounds": [_f2s(self.space.x_lower), _f2s(self.space.x_upper)],
            "targets": [_f2s(t) for t in self.targets],
            "subset_penalty": _f2s(self.subset_penalty),
            "preferred_mask": list(self.preferred_mask.bits),
        }

    def to_json(self) -> str:
        return json.dumps(self.config(), indent=1)

    @classmethod
    def from_config(cls, obj: dict) -> "MaskedSphere":
        if obj.get("format") != SPHERE_FORMAT:
            raise ValueError(f"unsupported fixture format {obj.get('format')!r}")
        space = make_space(
            obj["n_models"], obj["n_layers"], (_s2f(obj["bounds"][0]), _s2f(obj["bounds"][1]))
        )
        return cls(
            space,
            [_s2f(t) for t in obj["targets"]],
            subset_penalty=_s2f(obj["subset_penalty"]),
            preferred_mask=BinaryMask.from_bits(obj["preferred_mask"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "MaskedSphere":
        return cls.from_config(json.loads(text))


def random_masked_sphere(
    seed: int, space: MixedSpace, subset_penalty: float = 0.1
) -> MaskedSphere:
    """Deterministic instance with in-box targets and a non-degenerate mask."""
    rng = np.random.default_rng(np.random.SeedSequence((0x5350, seed)))
    targets = rng.uniform(space.x_lower, space.x_upper, space.n)
    while True:
        bits = rng.integers(0, 2, space.m)
        if 0 < bits.sum() < space.m:
            break
    return MaskedSphere(
        space,
        targets,
        subset_penalty=subset_penalty,
        preferred_mask=BinaryMask.from_bits(bits),
    )


class ToyMergeObjective(Objective):
    """Layer-merge simulator over two tiny linear-tanh stacks.

    The merged stack visits slots in execution order A1, B1, A2, B2, ...;
    a selected slot applies h <- tanh(x_k * (W_k h + b_k)), a skipped slot
    leaves h unchanged. The objective is mean squared error against targets
    generated by a known teacher configuration, so the teacher evaluates to
    exactly zero. The score normalizer is the loss of the all-skipped stack.
    """

    def __init__(
        self,
        space: MixedSpace,
        weights: np.ndarray,
        biases: np.ndarray,
        inputs: np.ndarray,
        targets: np.ndarray,
        teacher_mask: BinaryMask,
        teacher_x: ScalingVector,
    ):
        super().__init__(space)
        if space.n_models != 2:
            raise ValueError("toy merge instances use exactly two source models")
        weights = np.ascontiguousarray(weights, dtype=np.float64)
        biases = np.ascontiguousarray(biases, dtype=np.float64)
        inputs = np.ascontiguousarray(inputs, dtype=np.float64)
        targets = np.ascontiguousarray(targets, dtype=np.float64)
        m = space.m
        if weights.shape[0] != m or biases.shape[0] != m:
            raise ValueError("one weight matrix and bias per layer slot required")
        if inputs.shape != targets.shape or inputs.shape[0] < 1:
            raise ValueError("dataset inputs and targets must align and be non-empty")
        if weights.shape[1] != weights.shape[2] or weights.shape[1] != inputs.shape[1]:
            raise ValueError("layer width must match data width")
        if len(teacher_mask) != m or len(teacher_x) != m:
            raise ValueError("teacher configuration length mismatch")
        self.weights = weights
        self.biases = biases
        self.inputs = inputs
        self.targets = targets
        self.teacher_mask = teacher_mask
        self.teacher_x = teacher_x
        # normalizer computed through the kernel so the all-skipped candidate
        # scores exactly zero
        self.identity_mse, _ = kernels.merged_mse(
            np.zeros(m, dtype=np.int8),
            np.ones(m, dtype=np.float64),
            weights,
            biases,
            inputs,
            targets,
        )

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def _score(self, mse: float) -> float:
        ref = self.identity_mse
        if ref <= 0.0:
            return 1.0 if mse == 0.0 else 0.0
        return max(0.0, 1.0 - mse / ref)

    def _evaluate(self, candidate: Candidate) -> EvalResult:
        mse, active = kernels.merged_mse(
            _mask_array(candidate.z),
            _x_array(candidate.x),
            self.weights,
            self.biases,
            self.inputs,
            self.targets,
        )
        return EvalResult(
            objective=mse,
            score=self._score(mse),
            aux={"active_layer_count": float(active)},
        )

    def teacher_candidate(self) -> Candidate:
        return Candidate(z=self.teacher_mask, x=self.teacher_x)

    def baseline_candidate(self, model: int = 0) -> Candidate:
        """All layers of one source model at neutral scale, nothing else."""
        bits = [1 if k % self.space.n_models == model else 0 for k in range(self.space.m)]
        neutral = self.space.neutral_scale()
        return Candidate(
            z=BinaryMask.from_bits(bits),
            x=ScalingVector.from_values([neutral] * self.space.n),
        )

    def model_parameters(self, model: int) -> np.ndarray:
        """Flattened per-layer (W, b) parameters of one source model."""
        slots = range(model, self.space.m, self.space.n_models)
        parts = []
        for k in slots:
            parts.append(self.weights[k].ravel())
            parts.append(self.biases[k])
        return np.concatenate(parts)

    def ps_objective(self) -> "PSMergeObjective":
        """Linear weight-averaging analog on this instance.

        The merged vector is unflattened into a single stack of n_layers
        slots, all applied at neutral scale; shares this instance's score
        normalizer so report rows are comparable.
        """
        d = self.dim
        n_layers = self.space.n_layers
        inputs, targets = self.inputs, self.targets
        identity_mse = self.identity_mse

        def loss(theta: np.ndarray) -> float:
            per_layer = d * d + d
            weights = np.empty((n_layers, d, d))
            biases = np.empty((n_layers, d))
            for j in range(n_layers):
                chunk = theta[j * per_layer : (j + 1) * per_layer]
                weights[j] = chunk[: d * d].reshape(d, d)
                biases[j] = chunk[d * d :]
            bits = np.ones(n_layers, dtype=np.int8)
            scales = np.ones(n_layers, dtype=np.float64)
            mse, _ = kernels.merged_mse(bits, scales, weights, biases, inputs, targets)
            return mse

        return PSMergeObjective(
            self.model_parameters(0),
            self.model_parameters(1),
            loss,
            score_normalizer=identity_mse,
        )

    def config(self) -> dict:
        return {
            "format": TOY_FORMAT,
            "n_layers": self.space.n_layers,
            "dim": self.dim,
            "bounds": [_f2s(self.space.x_lower), _f2s(self.space.x_upper)],
            "weights": _array_to_strings(self.weights),
            "biases": _array_to_strings(self.biases),
            "inputs": _array_to_strings(self.inputs),
            "targets": _array_to_strings(self.targets),
            "teacher_z": list(self.teacher_mask.bits),
            "teacher_x": [_f2s(v) for v in self.teacher_x.values],
        }

    def to_json(self) -> str:
        return json.dumps(self.config(), indent=1)

    @classmethod
    def from_config(cls, obj: dict) -> "ToyMergeObjective":
        if obj.get("format") != TOY_FORMAT:
            raise ValueError(f"unsupported fixture format {obj.get('format')!r}")
        space = make_space(
            2, obj["n_layers"], (_s2f(obj["bounds"][0]), _s2f(obj["bounds"][1]))
        )
        return cls(
            space,
            _strings_to_array(obj["weights"]),
            _strings_to_array(obj["biases"]),
            _strings_to_array(obj["inputs"]),
            _strings_to_array(obj["targets"]),
            BinaryMask.from_bits(obj["teacher_z"]),
            ScalingVector.from_values(_s2f(v) for v in obj["teacher_x"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "ToyMergeObjective":
        return cls.from_config(json.loads(text))


def make_teacher_instance(
    seed: int, n_layers: int, dim: int = 4, dataset_size: int = 16
) -> ToyMergeObjective:
    """Deterministic toy-merge instance whose optimum is known.

    Targets are produced by a hidden teacher configuration with a strictly
    non-degenerate mask, so the teacher candidate scores a zero objective.
    Layers are contractive with layer-specific biases, which keeps deep
    stacks input-sensitive through their most recent selected slots instead
    of collapsing every composition to one attractor.
    """
    if n_layers < 1 or dim < 1 or dataset_size < 1:
        raise ValueError("n_layers, dim and dataset_size must all be at least 1")
    rng = np.random.default_rng(np.random.SeedSequence((0x544D, seed)))
    space = make_space(2, n_layers)
    m = space.m
    weights = rng.normal(0.0, 0.6 / np.sqrt(dim), (m, dim, dim))
    biases = rng.normal(0.0, 0.4, (m, dim))
    inputs = rng.uniform(-1.0, 1.0, (dataset_size, dim))
    while True:
        teacher_bits = rng.integers(0, 2, m)
        if 0 < teacher_bits.sum() < m:
            break
    teacher_x = rng.uniform(0.5, 1.5, m)
    targets = kernels.merged_forward(
        teacher_bits.astype(np.int8),
        teacher_x,
        np.ascontiguousarray(weights),
        np.ascontiguousarray(biases),
        np.ascontiguousarray(inputs),
    )
    return ToyMergeObjective(
        space,
        weights,
        biases,
        inputs,
        targets,
        BinaryMask.from_bits(teacher_bits),
        ScalingVector.from_values(teacher_x),
    )


class PSMergeObjective:
    """Loss of a linear interpolation between two parameter vectors.

    evaluate(alpha) scores theta = (1 - alpha) * theta_a + alpha * theta_b;
    the endpoints reproduce the single-model losses exactly. Each call
    consumes exactly one evaluation.
    """

    def __init__(
        self,
        theta_a: np.ndarray,
        theta_b: np.ndarray,
        loss: Callable[[np.ndarray], float],
        score_normalizer: Optional[float] = None,
    ):
        theta_a = np.asarray(theta_a, dtype=np.float64)
        theta_b = np.asarray(theta_b, dtype=np.float64)
        if theta_a.shape != theta_b.shape or theta_a.ndim != 1:
            raise ValueError("parameter vectors must be 1-d and of equal length")
        self.theta_a = theta_a
        self.theta_b = theta_b
        self.loss = loss
        self.score_normalizer = score_normalizer
        self._evals = 0
        self._counter_lock = threading.Lock()

    @property
    def evaluations(self) -> int:
        return self._evals

    def merged(self, alpha: float) -> np.ndarray:
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha {alpha} outside [0, 1]")
        return (1.0 - alpha) * self.theta_a + alpha * self.theta_b

    def evaluate(self, alpha: float) -> EvalResult:
        value = float(self.loss(self.merged(alpha)))
        score = None
        if self.score_normalizer is not None and self.score_normalizer > 0.0:
            score = max(0.0, 1.0 - value / self.score_normalizer)
        with self._counter_lock:
            self._evals += 1
        return EvalResult(objective=value, score=score, aux={"alpha": float(alpha)})

    def fingerprint(self) -> str:
        payload = json.dumps(
            {
                "type": "PSMergeObjective",
                "theta_a": _array_to_strings(self.theta_a),
                "theta_b": _array_to_strings(self.theta_b),
            },
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def masked_sphere_eval(obj: MaskedSphere, candidate: Candidate) -> EvalResult:
    return obj.evaluate(candidate)


def toy_merge_eval(obj: ToyMergeObjective, candidate: Candidate) -> EvalResult:
    return obj.evaluate(candidate)


def ps_merge_eval(obj: PSMergeObjective, alpha: float) -> EvalResult:
    return obj.evaluate(alpha)
