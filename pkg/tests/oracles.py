"""Independent reference computations used to freeze expected test values.

Everything here is deliberately written without the package kernels: plain
Python loops and exhaustive enumeration, so oracle values do not depend on
the code paths they are meant to check.
"""

from __future__ import annotations

import itertools
import math


def clamp(v, lo, hi):
    return min(max(v, lo), hi)


def masked_sphere_best(targets, preferred, lam, bounds):
    """Enumerate all masks with closed-form inner optima.

    For an active coordinate the inner optimum is the target clamped into
    the box; inactive coordinates contribute nothing. Returns the full
    ranked list of (value, mask) pairs.
    """
    m = len(targets)
    lo, hi = bounds
    ranked = []
    for mask in itertools.product((0, 1), repeat=m):
        value = 0.0
        for j in range(m):
            if mask[j]:
                best_x = clamp(targets[j], lo, hi)
                value += (best_x - targets[j]) ** 2
            if mask[j] != preferred[j]:
                value += lam
        ranked.append((value, mask))
    ranked.sort(key=lambda pair: pair[0])
    return ranked


def toy_forward(bits, x, weights, biases, inputs):
    """Merged-stack forward pass with explicit loops (no numpy)."""
    outputs = []
    for sample in inputs:
        h = list(sample)
        for k, bit in enumerate(bits):
            if bit:
                nxt = []
                for i in range(len(h)):
                    acc = biases[k][i]
                    for j in range(len(h)):
                        acc += weights[k][i][j] * h[j]
                    nxt.append(math.tanh(x[k] * acc))
                h = nxt
        outputs.append(h)
    return outputs


def toy_mse(bits, x, weights, biases, inputs, targets):
    outputs = toy_forward(bits, x, weights, biases, inputs)
    total = 0.0
    count = 0
    for out, tgt in zip(outputs, targets):
        for o, t in zip(out, tgt):
            total += (o - t) ** 2
            count += 1
    return total / count


def toy_enumerate(weights, biases, inputs, targets, bounds, grid_points=11, refine=True):
    """Exhaustive mask enumeration with a per-mask grid over active weights.

    Optionally polishes the best grid point of each mask with a local
    simplex search. Returns the ranked list of (value, mask, x) triples.
    """
    m = len(weights)
    lo, hi = bounds
    grid = [lo + (hi - lo) * i / (grid_points - 1) for i in range(grid_points)]
    neutral = clamp(1.0, lo, hi)
    ranked = []
    for mask in itertools.product((0, 1), repeat=m):
        active = [j for j in range(m) if mask[j]]
        best_value = None
        best_x = [neutral] * m
        if not active:
            best_value = toy_mse(mask, best_x, weights, biases, inputs, targets)
        else:
            for combo in itertools.product(grid, repeat=len(active)):
                x = [neutral] * m
                for j, v in zip(active, combo):
                    x[j] = v
                value = toy_mse(mask, x, weights, biases, inputs, targets)
                if best_value is None or value < best_value:
                    best_value = value
                    best_x = x
            if refine:
                best_value, best_x = _polish(
                    mask, best_x, active, weights, biases, inputs, targets, bounds
                )
        ranked.append((best_value, mask, best_x))
    ranked.sort(key=lambda triple: triple[0])
    return ranked


def _polish(mask, x0, active, weights, biases, inputs, targets, bounds):
    from scipy import optimize

    lo, hi = bounds

    def objective(v):
        x = list(x0)
        for j, val in zip(active, v):
            x[j] = clamp(val, lo, hi)
        return toy_mse(mask, x, weights, biases, inputs, targets)

    start = [x0[j] for j in active]
    result = optimize.minimize(
        objective, start, method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000},
    )
    best = list(x0)
    for j, val in zip(active, result.x):
        best[j] = clamp(float(val), lo, hi)
    value = toy_mse(mask, best, weights, biases, inputs, targets)
    return min(value, toy_mse(mask, x0, weights, biases, inputs, targets)), best


def quadratic_ps_loss(theta, center, diag):
    """Closed-form quadratic loss sum_i q_i (theta_i - c_i)^2."""
    return sum(q * (t - c) ** 2 for q, t, c in zip(diag, theta, center))
