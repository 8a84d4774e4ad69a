"""Pure-numpy kernel backend.

Inactive coordinates are never read, so flipping them cannot change any
value computed here.
"""

import numpy as np

BACKEND = "python"


def masked_sphere_value(bits, x, targets, preferred, lam):
    """Sum of squared errors on active coordinates plus a mask penalty.

    Returns (value, active_count).
    """
    active = bits != 0
    diff = x[active] - targets[active]
    hamming = int(np.count_nonzero(bits != preferred))
    return float(diff @ diff + lam * hamming), int(np.count_nonzero(active))


def merged_forward(bits, scales, weights, biases, inputs):
    """Run inputs through the merged stack; skipped slots are identity.

    weights: (m, d, d), biases: (m, d), inputs: (p, d). Returns (p, d).
    """
    h = np.ascontiguousarray(inputs.T)
    for k in range(bits.shape[0]):
        if bits[k]:
            h = np.tanh(scales[k] * (weights[k] @ h + biases[k][:, None]))
    return np.ascontiguousarray(h.T)


def merged_mse(bits, scales, weights, biases, inputs, targets):
    """Mean squared error of the merged stack against targets.

    Returns (mse, active_count).
    """
    out = merged_forward(bits, scales, weights, biases, inputs)
    diff = out - targets
    return float(np.mean(diff * diff)), int(np.count_nonzero(bits))
