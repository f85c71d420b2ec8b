"""Pure-Python twin of the compiled layout kernel.

Selected at import time when the extension is unavailable.  Slow (use it
for small grids or smoke tests) but arithmetically identical to
``_layout.pyx``: same operation order and the same xorshift64 stream.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF


def _clip(val):
    if val > 4.0:
        return 4.0
    if val < -4.0:
        return -4.0
    return val


def _xorshift(x):
    x ^= (x << 13) & _MASK
    x ^= x >> 7
    x ^= (x << 17) & _MASK
    return x & _MASK


def optimize_layout(
    emb,
    head,
    tail,
    epochs_per_sample,
    a,
    b,
    n_epochs,
    negative_sample_rate,
    repulsion_strength,
    initial_alpha,
    seed,
):
    e_mb = emb  # mutated in place, like the compiled kernel
    n = e_mb.shape[0]
    n_edges = head.shape[0]
    epoch_of_next_sample = np.asarray(epochs_per_sample).copy()
    epochs_per_negative_sample = np.asarray(epochs_per_sample) / negative_sample_rate
    epoch_of_next_negative_sample = epochs_per_negative_sample.copy()

    rng = int(seed) if seed != 0 else 88172645463325252
    pow_ = math.pow

    for epoch in range(n_epochs):
        alpha = initial_alpha * (1.0 - float(epoch) / float(n_epochs))
        for e in range(n_edges):
            if epoch_of_next_sample[e] > epoch:
                continue
            i = head[e]
            j = tail[e]
            dx = e_mb[i, 0] - e_mb[j, 0]
            dy = e_mb[i, 1] - e_mb[j, 1]
            d2 = dx * dx + dy * dy
            if d2 > 0.0:
                coeff = (-2.0 * a * b * pow_(d2, b - 1.0)) / (a * pow_(d2, b) + 1.0)
                gx = _clip(coeff * dx)
                gy = _clip(coeff * dy)
            else:
                gx = 0.0
                gy = 0.0
            e_mb[i, 0] += alpha * gx
            e_mb[i, 1] += alpha * gy
            e_mb[j, 0] -= alpha * gx
            e_mb[j, 1] -= alpha * gy
            epoch_of_next_sample[e] += epochs_per_sample[e]

            n_neg = int(
                (float(epoch) - epoch_of_next_negative_sample[e])
                / epochs_per_negative_sample[e]
            )
            for _ in range(n_neg):
                rng = _xorshift(rng)
                k = rng % n
                if k == i:
                    continue
                dx = e_mb[i, 0] - e_mb[k, 0]
                dy = e_mb[i, 1] - e_mb[k, 1]
                d2 = dx * dx + dy * dy
                if d2 > 0.0:
                    coeff = (2.0 * repulsion_strength * b) / (
                        (0.001 + d2) * (a * pow_(d2, b) + 1.0)
                    )
                    gx = _clip(coeff * dx)
                    gy = _clip(coeff * dy)
                else:
                    gx = 4.0
                    gy = 4.0
                e_mb[i, 0] += alpha * gx
                e_mb[i, 1] += alpha * gy
            epoch_of_next_negative_sample[e] += (
                n_neg * epochs_per_negative_sample[e]
            )
    return np.asarray(e_mb)
