# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled SGD layout kernel for the 2-D embedding.

Must stay arithmetically identical to the pure-Python twin in
``_layout_py.py``: same operation order, same xorshift64 RNG, no
fastmath.  ``test_layout_backends`` asserts bit-identical output.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport pow

cnp.import_array()

cdef inline double _clip(double val) nogil:
    if val > 4.0:
        return 4.0
    if val < -4.0:
        return -4.0
    return val

cdef inline unsigned long long _xorshift(unsigned long long x) nogil:
    x ^= x << 13
    x ^= x >> 7
    x ^= x << 17
    return x


def optimize_layout(
    double[:, ::1] emb,
    long long[::1] head,
    long long[::1] tail,
    double[::1] epochs_per_sample,
    double a,
    double b,
    int n_epochs,
    int negative_sample_rate,
    double repulsion_strength,
    double initial_alpha,
    unsigned long long seed,
):
    cdef int n = emb.shape[0]
    cdef int n_edges = head.shape[0]
    cdef cnp.ndarray[double, ndim=1] eons_arr = np.asarray(epochs_per_sample).copy()
    cdef cnp.ndarray[double, ndim=1] epns_arr = (
        np.asarray(epochs_per_sample) / negative_sample_rate
    )
    cdef cnp.ndarray[double, ndim=1] eonns_arr = epns_arr.copy()
    cdef double[::1] epoch_of_next_sample = eons_arr
    cdef double[::1] epochs_per_negative_sample = epns_arr
    cdef double[::1] epoch_of_next_negative_sample = eonns_arr

    cdef unsigned long long rng = seed if seed != 0 else 88172645463325252ULL
    cdef int epoch, e, p, n_neg
    cdef long long i, j, k
    cdef double alpha, dx, dy, d2, coeff, gx, gy

    for epoch in range(n_epochs):
        alpha = initial_alpha * (1.0 - (<double> epoch) / (<double> n_epochs))
        for e in range(n_edges):
            if epoch_of_next_sample[e] > epoch:
                continue
            i = head[e]
            j = tail[e]
            dx = emb[i, 0] - emb[j, 0]
            dy = emb[i, 1] - emb[j, 1]
            d2 = dx * dx + dy * dy
            if d2 > 0.0:
                coeff = (-2.0 * a * b * pow(d2, b - 1.0)) / (a * pow(d2, b) + 1.0)
                gx = _clip(coeff * dx)
                gy = _clip(coeff * dy)
            else:
                gx = 0.0
                gy = 0.0
            emb[i, 0] += alpha * gx
            emb[i, 1] += alpha * gy
            emb[j, 0] -= alpha * gx
            emb[j, 1] -= alpha * gy
            epoch_of_next_sample[e] += epochs_per_sample[e]

            n_neg = <int> (
                ((<double> epoch) - epoch_of_next_negative_sample[e])
                / epochs_per_negative_sample[e]
            )
            for p in range(n_neg):
                rng = _xorshift(rng)
                k = <long long> (rng % (<unsigned long long> n))
                if k == i:
                    continue
                dx = emb[i, 0] - emb[k, 0]
                dy = emb[i, 1] - emb[k, 1]
                d2 = dx * dx + dy * dy
                if d2 > 0.0:
                    coeff = (2.0 * repulsion_strength * b) / (
                        (0.001 + d2) * (a * pow(d2, b) + 1.0)
                    )
                    gx = _clip(coeff * dx)
                    gy = _clip(coeff * dy)
                else:
                    gx = 4.0
                    gy = 4.0
                emb[i, 0] += alpha * gx
                emb[i, 1] += alpha * gy
            epoch_of_next_negative_sample[e] += (
                n_neg * epochs_per_negative_sample[e]
            )
    return np.asarray(emb)
