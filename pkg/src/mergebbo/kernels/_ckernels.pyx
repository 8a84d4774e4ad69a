# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend. Mirrors _pykernels; inactive coordinates are
never read."""

import numpy as np

cimport numpy as cnp
from libc.math cimport tanh

BACKEND = "cython"


def masked_sphere_value(const cnp.int8_t[::1] bits,
                        const double[::1] x,
                        const double[::1] targets,
                        const cnp.int8_t[::1] preferred,
                        double lam):
    cdef Py_ssize_t m = bits.shape[0]
    cdef Py_ssize_t j
    cdef double acc = 0.0
    cdef double d
    cdef int hamming = 0
    cdef int active = 0
    for j in range(m):
        if bits[j]:
            d = x[j] - targets[j]
            acc += d * d
            active += 1
        if bits[j] != preferred[j]:
            hamming += 1
    return acc + lam * hamming, active


def merged_forward(const cnp.int8_t[::1] bits,
                   const double[::1] scales,
                   const double[:, :, ::1] weights,
                   const double[:, ::1] biases,
                   const double[:, ::1] inputs):
    cdef Py_ssize_t m = bits.shape[0]
    cdef Py_ssize_t d = weights.shape[1]
    cdef Py_ssize_t p_count = inputs.shape[0]
    out_arr = np.empty((p_count, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] h = np.empty(d, dtype=np.float64)
    cdef double[::1] tmp = np.empty(d, dtype=np.float64)
    cdef Py_ssize_t p, k, i, j
    cdef double acc
    for p in range(p_count):
        for i in range(d):
            h[i] = inputs[p, i]
        for k in range(m):
            if bits[k]:
                for i in range(d):
                    acc = biases[k, i]
                    for j in range(d):
                        acc += weights[k, i, j] * h[j]
                    tmp[i] = tanh(scales[k] * acc)
                for i in range(d):
                    h[i] = tmp[i]
        for i in range(d):
            out[p, i] = h[i]
    return out_arr


def merged_mse(const cnp.int8_t[::1] bits,
               const double[::1] scales,
               const double[:, :, ::1] weights,
               const double[:, ::1] biases,
               const double[:, ::1] inputs,
               const double[:, ::1] targets):
    cdef Py_ssize_t m = bits.shape[0]
    cdef Py_ssize_t d = weights.shape[1]
    cdef Py_ssize_t p_count = inputs.shape[0]
    cdef double[::1] h = np.empty(d, dtype=np.float64)
    cdef double[::1] tmp = np.empty(d, dtype=np.float64)
    cdef Py_ssize_t p, k, i, j
    cdef double acc, err, diff
    cdef int active = 0
    err = 0.0
    for k in range(m):
        if bits[k]:
            active += 1
    for p in range(p_count):
        for i in range(d):
            h[i] = inputs[p, i]
        for k in range(m):
            if bits[k]:
                for i in range(d):
                    acc = biases[k, i]
                    for j in range(d):
                        acc += weights[k, i, j] * h[j]
                    tmp[i] = tanh(scales[k] * acc)
                for i in range(d):
                    h[i] = tmp[i]
        for i in range(d):
            diff = h[i] - targets[p, i]
            err += diff * diff
    return err / (p_count * d), active
