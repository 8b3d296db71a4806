# cython: language_level=3
"""Compiled twins of the kernels in _slow.py. Same signatures, same semantics."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, M_PI

cnp.import_array()

BACKEND = "compiled"


def airy(detuning, double fsr, double coeff):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d = np.ascontiguousarray(
        np.atleast_1d(np.asarray(detuning, dtype=np.float64)).ravel())
    cdef Py_ssize_t i, n = d.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double s
    for i in range(n):
        s = sin(M_PI * d[i] / fsr)
        out[i] = 1.0 / (1.0 + coeff * s * s)
    return out.reshape(np.shape(detuning))


def comb_factor(tau, delta, weight):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t = np.ascontiguousarray(
        np.atleast_1d(np.asarray(tau, dtype=np.float64)).ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] f = np.ascontiguousarray(
        np.asarray(delta, dtype=np.float64).ravel())
    cdef cnp.ndarray[cnp.float64_t, ndim=1] amp = np.sqrt(
        np.ascontiguousarray(np.asarray(weight, dtype=np.float64).ravel()))
    cdef Py_ssize_t i, m, nt = t.shape[0], nm = f.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(nt, dtype=np.float64)
    cdef double re, im, ph, norm = 0.0
    for m in range(nm):
        norm += amp[m]
    norm *= norm
    for i in range(nt):
        re = 0.0
        im = 0.0
        for m in range(nm):
            ph = 2.0 * M_PI * f[m] * t[i]
            re += amp[m] * cos(ph)
            im += amp[m] * sin(ph)
        out[i] = (re * re + im * im) / norm
    return out.reshape(np.shape(tau))


def pair_overlap(double delta, double fsr_s, double coeff_s,
                 double fsr_i, double coeff_i, double half_window, n):
    cdef Py_ssize_t k, nn = int(n)
    cdef double h = 2.0 * half_window / nn
    cdef double x, ss, si, y, acc = 0.0
    for k in range(nn + 1):
        x = -half_window + h * k
        ss = sin(M_PI * x / fsr_s)
        si = sin(M_PI * (delta - x) / fsr_i)
        y = 1.0 / ((1.0 + coeff_s * ss * ss) * (1.0 + coeff_i * si * si))
        acc += y if 0 < k < nn else 0.5 * y
    return acc * h


def bin_pairs(signal_ps, idler_ps, long long bin_ps, long long window_ps):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] s = np.ascontiguousarray(
        np.asarray(signal_ps, dtype=np.int64))
    cdef cnp.ndarray[cnp.int64_t, ndim=1] d = np.ascontiguousarray(
        np.asarray(idler_ps, dtype=np.int64))
    cdef Py_ssize_t n_bins = <Py_ssize_t>(2 * window_ps // bin_ps)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(n_bins, dtype=np.int64)
    cdef Py_ssize_t i, j, lo = 0, ns = s.shape[0], nd = d.shape[0]
    cdef long long t, tau
    for i in range(ns):
        t = s[i]
        while lo < nd and d[lo] < t - window_ps:
            lo += 1
        j = lo
        while j < nd and d[j] < t + window_ps:
            tau = d[j] - t
            counts[(tau + window_ps) // bin_ps] += 1
            j += 1
    return counts
