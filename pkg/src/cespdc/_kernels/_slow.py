"""Pure-numpy reference implementations of the hot kernels.

Every function here has a compiled twin in _fast.pyx with the same signature
and semantics; the package __init__ picks whichever is available. Keep the two
in lockstep (test_kernels checks parity).
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def airy(detuning, fsr, coeff):
    """Normalized Airy weight 1 / (1 + coeff sin^2(pi d / fsr)), elementwise."""
    d = np.asarray(detuning, dtype=np.float64)
    s = np.sin(np.pi * d / fsr)
    return 1.0 / (1.0 + coeff * s * s)


def comb_factor(tau, delta, weight):
    """|sum_m sqrt(w_m) exp(i 2 pi delta_m tau)|^2 / (sum_m sqrt(w_m))^2.

    tau in seconds, delta in Hz. Equals 1 at tau = 0.
    """
    shape = np.shape(tau)
    tau = np.atleast_1d(np.asarray(tau, dtype=np.float64)).ravel()
    delta = np.asarray(delta, dtype=np.float64).ravel()
    amp = np.sqrt(np.asarray(weight, dtype=np.float64).ravel())
    phase = 2.0 * np.pi * np.outer(tau, delta)
    field = np.cos(phase) @ amp + 1j * (np.sin(phase) @ amp)
    return (np.abs(field) ** 2 / amp.sum() ** 2).reshape(shape)


def pair_overlap(delta, fsr_s, coeff_s, fsr_i, coeff_i, half_window, n):
    """Trapezoid integral of airy_s(x) * airy_i(delta - x) over
    x in [-half_window, half_window] with n intervals (Hz result)."""
    x = np.linspace(-half_window, half_window, int(n) + 1)
    y = airy(x, fsr_s, coeff_s) * airy(delta - x, fsr_i, coeff_i)
    step = 2.0 * half_window / n
    return float(step * (y.sum() - 0.5 * (y[0] + y[-1])))


def bin_pairs(signal_ps, idler_ps, bin_ps, window_ps):
    """Coincidence histogram of tau = t_idler - t_signal.

    Both inputs are sorted int64 picosecond timestamps. Bins have width
    bin_ps, cover [-window_ps, window_ps), and use the left-edge convention
    (tau exactly on an edge falls in the bin to its right). Returns int64
    counts of length 2 * window_ps // bin_ps.
    """
    signal_ps = np.asarray(signal_ps, dtype=np.int64)
    idler_ps = np.asarray(idler_ps, dtype=np.int64)
    n_bins = int(2 * window_ps // bin_ps)
    counts = np.zeros(n_bins, dtype=np.int64)
    lo = np.searchsorted(idler_ps, signal_ps - window_ps, side="left")
    hi = np.searchsorted(idler_ps, signal_ps + window_ps, side="left")
    for t, a, b in zip(signal_ps, lo, hi):
        if a == b:
            continue
        idx = (idler_ps[a:b] - t + window_ps) // bin_ps
        np.add.at(counts, idx, 1)
    return counts
