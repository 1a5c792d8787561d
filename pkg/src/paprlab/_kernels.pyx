# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for windowed peak cancellation.

Every kernel works in place on a contiguous complex128 buffer and mirrors
``paprlab._fallback`` exactly; the pure-Python module is the reference.

``a`` is the linear clipping threshold, ``trigger`` the squared magnitude a
sample must exceed to be cancelled (``a**2`` padded by a few ulps so that a
sample already sitting on the threshold is never cancelled twice).
"""

from libc.math cimport sqrt


cdef inline void _add_window(double complex[::1] s, const double[::1] taps,
                             Py_ssize_t m, double complex alpha) noexcept nogil:
    cdef Py_ssize_t length = s.shape[0]
    cdef Py_ssize_t n_s = taps.shape[0]
    cdef Py_ssize_t n = (m - n_s // 2 + 1) % length
    cdef Py_ssize_t t
    cdef double ar = alpha.real
    cdef double ai = alpha.imag
    if n < 0:
        n += length
    for t in range(n_s):
        s[n] = (s[n].real + ar * taps[t]) + 1j * (s[n].imag + ai * taps[t])
        n += 1
        if n == length:
            n = 0


cdef inline void _refresh_power(const double complex[::1] s, double[::1] power,
                                Py_ssize_t m, Py_ssize_t n_s) noexcept nogil:
    cdef Py_ssize_t length = s.shape[0]
    cdef Py_ssize_t n = (m - n_s // 2 + 1) % length
    cdef Py_ssize_t t
    if n < 0:
        n += length
    for t in range(n_s):
        power[n] = s[n].real * s[n].real + s[n].imag * s[n].imag
        n += 1
        if n == length:
            n = 0


def max_peak_cancel(double complex[::1] s, const double[::1] taps, double a,
                    double trigger, Py_ssize_t i_max):
    """Iteratively cancel the largest peak. Returns (cancellations, searches, refreshes)."""
    cdef Py_ssize_t length = s.shape[0]
    cdef Py_ssize_t n_s = taps.shape[0]
    cdef Py_ssize_t n, m
    cdef Py_ssize_t n_cancel = 0, n_search = 0, n_refresh = 0
    cdef double best, mag
    cdef double complex alpha
    cdef double[::1] power = _power_buffer(length)

    with nogil:
        for n in range(length):
            power[n] = s[n].real * s[n].real + s[n].imag * s[n].imag
        while n_cancel < i_max:
            m = 0
            best = power[0]
            for n in range(1, length):
                if power[n] > best:
                    best = power[n]
                    m = n
            n_search += 1
            if not best > trigger:
                break
            mag = sqrt(best)
            alpha = -(1.0 - a / mag) * s[m]
            _add_window(s, taps, m, alpha)
            n_cancel += 1
            if n_cancel < i_max:
                _refresh_power(s, power, m, n_s)
                n_refresh += 1
    return n_cancel, n_search, n_refresh


def random_order_cancel(double complex[::1] s, const double[::1] taps, double a,
                        double trigger, const long long[::1] order):
    """Visit samples in ``order``; cancel each one that is over threshold when visited."""
    cdef Py_ssize_t i, m
    cdef Py_ssize_t n_cancel = 0
    cdef double p
    cdef double complex alpha
    with nogil:
        for i in range(order.shape[0]):
            m = <Py_ssize_t>order[i]
            p = s[m].real * s[m].real + s[m].imag * s[m].imag
            if p > trigger:
                alpha = -(1.0 - a / sqrt(p)) * s[m]
                _add_window(s, taps, m, alpha)
                n_cancel += 1
    return n_cancel


def parallel_cancel(const double complex[::1] s, double complex[::1] out,
                    const double[::1] taps, double a, double trigger):
    """Add one window per over-threshold sample of ``s`` into ``out``, all scaled from ``s``."""
    cdef Py_ssize_t m
    cdef Py_ssize_t n_peaks = 0
    cdef double p
    cdef double complex alpha
    with nogil:
        for m in range(s.shape[0]):
            p = s[m].real * s[m].real + s[m].imag * s[m].imag
            if p > trigger:
                alpha = -(1.0 - a / sqrt(p)) * s[m]
                _add_window(out, taps, m, alpha)
                n_peaks += 1
    return n_peaks


cdef double[::1] _power_buffer(Py_ssize_t length):
    import numpy as np
    return np.empty(length, dtype=np.float64)
