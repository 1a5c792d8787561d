"""Pure-Python/numpy versions of the peak-cancellation inner loops.

These are the reference semantics for ``_kernels.pyx``; both modules expose
the same three functions with the same in-place contract.
"""

import math

import numpy as np


def _support(m, n_s, length):
    return (m - n_s // 2 + 1 + np.arange(n_s)) % length


def max_peak_cancel(s, taps, a, trigger, i_max):
    length = s.shape[0]
    n_s = taps.shape[0]
    power = s.real * s.real + s.imag * s.imag
    n_cancel = n_search = n_refresh = 0
    while n_cancel < i_max:
        m = int(np.argmax(power))
        best = power[m]
        n_search += 1
        if not best > trigger:
            break
        alpha = -(1.0 - a / math.sqrt(best)) * complex(s[m])
        idx = _support(m, n_s, length)
        s[idx] += alpha * taps
        n_cancel += 1
        if n_cancel < i_max:
            seg = s[idx]
            power[idx] = seg.real * seg.real + seg.imag * seg.imag
            n_refresh += 1
    return n_cancel, n_search, n_refresh


def random_order_cancel(s, taps, a, trigger, order):
    length = s.shape[0]
    n_s = taps.shape[0]
    n_cancel = 0
    for m in order.tolist():
        v = complex(s[m])
        p = v.real * v.real + v.imag * v.imag
        if p > trigger:
            alpha = -(1.0 - a / math.sqrt(p)) * v
            s[_support(m, n_s, length)] += alpha * taps
            n_cancel += 1
    return n_cancel


def parallel_cancel(s, out, taps, a, trigger):
    length = s.shape[0]
    n_s = taps.shape[0]
    power = s.real * s.real + s.imag * s.imag
    peaks = np.flatnonzero(power > trigger)
    for m in peaks.tolist():
        v = complex(s[m])
        alpha = -(1.0 - a / math.sqrt(power[m])) * v
        out[_support(m, n_s, length)] += alpha * taps
    return len(peaks)
