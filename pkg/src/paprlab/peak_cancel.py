"""Windowed peak cancellation: the parallel (conventional) form and the serial form.

A peak at index m is cancelled by adding ``alpha * g[n - m]`` (cyclic), where
``g`` is a band-limited sinc window with ``g[0] == 1`` and
``alpha = -(1 - A/|s_m|) * s_m`` pulls ``s_m`` onto the threshold circle.

The conventional scheme computes every alpha from the untouched input and adds
all windows at once, so side lobes of neighbouring windows interfere. The
serial scheme recomputes alpha from the current, already-corrected signal
before each window is applied. Two visiting orders are provided: repeatedly
cancelling the global maximum (:func:`spc_algorithm1`) and a single pass in a
seeded random order (:func:`spc_algorithm2`).

Operation counts
----------------
Costs are charged in real operations using: complex add = 2 adds; complex
multiply = 4 mults + 2 adds; real-by-complex multiply = 2 mults. A magnitude
test is one complex multiply (|s|^2) plus one comparison against A^2. One
JN-point transform costs (JN/2)log2(JN) complex mults and JN log2(JN) complex
adds. A cancellation costs N_s/2 + 1 real-by-complex mults for the symmetric
window, one real-by-complex mult plus one real mult and one real add for alpha,
and N_s complex adds to apply the window.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import _backend
from .ofdm import rms

# squared-magnitude headroom before a sample counts as over threshold, so a
# sample just placed on the threshold circle is not re-cancelled by rounding
TRIGGER_RTOL = 1e-12


def _trigger(a_linear):
    return a_linear * a_linear * (1.0 + TRIGGER_RTOL)


@dataclass
class OpCounter:
    real_mults: int = 0
    real_adds: int = 0
    real_comps: int = 0

    def __add__(self, other):
        return OpCounter(
            self.real_mults + other.real_mults,
            self.real_adds + other.real_adds,
            self.real_comps + other.real_comps,
        )

    def __iadd__(self, other):
        self.real_mults += other.real_mults
        self.real_adds += other.real_adds
        self.real_comps += other.real_comps
        return self

    def __mul__(self, k):
        return OpCounter(self.real_mults * k, self.real_adds * k, self.real_comps * k)

    __rmul__ = __mul__

    def as_tuple(self):
        return (self.real_mults, self.real_adds, self.real_comps)


COMPLEX_ADD = OpCounter(0, 2, 0)
COMPLEX_MULT = OpCounter(4, 2, 0)
REAL_COMPLEX_MULT = OpCounter(2, 0, 0)
REAL_MULT = OpCounter(1, 0, 0)
REAL_ADD = OpCounter(0, 1, 0)
COMPARISON = OpCounter(0, 0, 1)


def _log2(n):
    if n > 0 and n & (n - 1) == 0:
        return n.bit_length() - 1
    return math.log2(n)


def _num(x):
    return int(x) if float(x).is_integer() else float(x)


def transform_cost(length):
    """One radix-2 FFT/IFFT of the given length."""
    lg = _log2(length)
    return COMPLEX_MULT * _num(length * lg / 2) + COMPLEX_ADD * _num(length * lg)


def magnitude_cost(count):
    return COMPLEX_MULT * count


def cancellation_cost(n_s):
    """Scale the window, compute alpha, add the window into the signal."""
    return (
        REAL_COMPLEX_MULT * (n_s // 2 + 1)
        + REAL_COMPLEX_MULT
        + REAL_MULT
        + REAL_ADD
        + COMPLEX_ADD * n_s
    )


@dataclass(frozen=True)
class WindowFn:
    """Cancellation window taps for offsets ``-n_s/2+1 .. n_s/2``."""

    taps: np.ndarray
    n_s: int
    n_carriers: int
    oversample: int

    @property
    def offsets(self):
        return np.arange(-self.n_s // 2 + 1, self.n_s // 2 + 1)

    def at(self, offset):
        return float(self.taps[offset + self.n_s // 2 - 1])


def make_window(n_carriers, n_s, oversample=4):
    """Band-limited sinc ``sin(pi n / J) / (pi n / J)`` truncated to ``n_s`` taps.

    The main lobe spans the N in-band subcarriers of the J-times oversampled
    grid, so the window's zeros fall every J samples and ``g[0] == 1``.
    """
    length = n_carriers * oversample
    if n_s % 2 or not 2 <= n_s <= length:
        raise ValueError(f"window length must be even and within [2, {length}], got {n_s}")
    n = np.arange(-n_s // 2 + 1, n_s // 2 + 1)
    taps = np.sinc(n / oversample)
    return WindowFn(taps, n_s, n_carriers, oversample)


def scale_factor(peak_sample, a_linear):
    """alpha such that ``peak_sample + alpha`` has magnitude A and the same phase."""
    mag = abs(peak_sample)
    if not mag > a_linear:
        raise ValueError(f"|s_m| = {mag} does not exceed the threshold {a_linear}")
    return -(1.0 - a_linear / mag) * complex(peak_sample)


def window_support(m, n_s, length):
    """Cyclic sample indices touched by a window centred on m."""
    return (m - n_s // 2 + 1 + np.arange(n_s)) % length


@dataclass
class SpcState:
    signal: np.ndarray
    threshold: float
    iteration: int = 0

    def __post_init__(self):
        self.signal = np.array(self.signal, dtype=np.complex128)
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")


def spc_step(state, m, win):
    """Cancel the peak at m using the current signal value; updates ``state`` in place."""
    s = state.signal
    v = complex(s[m])
    if not v.real * v.real + v.imag * v.imag > _trigger(state.threshold):
        raise ValueError(f"sample {m} is not above the threshold")
    alpha = scale_factor(v, state.threshold)
    s[window_support(m, win.n_s, s.size)] += alpha * win.taps
    state.iteration += 1
    return state


@dataclass
class CancelReport:
    iterations_used: int = 0
    peaks_cancelled: int = 0
    counter: OpCounter = field(default_factory=OpCounter)
    raw: OpCounter = field(default_factory=OpCounter)


def _kernels(backend):
    if backend is None:
        return _backend.kernels
    if backend == "python":
        return _backend.fallback
    if backend == "cython":
        if _backend.compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _backend.compiled
    raise ValueError(f"unknown backend {backend!r}")


def _prepare(sig, win):
    s = np.array(sig, dtype=np.complex128)
    if win.n_s > s.size:
        raise ValueError("window longer than the signal")
    return s, np.ascontiguousarray(win.taps, dtype=np.float64)


def cpc(sig, a_linear, win, backend=None):
    """Conventional (parallel) peak cancellation."""
    if not a_linear > 0:
        raise ValueError("threshold must be positive")
    src, taps = _prepare(sig, win)
    out = src.copy()
    n_peaks = _kernels(backend).parallel_cancel(src, out, taps, a_linear, _trigger(a_linear))
    length = src.size
    counter = (
        transform_cost(length)
        + magnitude_cost(length)
        + COMPARISON * length
        + cancellation_cost(win.n_s) * n_peaks
    )
    return out, CancelReport(iterations_used=n_peaks, peaks_cancelled=n_peaks, counter=counter, raw=counter)


def spc_algorithm1(sig, a_linear, win, i_max, backend=None):
    """Serial cancellation of the current maximum until none exceeds A or ``i_max`` is hit.

    ``report.raw`` tallies every operation executed. ``report.counter`` follows the
    closed-form accounting, which charges one search and one magnitude refresh per
    cancellation: when the loop ends on the threshold test, that final search and
    the refresh feeding it are left out.
    """
    if i_max < 1:
        raise ValueError("i_max must be >= 1")
    if not a_linear > 0:
        raise ValueError("threshold must be positive")
    s, taps = _prepare(sig, win)
    length = s.size
    n_cancel, n_search, n_refresh = _kernels(backend).max_peak_cancel(
        s, taps, a_linear, _trigger(a_linear), int(i_max)
    )
    fixed = transform_cost(length)
    per_cancel = cancellation_cost(win.n_s)
    raw = (
        fixed
        + magnitude_cost(length + n_refresh * win.n_s)
        + COMPARISON * (n_search * length)
        + per_cancel * n_cancel
    )
    if n_search > n_cancel and n_cancel > 0:
        charged_search, charged_refresh = n_search - 1, n_refresh - 1
    else:
        charged_search, charged_refresh = n_search, n_refresh
    counter = (
        fixed
        + magnitude_cost(length + charged_refresh * win.n_s)
        + COMPARISON * (charged_search * length)
        + per_cancel * n_cancel
    )
    return s, CancelReport(iterations_used=n_cancel, peaks_cancelled=n_cancel, counter=counter, raw=raw)


def _order(length, rng_seed):
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    return rng.permutation(length).astype(np.int64)


def spc_algorithm2(sig, a_linear, win, rng_seed, backend=None):
    """Serial cancellation in one pass over a seeded random permutation of all samples."""
    if not a_linear > 0:
        raise ValueError("threshold must be positive")
    s, taps = _prepare(sig, win)
    length = s.size
    order = _order(length, rng_seed)
    n_cancel = _kernels(backend).random_order_cancel(s, taps, a_linear, _trigger(a_linear), order)
    counter = (
        transform_cost(length)
        + magnitude_cost(length)
        + COMPARISON * length
        + cancellation_cost(win.n_s) * n_cancel
    )
    return s, CancelReport(iterations_used=n_cancel, peaks_cancelled=n_cancel, counter=counter, raw=counter)


def expected_peak_count(jn, a_linear, sigma):
    """Rayleigh-envelope estimate of the number of samples above A in one symbol."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return jn * math.exp(-(a_linear * a_linear) / (sigma * sigma))


def default_i_max(sig, a_linear, headroom=4.0):
    """Iteration cap for :func:`spc_algorithm1`: ``headroom`` times the expected peak count."""
    return max(1, math.ceil(headroom * expected_peak_count(len(sig), a_linear, rms(sig))))


def complexity_alg1(jn, n_s, i_bar):
    lg = _log2(jn)
    return OpCounter(
        _num(2 * jn * lg + 4 * (jn - n_s) + 5 * i_bar * (n_s + 1)),
        _num(3 * jn * lg + 2 * (jn - n_s) + i_bar * (4 * n_s + 1)),
        _num(jn * i_bar),
    )


def complexity_alg2(jn, n_s, p_bar):
    lg = _log2(jn)
    return OpCounter(
        _num(2 * jn * lg + 4 * jn + p_bar * (n_s + 5)),
        _num(3 * jn * lg + 2 * jn + p_bar * (2 * n_s + 1)),
        _num(jn),
    )
