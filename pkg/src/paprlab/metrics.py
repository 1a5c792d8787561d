"""PAPR CCDF estimation, signal-to-distortion ratio and AWGN bit error rate."""

from dataclasses import dataclass
import math

import numpy as np

from .ofdm import forward_fft, inband_indices, qam16_demodulate, random_symbol


class OutOfSupportError(ValueError):
    """Requested probability lies outside what the sample set can resolve."""


@dataclass(frozen=True)
class CcdfCurve:
    thresholds_db: np.ndarray
    probabilities: np.ndarray
    n_symbols: int

    def merge(self, other):
        """Pool two curves estimated on the same grid from disjoint symbol sets."""
        if not np.array_equal(self.thresholds_db, other.thresholds_db):
            raise ValueError("cannot merge curves on different grids")
        n = self.n_symbols + other.n_symbols
        counts = np.rint(self.probabilities * self.n_symbols) + np.rint(other.probabilities * other.n_symbols)
        return CcdfCurve(self.thresholds_db, counts / n, n)


def ccdf_estimate(papr_samples, grid):
    """Fraction of samples strictly above each grid value."""
    x = np.sort(np.asarray(papr_samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("need at least one PAPR sample")
    grid = np.asarray(grid, dtype=float)
    above = x.size - np.searchsorted(x, grid, side="right")
    return CcdfCurve(grid, above / x.size, int(x.size))


def papr_grid(papr_samples, step=0.001):
    """A grid covering the samples with margin, fine enough for quantile lookup."""
    x = np.asarray(papr_samples, dtype=float)
    lo = math.floor(x.min() / step) - 1
    hi = math.ceil(x.max() / step) + 1
    return np.arange(lo, hi + 1) * step


def papr_at_ccdf(curve, p):
    """PAPR0 where the CCDF crosses ``p``, interpolated linearly in (dB, log10 P).

    Raises :class:`OutOfSupportError` if ``p`` is above the first grid probability or
    below the smallest nonzero probability the curve resolves.
    """
    probs = np.asarray(curve.probabilities, dtype=float)
    grid = np.asarray(curve.thresholds_db, dtype=float)
    positive = probs[probs > 0]
    if not 0 < p <= 1 or positive.size == 0 or p > probs[0] or p < positive.min():
        raise OutOfSupportError(
            f"p={p:g} not resolvable from {curve.n_symbols} symbols "
            f"(observed range {positive.min() if positive.size else 0:g}..{probs[0]:g})"
        )
    below = np.flatnonzero(probs < p)
    if below.size == 0:
        return float(grid[-1])
    i = int(below[0])
    if i == 0:
        return float(grid[0])
    p0, p1 = probs[i - 1], probs[i]
    if p1 == 0:
        return float(grid[i])
    t = (math.log10(p0) - math.log10(p)) / (math.log10(p0) - math.log10(p1))
    return float(grid[i - 1] + t * (grid[i] - grid[i - 1]))


def papr_at(papr_samples, p, step=0.001):
    """Shortcut: estimate the CCDF on a fine grid and read off the PAPR at ``p``."""
    return papr_at_ccdf(ccdf_estimate(papr_samples, papr_grid(papr_samples, step)), p)


@dataclass
class SdrAccumulator:
    """Running in-band signal and distortion energies; merging is plain addition."""

    signal_energy: float = 0.0
    distortion_energy: float = 0.0

    def add(self, reference, processed):
        mask = reference.mask
        x = reference.bins[mask]
        y = forward_fft(processed, reference.n_data).bins[mask]
        self.signal_energy += float(np.vdot(x, x).real)
        d = y - x
        self.distortion_energy += float(np.vdot(d, d).real)
        return self

    def merge(self, other):
        return SdrAccumulator(
            self.signal_energy + other.signal_energy,
            self.distortion_energy + other.distortion_energy,
        )

    @property
    def sdr_db(self):
        if self.signal_energy <= 0:
            raise ValueError("reference carries no energy")
        if self.distortion_energy == 0:
            return math.inf
        return 10.0 * math.log10(self.signal_energy / self.distortion_energy)


def sdr_db(reference, processed):
    """In-band SDR of one or more (reference symbol, processed signal) pairs, in dB.

    Lists are pooled as a ratio of summed energies. Exact zero distortion gives ``inf``.
    """
    if not isinstance(reference, (list, tuple)):
        reference, processed = [reference], [processed]
    acc = SdrAccumulator()
    for ref, out in zip(reference, processed):
        acc.add(ref, out)
    return acc.sdr_db


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    ber: float
    bits_tested: int
    bit_errors: int


def q_function(x):
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def qam16_ber_theory(ebn0_db):
    """Exact Gray-coded 16QAM bit error rate over AWGN at the given Eb/N0."""
    x = math.sqrt(0.8 * 10.0 ** (ebn0_db / 10.0))
    return (3 * q_function(x) + 2 * q_function(3 * x) - q_function(5 * x)) / 4


def _stream(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def ber_awgn(scheme_pipeline, snr_grid, min_bits, rng_seed, n_data=1024, oversample=4):
    """Bit error rate of ``scheme_pipeline`` over AWGN at each Eb/N0 in ``snr_grid`` (dB).

    Each symbol's bits come from an independent stream keyed by the symbol index;
    every SNR point reuses the same processed symbols with fresh noise. Noise is
    added at the oversampled rate with variance ``J * N0`` per complex sample,
    which puts ``N0 = 1 / (4 Eb/N0)`` on every subcarrier (unit symbol energy).
    """
    bits_per_symbol = 4 * n_data
    n_symbols = max(1, math.ceil(min_bits / bits_per_symbol))
    snr_grid = [float(x) for x in snr_grid]
    errors = np.zeros(len(snr_grid), dtype=np.int64)
    data_bins = inband_indices(n_data, oversample)
    for i in range(n_symbols):
        sym, bits = random_symbol(_stream(rng_seed, 0, i), n_data, oversample)
        out = np.asarray(scheme_pipeline(sym))
        for j, snr in enumerate(snr_grid):
            n0 = 1.0 / (4.0 * 10.0 ** (snr / 10.0))
            sigma = math.sqrt(oversample * n0 / 2.0)
            noise_rng = _stream(rng_seed, 1, i, j)
            noise = sigma * (noise_rng.standard_normal(out.size) + 1j * noise_rng.standard_normal(out.size))
            data = forward_fft(out + noise, n_data).bins[data_bins]
            errors[j] += int(np.count_nonzero(qam16_demodulate(data) != bits))
    total = n_symbols * bits_per_symbol
    return [BerPoint(snr, errors[j] / total, total, int(errors[j])) for j, snr in enumerate(snr_grid)]
