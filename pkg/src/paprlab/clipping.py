"""Clipping baselines: plain clipping, repeated clipping and filtering (RCF), and
simplified clipping and filtering (SCF).

Thresholds are given in dB relative to the RMS amplitude of the unprocessed
signal: ``A = rms * 10**(a_db / 20)``.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

from .ofdm import FreqSymbol, forward_fft, lowpass_filter, oversampled_ifft, random_symbol, rms
from .peak_cancel import (
    COMPARISON,
    COMPLEX_ADD,
    REAL_ADD,
    REAL_COMPLEX_MULT,
    REAL_MULT,
    OpCounter,
    magnitude_cost,
    transform_cost,
)


def linear_threshold(sig, a_db):
    return rms(sig) * 10.0 ** (a_db / 20.0)


@dataclass(frozen=True)
class ClipConfig:
    a_db: float
    v_iterations: int = 1
    # re-reference A to the current RMS before every clip instead of keeping the first one
    track_rms: bool = False

    def __post_init__(self):
        if int(self.v_iterations) != self.v_iterations or self.v_iterations < 1:
            raise ValueError(f"v_iterations must be a positive integer, got {self.v_iterations}")
        if not math.isfinite(10.0 ** (self.a_db / 20.0)):
            raise ValueError(f"threshold {self.a_db} dB is not finite")


@dataclass(frozen=True)
class ScfFactor:
    beta: float

    def __post_init__(self):
        if not (self.beta >= 0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be a finite non-negative number, got {self.beta}")


@dataclass
class ClipReport:
    transforms: int = 1
    clipped_samples: int = 0
    counter: OpCounter = field(default_factory=OpCounter)


def clip(sig, a_linear):
    """Limit every sample magnitude to A, keeping its phase."""
    if not a_linear > 0:
        raise ValueError("threshold must be positive")
    sig = np.asarray(sig, dtype=np.complex128)
    mag = np.abs(sig)
    over = mag > a_linear
    out = sig.copy()
    out[over] = sig[over] * (a_linear / mag[over])
    return out


def _clip_cost(length, n_clipped):
    # magnitude + compare for every sample, then scale each clipped sample by A/|s|
    return magnitude_cost(length) + COMPARISON * length + (REAL_MULT + REAL_COMPLEX_MULT) * n_clipped


def rcf(sym, cfg):
    """V rounds of clip-then-remove-out-of-band. Returns ``(signal, ClipReport)``.

    The output is taken after the last filtering. The reported transform count is
    ``2V - 1``: the first IFFT plus one FFT/IFFT pair per round, excluding the last
    round's filter, which coincides with the low-pass stage every scheme shares.
    """
    s = oversampled_ifft(sym)
    length = sym.length
    a_linear = linear_threshold(s, cfg.a_db)
    report = ClipReport(transforms=2 * cfg.v_iterations - 1)
    counter = transform_cost(length) * report.transforms
    for i in range(cfg.v_iterations):
        if cfg.track_rms and i:
            a_linear = linear_threshold(s, cfg.a_db)
            counter += REAL_ADD * length + REAL_MULT
        n_clipped = int(np.count_nonzero(np.abs(s) > a_linear))
        report.clipped_samples += n_clipped
        counter += _clip_cost(length, n_clipped)
        s = lowpass_filter(clip(s, a_linear), sym.n_data)
    report.counter = counter
    return s, report


def scf(sym, cfg, factor):
    """One clip, then subtract ``beta`` times the in-band clipping distortion.

    With ``d = s - clip(s)`` and ``F = FFT(d)`` restricted to in-band bins, the
    output is ``IFFT(X - beta * F)``: three transforms in total. ``beta = 1``
    reproduces a single clip-and-filter round.
    """
    s = oversampled_ifft(sym)
    a_linear = linear_threshold(s, cfg.a_db)
    removed = s - clip(s, a_linear)
    dist = forward_fft(removed, sym.n_data)
    mask = sym.mask
    bins = np.where(mask, sym.bins - factor.beta * dist.bins, 0.0)
    out = oversampled_ifft(FreqSymbol(bins, sym.n_data))
    length = sym.length
    n_clipped = int(np.count_nonzero(removed))
    n_in = int(mask.sum())
    counter = (
        transform_cost(length) * 3
        + _clip_cost(length, n_clipped)
        + COMPLEX_ADD * length
        + (REAL_COMPLEX_MULT + COMPLEX_ADD) * n_in
    )
    return out, ClipReport(transforms=3, clipped_samples=n_clipped, counter=counter)


# beta for V = 100 swept until the SCF signal-to-distortion ratio hit the
# reference values at N = 1024, J = 4 (see scripts/calibrate_scf.py)
CALIBRATED_BETA = {
    (6.0, 100): 1.657,
    (5.5, 100): 1.565,
    (5.25, 100): 1.530,
    (4.0, 100): 1.373,
}


@lru_cache(maxsize=64)
def projection_beta(a_db, v, n_data=1024, oversample=4, n_pilot=24, seed=20240):
    """Least-squares beta matching SCF to V-round RCF over a seeded pilot set.

    Minimises ``sum |(Y - X) + beta * F|^2`` over in-band bins, where ``Y`` is the
    RCF output spectrum and ``F`` the first-clip distortion spectrum.
    """
    rng = np.random.default_rng(seed)
    num = den = 0.0
    cfg = ClipConfig(a_db, v)
    for _ in range(n_pilot):
        sym, _bits = random_symbol(rng, n_data, oversample)
        s = oversampled_ifft(sym)
        removed = s - clip(s, linear_threshold(s, a_db))
        mask = sym.mask
        f = forward_fft(removed, n_data).bins[mask]
        y, _ = rcf(sym, cfg)
        delta = forward_fft(y, n_data).bins[mask] - sym.bins[mask]
        num -= float(np.vdot(f, delta).real)
        den += float(np.vdot(f, f).real)
    if den == 0.0:
        return 1.0
    return num / den


def scf_beta(a_db, v, override=None, strategy="calibrated", n_data=1024, oversample=4):
    """The SCF approximation factor.

    ``override`` wins if given. ``"calibrated"`` looks up :data:`CALIBRATED_BETA`
    (only meaningful at N = 1024, J = 4) and falls back to ``"projection"``
    (:func:`projection_beta`) for untabulated settings.
    """
    if v < 1:
        raise ValueError("v must be >= 1")
    if override is not None:
        return ScfFactor(float(override))
    if strategy == "calibrated":
        key = (float(a_db), int(v))
        if key in CALIBRATED_BETA and (n_data, oversample) == (1024, 4):
            return ScfFactor(CALIBRATED_BETA[key])
        strategy = "projection"
    if strategy == "projection":
        return ScfFactor(projection_beta(float(a_db), int(v), n_data, oversample))
    raise ValueError(f"unknown beta strategy {strategy!r}")
