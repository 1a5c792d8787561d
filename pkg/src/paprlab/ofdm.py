"""OFDM symbol construction, the oversampled transform pair, PAPR and power helpers.

Conventions
-----------
A symbol carries ``n_data`` (N) subcarriers oversampled by J, so both domains
hold ``L = J*N`` samples. Data occupy the spectrally centred bins
``0 .. N/2-1`` and ``L-N/2 .. L-1``; everything else is out of band.

The time signal is ``s_n = 1/sqrt(N) * sum_k X_k exp(j 2 pi n k / L)``. With
unit-power data this gives ``E|s_n|^2 = 1`` and ``sum|s|^2 = J * sum|X|^2``.
"""

from dataclasses import dataclass

import numpy as np

QAM16_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0]) / np.sqrt(10.0)
# Gray code per axis: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
_GRAY_TO_LEVEL = np.array([0, 1, 3, 2])
_LEVEL_TO_BITS = np.array([[0, 0], [0, 1], [1, 1], [1, 0]], dtype=np.uint8)


def inband_mask(n_data, oversample):
    """Boolean mask of the N in-band bins among J*N."""
    if n_data < 2 or n_data % 2:
        raise ValueError(f"n_data must be a positive even integer, got {n_data}")
    if oversample < 1:
        raise ValueError(f"oversample must be >= 1, got {oversample}")
    length = n_data * oversample
    mask = np.zeros(length, dtype=bool)
    mask[: n_data // 2] = True
    mask[length - n_data // 2 :] = True
    return mask


def inband_indices(n_data, oversample):
    """Bin index of each data subcarrier, in data order (DC first, negative half last)."""
    length = n_data * oversample
    half = n_data // 2
    return np.concatenate([np.arange(half), np.arange(length - half, length)])


@dataclass(frozen=True)
class FreqSymbol:
    """J*N frequency-domain bins of one OFDM symbol."""

    bins: np.ndarray
    n_data: int

    def __post_init__(self):
        bins = np.asarray(self.bins, dtype=np.complex128)
        if bins.ndim != 1 or bins.size % self.n_data:
            raise ValueError(f"{bins.size} bins is not a multiple of n_data={self.n_data}")
        object.__setattr__(self, "bins", bins)
        inband_mask(self.n_data, self.oversample)

    @property
    def oversample(self):
        return self.bins.size // self.n_data

    @property
    def length(self):
        return self.bins.size

    @property
    def mask(self):
        return inband_mask(self.n_data, self.oversample)

    @property
    def data(self):
        """The N in-band values in data order."""
        return self.bins[inband_indices(self.n_data, self.oversample)]

    @classmethod
    def from_data(cls, data, oversample):
        data = np.asarray(data, dtype=np.complex128)
        n_data = data.size
        bins = np.zeros(n_data * oversample, dtype=np.complex128)
        bins[inband_indices(n_data, oversample)] = data
        return cls(bins, n_data)


@dataclass(frozen=True)
class PowerStats:
    mean_power: float
    peak_power: float

    @classmethod
    def of(cls, sig):
        p = np.abs(sig) ** 2
        return cls(float(p.mean()), float(p.max()))

    @property
    def papr_db(self):
        if self.mean_power <= 0:
            raise ValueError("PAPR is undefined for an all-zero signal")
        return 10.0 * np.log10(self.peak_power / self.mean_power)


def qam16_modulate(bits):
    """Gray-mapped unit-average-power 16QAM; 4 bits per point (I pair then Q pair)."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size % 4:
        raise ValueError(f"bit count {bits.size} is not divisible by 4")
    b = bits.reshape(-1, 4)
    i_idx = _GRAY_TO_LEVEL[2 * b[:, 0] + b[:, 1]]
    q_idx = _GRAY_TO_LEVEL[2 * b[:, 2] + b[:, 3]]
    return QAM16_LEVELS[i_idx] + 1j * QAM16_LEVELS[q_idx]


def qam16_demodulate(points):
    """Minimum-distance hard decision back to bits."""
    points = np.asarray(points)
    thresholds = np.array([-2.0, 0.0, 2.0]) / np.sqrt(10.0)
    i_idx = np.searchsorted(thresholds, points.real)
    q_idx = np.searchsorted(thresholds, points.imag)
    out = np.empty((points.size, 4), dtype=np.uint8)
    out[:, :2] = _LEVEL_TO_BITS[i_idx]
    out[:, 2:] = _LEVEL_TO_BITS[q_idx]
    return out.ravel()


def map_qam16(bits, oversample=4):
    """Map 4N bits onto N in-band 16QAM subcarriers of a J-times oversampled symbol."""
    return FreqSymbol.from_data(qam16_modulate(bits), oversample)


def random_symbol(rng, n_data=1024, oversample=4):
    """Uniform random bits mapped to a symbol. Returns ``(symbol, bits)``."""
    bits = rng.integers(0, 2, size=4 * n_data, dtype=np.uint8)
    return map_qam16(bits, oversample), bits


def oversampled_ifft(sym):
    """Time samples of ``sym`` with the 1/sqrt(N) normalisation."""
    return np.fft.ifft(sym.bins) * (sym.length / np.sqrt(sym.n_data))


def forward_fft(sig, n_data):
    """Exact inverse of :func:`oversampled_ifft`."""
    sig = np.asarray(sig, dtype=np.complex128)
    return FreqSymbol(np.fft.fft(sig) * (np.sqrt(n_data) / sig.size), n_data)


def papr_db(sig):
    """Peak over empirical mean power of one symbol, in dB."""
    return PowerStats.of(np.asarray(sig)).papr_db


def lowpass_filter(sig, n_data):
    """Zero every out-of-band bin. Idempotent; in-band bins pass unchanged."""
    spec = forward_fft(sig, n_data)
    bins = np.where(spec.mask, spec.bins, 0.0)
    return oversampled_ifft(FreqSymbol(bins, n_data))


def mean_power(sig):
    sig = np.asarray(sig)
    return float(np.mean(sig.real**2 + sig.imag**2))


def rms(sig):
    return float(np.sqrt(mean_power(sig)))


def normalize_power(sig, target_mean_power):
    """Rescale by a positive real factor so the mean power equals the target."""
    if target_mean_power <= 0:
        raise ValueError("target mean power must be positive")
    p = mean_power(sig)
    if p == 0:
        raise ValueError("cannot normalise an all-zero signal")
    return np.asarray(sig) * np.sqrt(target_mean_power / p)
