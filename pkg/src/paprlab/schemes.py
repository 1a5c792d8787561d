"""Uniform entry point over every PAPR-reduction scheme plus the shared
filter-and-normalise tail used for all comparisons."""

from dataclasses import dataclass, field, asdict
import itertools
import math

import numpy as np

from . import clipping, peak_cancel
from .ofdm import lowpass_filter, mean_power, normalize_power, oversampled_ifft

SCHEMES = ("none", "clip", "rcf", "scf", "cpc", "alg1", "alg2")
DEFAULT_SCF_V = 100


@dataclass(frozen=True)
class SchemeConfig:
    """One scheme and its parameters. ``None`` fields take per-scheme defaults."""

    scheme: str
    a_db: float = 6.0
    v: int | None = None
    n_s: int | None = None
    i_max: int | None = None
    beta: float | None = None
    i_max_headroom: float = 4.0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.v is not None and self.v < 1:
            raise ValueError("v must be >= 1")
        if self.i_max is not None and self.i_max < 1:
            raise ValueError("i_max must be >= 1")

    @property
    def label(self):
        if self.scheme == "rcf":
            return f"rcf_v{self.iterations}"
        if self.scheme == "scf":
            return f"scf_v{self.iterations}"
        return self.scheme

    @property
    def iterations(self):
        if self.v is not None:
            return self.v
        return DEFAULT_SCF_V if self.scheme == "scf" else 1

    def window_length(self, n_data, oversample):
        return self.n_s if self.n_s is not None else n_data

    def as_dict(self):
        return asdict(self)


@dataclass
class SchemeOutcome:
    signal: np.ndarray
    counter: peak_cancel.OpCounter = field(default_factory=peak_cancel.OpCounter)
    ifft_count: int = 1
    # iterations for alg1, cancellations for alg2/cpc, clipped samples for clipping schemes
    events: int = 0
    over_threshold: int = 0


def reduce(cfg, sym, rng_seed=0):
    """Apply the scheme alone (no shared low-pass/normalise tail)."""
    s0 = oversampled_ifft(sym)
    a_linear = clipping.linear_threshold(s0, cfg.a_db)
    over = int(np.count_nonzero(np.abs(s0) > a_linear))
    length = sym.length
    if cfg.scheme == "none":
        return SchemeOutcome(s0, peak_cancel.transform_cost(length), 1, 0, over)
    if cfg.scheme in ("clip", "rcf"):
        v = cfg.iterations if cfg.scheme == "rcf" else 1
        out, rep = clipping.rcf(sym, clipping.ClipConfig(cfg.a_db, v))
        return SchemeOutcome(out, rep.counter, rep.transforms, rep.clipped_samples, over)
    if cfg.scheme == "scf":
        factor = clipping.scf_beta(
            cfg.a_db, cfg.iterations, override=cfg.beta, n_data=sym.n_data, oversample=sym.oversample
        )
        out, rep = clipping.scf(sym, clipping.ClipConfig(cfg.a_db, cfg.iterations), factor)
        return SchemeOutcome(out, rep.counter, rep.transforms, rep.clipped_samples, over)
    win = peak_cancel.make_window(sym.n_data, cfg.window_length(sym.n_data, sym.oversample), sym.oversample)
    if cfg.scheme == "cpc":
        out, rep = peak_cancel.cpc(s0, a_linear, win)
    elif cfg.scheme == "alg1":
        i_max = cfg.i_max or peak_cancel.default_i_max(s0, a_linear, cfg.i_max_headroom)
        out, rep = peak_cancel.spc_algorithm1(s0, a_linear, win, i_max)
    else:
        out, rep = peak_cancel.spc_algorithm2(s0, a_linear, win, rng_seed)
    return SchemeOutcome(out, rep.counter, 1, rep.iterations_used, over)


@dataclass
class Processed:
    reference: np.ndarray
    reduced: np.ndarray
    filtered: np.ndarray
    output: np.ndarray
    outcome: SchemeOutcome


def process(cfg, sym, rng_seed=0):
    """Scheme, then out-of-band removal, then rescale to the original mean power."""
    s0 = oversampled_ifft(sym)
    outcome = reduce(cfg, sym, rng_seed)
    filtered = lowpass_filter(outcome.signal, sym.n_data)
    out = normalize_power(filtered, mean_power(s0))
    return Processed(s0, outcome.signal, filtered, out, outcome)


def pipeline(cfg, rng_seed=0):
    """Callable ``sym -> normalised output`` for use with :func:`paprlab.metrics.ber_awgn`.

    The k-th call draws its visiting order (Algorithm 2) from stream ``(rng_seed, k)``.
    """
    calls = itertools.count()

    def run(sym):
        seq = np.random.SeedSequence(rng_seed, spawn_key=(3, next(calls)))
        return process(cfg, sym, np.random.default_rng(seq)).output

    run.__name__ = f"pipeline_{cfg.label}"
    return run


def rate_param(cfg, mean_events):
    """The per-symbol count reported alongside a scheme's complexity (I-bar / P-bar)."""
    if cfg.scheme in ("alg1", "alg2", "cpc"):
        return mean_events
    return math.nan
