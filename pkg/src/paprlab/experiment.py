"""Monte-Carlo experiment orchestration and result files.

Every symbol is drawn from its own random stream keyed by ``(seed, symbol
index)``, so all schemes see the same symbols and results do not depend on how
symbols are split across workers. Partial results are reduced in a fixed chunk
order, so output files are byte-identical for a given configuration.
"""

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import asdict, dataclass, field
import json
import logging
import math
from pathlib import Path

import numpy as np

from . import __version__, _backend
from .clipping import scf_beta
from .metrics import (
    OutOfSupportError,
    SdrAccumulator,
    ber_awgn,
    ccdf_estimate,
    papr_at,
)
from .ofdm import papr_db, random_symbol
from .peak_cancel import OpCounter
from .schemes import SchemeConfig, pipeline, process, rate_param

log = logging.getLogger(__name__)

TABLE_HEADER = ["scheme", "a_db", "papr_1e3_db", "sdr_db", "c_mul", "c_add", "c_comp", "ifft_count", "rate_param", "seed"]
CURVE_HEADER = ["x_db", "probability"]
CHUNK = 250


@dataclass
class ExperimentConfig:
    n_carriers: int = 1024
    oversample: int = 4
    modulation: str = "16qam"
    schemes: list = field(default_factory=list)
    n_symbols: int = 20000
    snr_grid: list | None = None
    rng_seed: int = 1
    output_path: str = "results"
    ccdf_target: float | None = 1e-3
    ber_min_bits: int = 1_000_000
    ccdf_grid: tuple = (0.0, 14.0, 0.05)
    workers: int = 1

    def __post_init__(self):
        if self.modulation.lower() != "16qam":
            raise ValueError("only 16qam modulation is supported")
        if self.n_symbols < 1:
            raise ValueError("n_symbols must be >= 1")
        self.schemes = [s if isinstance(s, SchemeConfig) else SchemeConfig(**s) for s in self.schemes]

    @classmethod
    def from_file(cls, path, **overrides):
        data = json.loads(Path(path).read_text())
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def manifest(self):
        d = asdict(self)
        d["schemes"] = [resolved_scheme(s, self) for s in self.schemes]
        d["ccdf_grid"] = list(self.ccdf_grid)
        return d


def resolved_scheme(s, cfg):
    """The scheme parameters with every default filled in, for the manifest."""
    d = s.as_dict()
    d["label"] = s.label
    if s.scheme in ("rcf", "scf", "clip"):
        d["v"] = s.iterations
    if s.scheme in ("cpc", "alg1", "alg2"):
        d["n_s"] = s.window_length(cfg.n_carriers, cfg.oversample)
    if s.scheme == "alg1" and s.i_max is None:
        d["i_max"] = f"ceil({s.i_max_headroom} * expected_peak_count) per symbol"
    if s.scheme == "scf":
        d["beta"] = scf_beta(s.a_db, s.iterations, override=s.beta, n_data=cfg.n_carriers, oversample=cfg.oversample).beta
    if s.scheme == "rcf":
        d["threshold_reference"] = "rms of the unprocessed signal, fixed across rounds"
    return d


def _stream(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def symbol_for(cfg, index):
    """Symbol ``index`` of the experiment (shared by every scheme)."""
    return random_symbol(_stream(cfg.rng_seed, 0, index), cfg.n_carriers, cfg.oversample)[0]


def order_seed_for(cfg, index):
    return int(_stream(cfg.rng_seed, 2, index).integers(2**63))


def process_symbol(cfg, scheme, index):
    """Re-run one symbol through the full pipeline; used to audit stored results."""
    sym = symbol_for(cfg, index)
    return sym, process(scheme, sym, order_seed_for(cfg, index))


@dataclass
class Partial:
    papr: np.ndarray
    sdr: SdrAccumulator
    counter: OpCounter
    events: int
    over_threshold: int
    ifft_count: int


def _run_chunk(cfg, scheme, start, stop):
    paprs = np.empty(stop - start)
    sdr = SdrAccumulator()
    counter = OpCounter()
    events = over = 0
    ifft_count = 0
    for i in range(start, stop):
        sym, res = process_symbol(cfg, scheme, i)
        paprs[i - start] = papr_db(res.output)
        sdr.add(sym, res.output)
        counter += res.outcome.counter
        events += res.outcome.events
        over += res.outcome.over_threshold
        ifft_count = res.outcome.ifft_count
    return Partial(paprs, sdr, counter, events, over, ifft_count)


@dataclass
class SchemeResult:
    config: SchemeConfig
    papr_samples: np.ndarray
    sdr_db: float
    mean_counter: tuple
    ifft_count: int
    mean_events: float
    mean_over_threshold: float
    papr_target_db: float | None
    warning: str | None = None


@dataclass
class ResultRow:
    scheme: str
    a_db: float
    papr_1e3_db: float | None
    sdr_db: float
    c_mul: int
    c_add: int
    c_comp: int
    ifft_count: int
    rate_param: float
    seed: int

    def cells(self):
        def fmt(x, spec):
            if x is None or (isinstance(x, float) and math.isnan(x)):
                return "NA"
            return format(x, spec)

        return [
            self.scheme,
            fmt(self.a_db, "g"),
            fmt(self.papr_1e3_db, ".4f"),
            fmt(self.sdr_db, ".4f"),
            str(self.c_mul),
            str(self.c_add),
            str(self.c_comp),
            str(self.ifft_count),
            fmt(self.rate_param, ".3f"),
            str(self.seed),
        ]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    schemes: list
    rows: list
    curves: dict
    ber: dict
    warnings: list


def run_scheme(cfg, scheme, executor=None):
    bounds = [(a, min(a + CHUNK, cfg.n_symbols)) for a in range(0, cfg.n_symbols, CHUNK)]
    if executor is None:
        parts = [_run_chunk(cfg, scheme, a, b) for a, b in bounds]
    else:
        futures = [executor.submit(_run_chunk, cfg, scheme, a, b) for a, b in bounds]
        parts = [f.result() for f in futures]
    paprs = np.concatenate([p.papr for p in parts])
    sdr = SdrAccumulator()
    counter = OpCounter()
    events = over = 0
    for p in parts:
        sdr = sdr.merge(p.sdr)
        counter += p.counter
        events += p.events
        over += p.over_threshold
    n = cfg.n_symbols
    warning = None
    target = None
    if cfg.ccdf_target is not None:
        try:
            target = papr_at(paprs, cfg.ccdf_target)
        except OutOfSupportError as exc:
            warning = f"{scheme.label} at {scheme.a_db} dB: {exc}"
            log.warning(warning)
        if warning is None and n < 10 / cfg.ccdf_target:
            warning = (
                f"{scheme.label} at {scheme.a_db} dB: {n} symbols is fewer than "
                f"10/{cfg.ccdf_target:g}; the CCDF estimate at the target is coarse"
            )
            log.warning(warning)
    mean_counter = tuple(int(round(c / n)) for c in counter.as_tuple())
    return SchemeResult(
        scheme,
        paprs,
        sdr.sdr_db,
        mean_counter,
        parts[0].ifft_count,
        events / n,
        over / n,
        target,
        warning,
    )


def run_experiment(cfg, with_ber=False):
    """Run every configured scheme over the shared symbol set."""
    executor = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        results = [run_scheme(cfg, s, executor) for s in cfg.schemes]
    finally:
        if executor is not None:
            executor.shutdown()
    rows, curves, ber, warnings = [], {}, {}, []
    lo, hi, step = cfg.ccdf_grid
    grid = np.round(np.arange(round((hi - lo) / step) + 1) * step + lo, 6)
    for r in results:
        s = r.config
        rows.append(
            ResultRow(
                s.label,
                s.a_db,
                r.papr_target_db,
                r.sdr_db,
                *r.mean_counter,
                r.ifft_count,
                rate_param(s, r.mean_events),
                cfg.rng_seed,
            )
        )
        curves[curve_name(s)] = ccdf_estimate(r.papr_samples, grid)
        if r.warning:
            warnings.append(r.warning)
        if with_ber:
            ber[curve_name(s)] = ber_awgn(
                pipeline(s, cfg.rng_seed),
                cfg.snr_grid or list(range(0, 22, 2)),
                cfg.ber_min_bits,
                cfg.rng_seed,
                cfg.n_carriers,
                cfg.oversample,
            )
    return ExperimentResult(cfg, results, rows, curves, ber, warnings)


def curve_name(s):
    return f"{s.label}_a{s.a_db:g}"


def _write_csv(path, header, rows):
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def emit_results(result, path, table_name="table"):
    """Write the table CSV, one CSV per CCDF/BER curve and a JSON run manifest."""
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = [_write_csv(out / f"{table_name}.csv", TABLE_HEADER, [r.cells() for r in result.rows])]
    for name, curve in result.curves.items():
        rows = [[f"{x:.6g}", f"{p:.8g}"] for x, p in zip(curve.thresholds_db, curve.probabilities)]
        written.append(_write_csv(out / f"ccdf_{name}.csv", CURVE_HEADER, rows))
    for name, points in result.ber.items():
        rows = [[f"{b.snr_db:.6g}", f"{b.ber:.8g}"] for b in points]
        written.append(_write_csv(out / f"ber_{name}.csv", CURVE_HEADER, rows))
    manifest = {
        "package": "paprlab",
        "version": __version__,
        "kernel_backend": _backend.BACKEND,
        "numpy": np.__version__,
        "config": result.config.manifest(),
        "conventions": {
            "threshold": "A = 10**(a_db/20) * rms of the unprocessed oversampled symbol",
            "pipeline": "scheme -> zero out-of-band bins -> rescale to the original mean power",
            "papr_1e3_db": "PAPR0 where the CCDF crosses 1e-3, log-linear interpolation",
            "sdr_db": "in-band frequency-domain SDR after normalisation, pooled over symbols",
            "snr": "Eb/N0 per bit; noise variance J*N0 per oversampled sample",
            "counters": "mean real operations per symbol, scheme only (shared filter excluded)",
            "rate_param": "alg1: mean iterations; alg2/cpc: mean cancellations; NA otherwise",
        },
        "warnings": result.warnings,
        "files": [p.name for p in written],
    }
    mpath = out / "manifest.json"
    try:
        mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {mpath}: {exc}") from exc
    return written + [mpath]
