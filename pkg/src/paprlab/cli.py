"""Command-line reproduction harness.

    paprlab table1 [--symbols N] [--seed S] [--out DIR]
    paprlab table2 ...
    paprlab ccdf  --scheme alg1 --scheme cpc --a-db 6
    paprlab ber   --scheme cpc --a-db 6 --snr 0 --snr 20
    paprlab sweep --scheme rcf --a-db 4 --a-db 5 --v 1 --v 3
    paprlab bench

Schemes are written ``name[:key=value,...]``, e.g. ``rcf:v=5`` or ``scf:beta=1.7``.
A JSON file passed with ``--config`` supplies any ExperimentConfig field; flags
given on the command line override it.
"""

import argparse
import logging
import sys

from .experiment import ExperimentConfig, emit_results, run_experiment
from .schemes import SchemeConfig

log = logging.getLogger("paprlab")

TABLE1_SCHEMES = ["alg1", "alg2", "cpc", "scf:v=100", "rcf:v=1", "rcf:v=3", "rcf:v=5"]
TABLE2_SCHEMES = [
    ("rcf:v=1", 2.5),
    ("rcf:v=3", 5.0),
    ("rcf:v=5", 5.5),
    ("scf:v=100", 5.25),
    ("scf:v=100", 5.5),
    ("alg1", 6.0),
    ("alg2", 6.0),
]
FIG4_SCHEMES = ["none", "alg1", "alg2", "cpc", "scf:v=100", "rcf:v=5"]

_INT_KEYS = {"v", "n_s", "i_max"}
_FLOAT_KEYS = {"beta", "i_max_headroom", "a_db"}


def parse_scheme(text, a_db):
    name, _, rest = text.partition(":")
    kwargs = {"scheme": name.strip(), "a_db": float(a_db)}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep:
            raise ValueError(f"bad scheme option {item!r} in {text!r}")
        if key in _INT_KEYS:
            kwargs[key] = int(value)
        elif key in _FLOAT_KEYS:
            kwargs[key] = float(value)
        else:
            raise ValueError(f"unknown scheme option {key!r} in {text!r}")
    return SchemeConfig(**kwargs)


def _parser():
    ap = argparse.ArgumentParser(prog="paprlab", description="PAPR reduction reproduction harness")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, symbols=20000):
        p.add_argument("--config", help="JSON file with ExperimentConfig fields")
        p.add_argument("--scheme", action="append", help="scheme spec, repeatable")
        p.add_argument("--a-db", action="append", type=float, help="threshold in dB, repeatable")
        p.add_argument("--symbols", type=int, default=None, help=f"symbols per scheme (default {symbols})")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--n-carriers", type=int, default=None)
        p.add_argument("--oversample", type=int, default=None)
        p.add_argument("--n-s", type=int, default=None, help="window length for cpc/alg1/alg2")
        p.add_argument("--workers", type=int, default=None)
        p.set_defaults(default_symbols=symbols)
        return p

    common(sub.add_parser("table1", help="PAPR/SDR/complexity at A = 6 and 4 dB"))
    common(sub.add_parser("table2", help="comparable-PAPR comparison"))
    common(sub.add_parser("ccdf", help="PAPR CCDF curves"))
    p = common(sub.add_parser("ber", help="BER over AWGN"), symbols=200)
    p.add_argument("--snr", action="append", type=float, help="Eb/N0 grid point in dB, repeatable")
    p.add_argument("--min-bits", type=int, default=None)
    p = common(sub.add_parser("sweep", help="grid over thresholds and iteration counts"))
    p.add_argument("--v", action="append", type=int, help="iteration count for rcf/scf, repeatable")
    p = sub.add_parser("bench", help="time compiled kernels against the pure-Python fallback")
    p.add_argument("--symbols", type=int, default=50)
    p.add_argument("--seed", type=int, default=1)
    return ap


def _schemes(args):
    specs, a_dbs = args.scheme, args.a_db
    if args.command == "table1":
        return [parse_scheme(s, a) for a in (a_dbs or [6.0, 4.0]) for s in (specs or TABLE1_SCHEMES)]
    if args.command == "table2":
        if specs or a_dbs:
            return [parse_scheme(s, a) for a in (a_dbs or [6.0]) for s in (specs or ["alg1"])]
        return [parse_scheme(s, a) for s, a in TABLE2_SCHEMES]
    if args.command == "ccdf":
        return [parse_scheme(s, a) for a in (a_dbs or [6.0]) for s in (specs or ["none"] + TABLE1_SCHEMES)]
    if args.command == "ber":
        return [parse_scheme(s, a) for a in (a_dbs or [6.0]) for s in (specs or FIG4_SCHEMES)]
    out = []
    for a in a_dbs or [6.0]:
        for s in specs or ["rcf"]:
            base = parse_scheme(s, a)
            if base.scheme in ("rcf", "scf") and args.v:
                out.extend(SchemeConfig(**{**base.as_dict(), "v": v}) for v in args.v)
            else:
                out.append(base)
    return out


def _build_config(args):
    overrides = {
        "n_symbols": args.symbols,
        "rng_seed": args.seed,
        "output_path": args.out,
        "n_carriers": args.n_carriers,
        "oversample": args.oversample,
        "workers": args.workers,
    }
    if args.command == "ber":
        overrides["snr_grid"] = args.snr
        overrides["ber_min_bits"] = args.min_bits
        overrides["ccdf_target"] = None
    if args.config:
        cfg = ExperimentConfig.from_file(args.config, **overrides)
    else:
        cfg = ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})
        if args.symbols is None:
            cfg.n_symbols = args.default_symbols
        if args.out is None:
            cfg.output_path = f"results/{args.command}"
    schemes = cfg.schemes
    if args.scheme or args.a_db or not schemes:
        schemes = _schemes(args)
    if args.n_s is not None:
        schemes = [
            SchemeConfig(**{**s.as_dict(), "n_s": args.n_s}) if s.scheme in ("cpc", "alg1", "alg2") else s
            for s in schemes
        ]
    cfg.schemes = schemes
    return cfg


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "bench":
        from .bench import main as bench_main

        bench_main(args.symbols, args.seed)
        return 0
    try:
        cfg = _build_config(args)
        result = run_experiment(cfg, with_ber=args.command == "ber")
        files = emit_results(result, cfg.output_path, table_name=args.command)
    except (ValueError, TypeError) as exc:
        print(f"paprlab: configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"paprlab: {exc}", file=sys.stderr)
        return 3
    for row in result.rows:
        print(",".join(row.cells()))
    log.info("wrote %d files to %s", len(files), cfg.output_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
