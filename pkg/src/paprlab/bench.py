"""Wall-clock comparison of the compiled kernels and the numpy fallback."""

import time

import numpy as np

from . import _backend
from .clipping import linear_threshold
from .ofdm import oversampled_ifft, random_symbol
from .peak_cancel import cpc, default_i_max, make_window, spc_algorithm1, spc_algorithm2


def _time(fn, signals, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for s in signals:
            fn(s)
        best = min(best, time.perf_counter() - t0)
    return best / len(signals)


def run(n_symbols=50, seed=1, a_db=6.0, n_data=1024, oversample=4):
    """Mean seconds per symbol for each kernel and backend, as a list of dicts."""
    rng = np.random.default_rng(seed)
    signals = [oversampled_ifft(random_symbol(rng, n_data, oversample)[0]) for _ in range(n_symbols)]
    a_lin = [linear_threshold(s, a_db) for s in signals]
    win = make_window(n_data, n_data, oversample)
    backends = ["python"] + (["cython"] if _backend.compiled is not None else [])
    cases = {
        "alg1": lambda s, a, b: spc_algorithm1(s, a, win, default_i_max(s, a), backend=b),
        "alg2": lambda s, a, b: spc_algorithm2(s, a, win, 0, backend=b),
        "cpc": lambda s, a, b: cpc(s, a, win, backend=b),
    }
    rows = []
    pairs = list(zip(signals, a_lin))
    for name, fn in cases.items():
        for b in backends:
            sec = _time(lambda p, fn=fn, b=b: fn(p[0], p[1], b), pairs)
            rows.append({"kernel": name, "backend": b, "sec_per_symbol": sec})
    return rows


def main(n_symbols=50, seed=1):
    rows = run(n_symbols, seed)
    ref = {r["kernel"]: r["sec_per_symbol"] for r in rows if r["backend"] == "python"}
    print(f"{'kernel':<6} {'backend':<8} {'ms/symbol':>10} {'speedup':>8}")
    for r in rows:
        print(f"{r['kernel']:<6} {r['backend']:<8} {1e3 * r['sec_per_symbol']:>10.3f} {ref[r['kernel']] / r['sec_per_symbol']:>7.1f}x")
