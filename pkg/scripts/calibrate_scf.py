"""Find the SCF beta whose simulated SDR matches a target, per threshold.

Usage: python3 scripts/calibrate_scf.py [--symbols 4000] [--seed 7]

SDR falls monotonically as beta grows, so each target is solved by bisection.
The in-band spectra X and F are computed once per symbol; for a given beta the
normalised output spectrum is c * (X - beta F), with c restoring the original
mean power, which is exactly what the filter-and-normalise tail produces.
"""

import argparse

import numpy as np

from paprlab import ofdm
from paprlab.clipping import clip, linear_threshold

TARGETS = {6.0: 25.57, 5.5: 23.76, 5.25: 22.89, 4.0: 19.32}


def spectra(a_db, n_symbols, seed, n_data=1024, oversample=4):
    rng = np.random.default_rng(seed)
    xs, fs = [], []
    for _ in range(n_symbols):
        sym, _bits = ofdm.random_symbol(rng, n_data, oversample)
        s = ofdm.oversampled_ifft(sym)
        removed = s - clip(s, linear_threshold(s, a_db))
        xs.append(sym.bins[sym.mask])
        fs.append(ofdm.forward_fft(removed, n_data).bins[sym.mask])
    return np.array(xs), np.array(fs)


def sdr_for(beta, x, f):
    y = x - beta * f
    c = np.sqrt(np.sum(np.abs(x) ** 2, axis=1) / np.sum(np.abs(y) ** 2, axis=1))[:, None]
    return 10 * np.log10(np.sum(np.abs(x) ** 2) / np.sum(np.abs(c * y - x) ** 2))


def solve(target, x, f, lo=0.0, hi=6.0, steps=40):
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if sdr_for(mid, x, f) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--symbols", type=int, default=4000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    for a_db, target in TARGETS.items():
        x, f = spectra(a_db, args.symbols, args.seed)
        beta = solve(target, x, f)
        print(f"a_db={a_db:5.2f}  target SDR={target:6.2f} dB  beta={beta:.3f}  check={sdr_for(beta, x, f):.2f} dB")


if __name__ == "__main__":
    main()
