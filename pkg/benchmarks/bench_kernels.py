"""Compare compiled and pure-Python peak-cancellation kernels.

    python3 benchmarks/bench_kernels.py [n_symbols]
"""

import sys

from paprlab.bench import main

if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 50)
