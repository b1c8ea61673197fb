"""Gaussian wedge-kernel dimension against h1(I^2(2)) across the catalog.

    python3 scripts/gaussian_kernels.py
"""

import argparse
import time

from conormal.engine import gaussian_wedge_kernel, h1_ideal_square
from conormal.specs import resolve

DEFAULT = ["veronese:1,3", "veronese:1,4", "veronese:1,5", "veronese:1,6", "veronese:2,2", "segre:1,2",
           "scroll:2,1", "scroll:2,2,1", "genus4", "genus5", "tetragonal:2,2,1,b=1,2", "pentagonal:g=8",
           "pentagonal:g=9", "g25", "plane-canonical:7"]


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("specs", nargs="*", default=DEFAULT)
    args = ap.parse_args(argv)
    for text in args.specs:
        t = time.perf_counter()
        X = resolve(text).build()
        kern = gaussian_wedge_kernel(X).dim
        h = h1_ideal_square(X, 2).value
        print(f"{text:<26} kernel={kern:<4} h1(2)={h:<4} {'ok' if kern == h else 'MISMATCH'} "
              f"({time.perf_counter() - t:.1f} s)")


if __name__ == "__main__":
    main()
