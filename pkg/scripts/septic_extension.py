"""Lift every first-order deformation of the canonical plane septic and check flatness.

Also builds the surface through a cubic and compares its hyperplane section with C.

    python3 scripts/septic_extension.py --kmax 4
"""

import argparse
import time
from dataclasses import dataclass

from conormal.deform import (
    first_order_space,
    first_order_state,
    flatness_check,
    plane_curve_extension,
    presentation,
    second_order_lift,
    surface_deformation,
    trivial_first_order,
)
from conormal.engine import canonical_gaussian_corank
from conormal.varieties.catalog import plane_curve_canonical


@dataclass(frozen=True)
class ExtensionRun:
    d: int = 7
    seed: int = 0
    kmax: int = 4
    lifts: int | None = None  # None: all basis vectors


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--d", type=int, default=7)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--kmax", type=int, default=4)
    ap.add_argument("--lifts", type=int, default=None)
    a = ap.parse_args(argv)
    run = ExtensionRun(a.d, a.seed, a.kmax, a.lifts)

    t0 = time.perf_counter()
    C = plane_curve_canonical(run.d, run.seed)
    cor = canonical_gaussian_corank(C)
    pres = presentation(C)
    T1 = first_order_space(C)
    print(f"g={C.genus} quadrics={pres.k} linear syzygies={pres.ell} corank={cor['corank']} "
          f"dim T1={T1.dim} dim Triv={trivial_first_order(pres).dim} ({time.perf_counter() - t0:.0f} s)")
    for i, v in enumerate(T1.basis[: run.lifts]):
        t = time.perf_counter()
        st = second_order_lift(first_order_state(pres, v))
        fl = flatness_check(st, run.kmax) if st.f2 is not None else None
        dims = {k: q for k, (q, _) in fl["dims"].items()} if fl else {}
        print(f"lift {i}: {st.status:<14} flatness={fl['status'] if fl else '-'} quotient dims {dims} "
              f"({time.perf_counter() - t:.0f} s)")

    X = plane_curve_extension(run.d, run.seed, curve=C)
    print("section check", X.notes["section_check"]["dims"])
    print("surface", surface_deformation(X, C))


if __name__ == "__main__":
    main()
