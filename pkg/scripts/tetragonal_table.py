"""h1(I^2(k)) for tetragonal canonical curves next to the closed forms g-7 (b1 > 0) and 2(g-6) (b1 = 0).

    python3 scripts/tetragonal_table.py --kmax 5
"""

import argparse
from dataclasses import dataclass

from conormal.engine import h1_ideal_square
from conormal.varieties.catalog import tetragonal_curve


@dataclass(frozen=True)
class Instance:
    e: tuple[int, int, int]
    b: tuple[int, int]

    @property
    def genus(self) -> int:
        return sum(self.e) + 3

    def expected_k3(self) -> int:
        g = self.genus
        return g - 7 if self.b[0] > 0 else 2 * (g - 6)


INSTANCES = [
    Instance((2, 1, 1), (1, 1)),
    Instance((2, 2, 1), (1, 2)),
    Instance((2, 2, 2), (2, 2)),
    Instance((2, 1, 1), (0, 2)),
]


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--kmax", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    print(f"{'e':<10}{'b':<8}{'g':>3}  {'expected k=3':>12}  h1 for k=3..{args.kmax}")
    for inst in INSTANCES:
        X = tetragonal_curve(inst.e, *inst.b, seed=args.seed)
        vals = [h1_ideal_square(X, k).value for k in range(3, args.kmax + 1)]
        print(f"{str(inst.e):<10}{str(inst.b):<8}{inst.genus:>3}  {inst.expected_k3():>12}  {vals}")


if __name__ == "__main__":
    main()
