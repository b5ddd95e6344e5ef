"""Ground-state energy and identity defects under grid refinement at fixed box size."""
import argparse

from choquard.grid import make_grid
from choquard.model import ProblemSpec
from choquard.solver import timed_solve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=3)
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--L", type=float, default=16.0)
    ap.add_argument("--M", type=int, nargs="+", default=[24, 32, 48, 64])
    args = ap.parse_args()

    spec = ProblemSpec.power(args.N, args.alpha, args.p)
    prev = None
    print(f"{'M':>4} {'h':>7} {'status':>22} {'energy':>14} {'rel.change':>10} {'residual':>9} {'pohozaev':>9} {'time':>6}")
    for M in args.M:
        sol, wall = timed_solve(spec, make_grid(args.N, M, args.L))
        change = abs(sol.energy - prev) / abs(sol.energy) if prev else float("nan")
        print(f"{M:4d} {args.L / M:7.4f} {sol.status:>22} {sol.energy:14.8f} {change:10.2e} "
              f"{sol.residual_rel:9.2e} {sol.pohozaev_rel:9.2e} {wall:6.1f}")
        prev = sol.energy


if __name__ == "__main__":
    main()
