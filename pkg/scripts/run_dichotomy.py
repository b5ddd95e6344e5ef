"""Canonical existence/nonexistence sweep (N=3, alpha=1) written to CSV and JSONL."""
import argparse
import logging
from pathlib import Path

from choquard.grid import make_grid
from choquard.sweep import canonical_points, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--M", type=int, default=96)
    ap.add_argument("--L", type=float, default=12.0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/dichotomy")
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = run_sweep(canonical_points(), {3: make_grid(3, args.M, args.L)}, workers=args.workers)
    res.write_csv(out / "sweep.csv")
    res.write_jsonl(out / "sweep.jsonl")
    for r in res.rows:
        print(f"p={r.p:<4g} in_range={str(r.in_range):5s} {r.status:22s} energy={r.energy:12.6f} "
              f"pohozaev_rel={r.pohozaev_rel:.2e} iters={r.iterations:4d} {r.wall_time_s:6.1f}s {r.warnings}")
    print(f"dichotomy score {res.dichotomy_score():.0%}")


if __name__ == "__main__":
    main()
