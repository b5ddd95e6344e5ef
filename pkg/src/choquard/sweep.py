"""Parameter studies over (N, alpha, p): the existence / nonexistence dichotomy."""
from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Mapping, Sequence

from .grid import GridSpec, ParameterError
from .model import ProblemSpec, existence_range
from .solver import CONVERGED, DEGENERATE, SolverConfig, minimize_ground_state

__all__ = ["SweepRow", "SweepResult", "existence_range", "run_sweep", "ENDPOINT_BUFFER"]

ENDPOINT_BUFFER = 0.2
ERROR = "error"


@dataclass
class SweepRow:
    N: int
    alpha: float
    p: float
    interval_lo: float
    interval_hi: float
    in_range: bool
    status: str
    energy: float
    residual_rel: float
    pohozaev_rel: float
    iterations: int
    wall_time_s: float
    warnings: str = ""

    @property
    def scored(self) -> bool:
        return "near_endpoint" not in self.warnings

    @property
    def matches_prediction(self) -> bool:
        if self.in_range:
            return self.status == CONVERGED and self.energy > 0
        return self.status in DEGENERATE


FIELDS = [f.name for f in fields(SweepRow)]


@dataclass
class SweepResult:
    rows: list[SweepRow]

    def dichotomy_score(self) -> float:
        scored = [r for r in self.rows if r.scored]
        if not scored:
            return math.nan
        return sum(r.matches_prediction for r in scored) / len(scored)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(FIELDS)
            for r in self.rows:
                w.writerow([_csv_cell(getattr(r, k)) for k in FIELDS])

    def write_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for r in self.rows:
                rec = {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                       for k, v in asdict(r).items()}
                fh.write(json.dumps(rec) + "\n")


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _solve_point(N: int, alpha: float, p: float, grid: GridSpec, cfg: SolverConfig,
                 buffer: float) -> SweepRow:
    t = time.perf_counter()
    lo = hi = math.nan
    in_range = False
    notes = []
    try:
        lo, hi = existence_range(N, alpha)
        in_range = lo < p < hi
        if min(abs(p - lo), abs(p - hi)) < buffer:
            notes.append("near_endpoint")
        sol = minimize_ground_state(ProblemSpec.power(N, alpha, p), grid, cfg)
    except Exception as exc:  # recorded per row; a sweep never aborts on one point
        notes.append(f"error: {exc}")
        return SweepRow(N, alpha, p, lo, hi, in_range, ERROR, math.nan, math.nan, math.nan, 0,
                        time.perf_counter() - t, "; ".join(notes))
    return SweepRow(N, alpha, p, lo, hi, in_range, sol.status, sol.energy, sol.residual_rel,
                    sol.pohozaev_rel, sol.iterations, time.perf_counter() - t, "; ".join(notes))


def run_sweep(points: Sequence[tuple[int, float, float]], grids: Mapping[int, GridSpec],
              cfg: SolverConfig | None = None, workers: int = 1,
              buffer: float = ENDPOINT_BUFFER) -> SweepResult:
    """Solve every ``(N, alpha, p)`` independently; rows come back in input order.

    ``grids`` maps the dimension to the grid used for all its points.  With
    ``workers > 1`` the points run in a process pool.
    """
    points = [(int(N), float(a), float(p)) for N, a, p in points]
    if not points:
        raise ParameterError("sweep needs at least one point")
    cfg = cfg or SolverConfig()
    for N, _, _ in points:
        if N not in grids:
            raise ParameterError(f"no grid given for dimension {N}")
    jobs = [(N, a, p, grids[N], cfg, buffer) for N, a, p in points]
    if workers <= 1:
        rows = [_solve_point(*job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_solve_point, *zip(*jobs)))
    return SweepResult(rows)


def parse_points(text: str) -> list[tuple[int, float, float]]:
    """``"3,1,2.0; 3,1,4.5"`` -> [(3, 1.0, 2.0), (3, 1.0, 4.5)]."""
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [s.strip() for s in chunk.split(",")]
        if len(parts) != 3:
            raise ParameterError(f"sweep point must be 'N,alpha,p', got {chunk!r}")
        out.append((int(parts[0]), float(parts[1]), float(parts[2])))
    return out


def canonical_points() -> Iterable[tuple[int, float, float]]:
    """N = 3, alpha = 1: three exponents inside (4/3, 4) and one on each side."""
    return [(3, 1.0, 2.0), (3, 1.0, 2.5), (3, 1.0, 3.0), (3, 1.0, 1.2), (3, 1.0, 4.5)]
