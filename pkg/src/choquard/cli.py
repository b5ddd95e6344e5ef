"""Command-line entry point.

    choquard solve --config run.cfg --out results/
    choquard path results/solution.field --out results/
    choquard sweep --config sweep.cfg --out results/
    choquard check --config run.cfg

Configuration is plain ``key=value`` text; ``#`` starts a comment and unknown
keys are rejected.  Exit codes: 0 success, 2 configuration or input error,
3 non-converged solve or failed hypotheses, 4 certificate failure,
5 dichotomy mismatch in a sweep.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fieldio import FieldFormatError, parse_terms, read_field, write_field
from .grid import GridSpec, ParameterError
from .model import Nonlinearity, ProblemSpec, dilation_profile, energy, hypothesis_check, path_n2
from .solver import CONVERGED, SolverConfig, certify, log_t_grid, minimize_ground_state
from .sweep import parse_points, run_sweep

log = logging.getLogger("choquard")

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_CERTIFICATE, EXIT_DICHOTOMY = 0, 2, 3, 4, 5

KEYS = {
    # problem
    "N": int, "alpha": float, "p": float, "terms": str,
    # grid (M2/L2, M3/L3 override per dimension in sweeps)
    "M": int, "L": float, "M2": int, "L2": float, "M3": int, "L3": float,
    # solver
    "max_iters": int, "tol_residual": float, "armijo_c": float, "armijo_shrink": float,
    "recenter_every": int, "init_amplitude": float, "init_width": float, "seed": int,
    "restarts": int, "memory": int, "pohozaev_gate": float,
    # certificate / path
    "pohozaev_tol": float, "nehari_tol": float, "t_min": float, "t_max": float,
    "t_count": int, "t0": float,
    # sweep
    "points": str, "workers": int, "buffer": float,
    # output
    "out_dir": str, "formats": str,
}
SOLVER_KEYS = ("max_iters", "tol_residual", "armijo_c", "armijo_shrink", "recenter_every",
               "init_amplitude", "init_width", "seed", "restarts", "memory", "pohozaev_gate")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if not sep or not key:
                raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
            if key not in KEYS:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            try:
                values[key] = KEYS[key](val)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
        return cls(values)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        return cls.parse(text)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def problem(self) -> ProblemSpec:
        if "N" not in self.values or "alpha" not in self.values:
            raise ConfigError("problem needs N and alpha")
        if ("p" in self.values) == ("terms" in self.values):
            raise ConfigError("give exactly one of p or terms")
        try:
            if "p" in self.values:
                nl = Nonlinearity.power(self.values["p"])
            else:
                nl = Nonlinearity(parse_terms(self.values["terms"]))
            return ProblemSpec(self.values["N"], self.values["alpha"], nl)
        except (ParameterError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def grid(self, N: int) -> GridSpec:
        M = self.values.get(f"M{N}", self.values.get("M"))
        L = self.values.get(f"L{N}", self.values.get("L"))
        if M is None or L is None:
            raise ConfigError(f"grid for N={N} needs M and L")
        try:
            return GridSpec(N, M, L)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    def solver(self, seed: int | None = None) -> SolverConfig:
        kw = {k: self.values[k] for k in SOLVER_KEYS if k in self.values}
        if seed is not None:
            kw["seed"] = seed
        try:
            return SolverConfig(**kw)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    def t_grid(self) -> np.ndarray:
        t_min, t_max = self.get("t_min", 0.25), self.get("t_max", 4.0)
        count = self.get("t_count", 97)
        if not (0 < t_min < t_max) or count < 2:
            raise ConfigError("need 0 < t_min < t_max and t_count >= 2")
        return log_t_grid(t_min, t_max, count)

    def formats(self) -> set[str]:
        fmts = {f.strip() for f in self.get("formats", "csv,jsonl").split(",") if f.strip()}
        if not fmts <= {"csv", "jsonl"}:
            raise ConfigError(f"unknown output format in {sorted(fmts)}")
        return fmts


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format(float(x), ".17g") if not isinstance(x, str) else x for x in row) + "\n")


def _out_dir(args, cfg: RunConfig) -> Path:
    out = Path(args.out or cfg.get("out_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _json_safe(obj.item())
    return obj


def cmd_solve(args, cfg: RunConfig) -> int:
    spec = cfg.problem()
    grid = cfg.grid(spec.N)
    scfg = cfg.solver(args.seed)
    if len(spec.nonlinearity.terms) != 1:
        raise ConfigError("solve needs a single-term nonlinearity (p=...)")
    out = _out_dir(args, cfg)
    t = time.perf_counter()
    sol = minimize_ground_state(spec, grid, scfg)
    wall = time.perf_counter() - t
    summary = {
        "problem": {"N": spec.N, "alpha": spec.alpha, "p": spec.p},
        "grid": {"N": grid.N, "M": grid.M, "L": grid.L},
        "seed": scfg.seed,
        **sol.summary(),
    }
    code = EXIT_OK
    if sol.status == CONVERGED:
        cert = certify(sol, spec, tol_residual=scfg.tol_residual,
                       pohozaev_tol=cfg.get("pohozaev_tol", 1e-4), nehari_tol=cfg.get("nehari_tol", 1e-6),
                       t_values=cfg.t_grid(), t0=cfg.get("t0") if spec.N == 2 else None)
        summary["certificate"] = {"passed": cert.passed, "checks": cert.checks, "violations": cert.violations}
        if not cert.passed:
            summary["status"] = cert.status
            code = EXIT_CERTIFICATE
    else:
        code = EXIT_DEGENERATE
    write_field(out / "solution.field", sol.u, spec.alpha, spec.nonlinearity.terms)
    summary["wall_time_s"] = wall
    (out / "summary.json").write_text(json.dumps(_json_safe(summary), indent=2, sort_keys=True) + "\n")
    print(f"status={summary['status']} energy={sol.energy:.12g} residual_rel={sol.residual_rel:.3e} "
          f"pohozaev_rel={sol.pohozaev_rel:.3e} iterations={sol.iterations}")
    return code


def cmd_path(args, cfg: RunConfig) -> int:
    try:
        u, meta = read_field(args.solution)
    except OSError as exc:
        raise ConfigError(f"cannot read solution file: {exc}") from exc
    except FieldFormatError as exc:
        raise ConfigError(str(exc)) from exc
    g = u.grid
    for key, have in (("N", g.N), ("M", g.M), ("L", g.L), ("alpha", meta["alpha"])):
        want = cfg.get(key)
        if want is not None and want != have:
            raise ConfigError(f"solution header {key}={have} does not match config {key}={want}")
    if cfg.get("p") is not None and meta["terms"] != ((1.0, cfg.get("p")),):
        raise ConfigError("solution header nonlinearity does not match config p")
    spec = ProblemSpec(g.N, meta["alpha"], Nonlinearity(meta["terms"]))
    out = _out_dir(args, cfg)
    t = cfg.t_grid()
    prof = dilation_profile(u, spec, t, cfg.get("pohozaev_tol", 1e-4))
    _write_csv(out / "path.csv", ["t", "energy"], zip(prof.t_values, prof.energies))
    info = {
        "energy": energy(u, spec),
        "t_at_max": prof.t_max,
        "argmax": prof.argmax,
        "pohozaev": prof.derivative_at_one(),
        "solution_like": prof.solution_like,
        "coefficients": list(prof.coefficients),
    }
    t0 = cfg.get("t0")
    if g.N == 2 and t0 is not None:
        tt = np.concatenate([np.linspace(0.0, t0, 41), t[t > t0]])
        spl = path_n2(u, spec, t0, tt)
        _write_csv(out / "path_n2.csv", ["t", "energy", "branch"],
                   ((a, b, "ramp" if a <= t0 else "dilation") for a, b in zip(spl.t_values, spl.energies)))
        info["t0"] = t0
    (out / "path_summary.json").write_text(json.dumps(_json_safe(info), indent=2, sort_keys=True) + "\n")
    print(f"energy={info['energy']:.17g} t_at_max={prof.t_max:.6g} solution_like={prof.solution_like}")
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    text = cfg.get("points", "")
    try:
        points = parse_points(text)
    except (ParameterError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if not points:
        raise ConfigError("sweep needs a nonempty 'points' list")
    grids = {N: cfg.grid(N) for N in sorted({pt[0] for pt in points})}
    scfg = cfg.solver(args.seed)
    fmts = cfg.formats()
    out = _out_dir(args, cfg)
    try:
        result = run_sweep(points, grids, scfg, workers=cfg.get("workers", 1), buffer=cfg.get("buffer", 0.2))
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    if "csv" in fmts:
        result.write_csv(out / "sweep.csv")
    if "jsonl" in fmts:
        result.write_jsonl(out / "sweep.jsonl")
    score = result.dichotomy_score()
    for r in result.rows:
        print(f"N={r.N} alpha={r.alpha:g} p={r.p:g} in_range={r.in_range} status={r.status} "
              f"energy={r.energy:.8g} {r.warnings}".rstrip())
    print(f"dichotomy score: {score:.3f}")
    return EXIT_OK if score == 1.0 else EXIT_DICHOTOMY


def cmd_check(args, cfg: RunConfig) -> int:
    report = hypothesis_check(cfg.problem())
    print("\n".join(report.lines()))
    return EXIT_OK if report.passed else EXIT_DEGENERATE


COMMANDS = {"solve": cmd_solve, "path": cmd_path, "sweep": cmd_sweep, "check": cmd_check}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--out", help="output directory (overrides out_dir)")
    common.add_argument("--seed", type=int, help="solver seed (overrides the config)")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="choquard", description="Choquard ground states and identities")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="compute and certify a ground state")
    p = sub.add_parser("path", parents=[common], help="dilation-path energies of a stored solution")
    p.add_argument("solution", help="field file written by 'solve'")
    sub.add_parser("sweep", parents=[common], help="existence dichotomy over (N, alpha, p)")
    sub.add_parser("check", parents=[common], help="report the growth hypotheses")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
