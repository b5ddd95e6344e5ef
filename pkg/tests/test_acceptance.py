"""Acceptance criteria, each at its stated tolerance.

Every criterion prints one PASS/FAIL line; the lines are repeated in the
pytest terminal summary.  Run standalone with ``python tests/test_acceptance.py``.
"""
import json
import math
import sys
import tempfile
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from choquard.cli import main as cli_main
from choquard.grid import Field, gaussian, l2_inner, make_grid
from choquard.model import ProblemSpec, el_residual, energy, profile_energy
from choquard.riesz import build_kernel, riesz_convolve, riesz_convolve_direct
from choquard.solver import CONVERGED, DEGENERATE, certify, log_t_grid, minimize_ground_state, mountain_pass_samples
from choquard.sweep import canonical_points, run_sweep

from oracles import central_difference, newton_potential_radial

RESULTS: dict[int, str] = {}


@lru_cache(maxsize=None)
def ground_state(N, alpha, p, M, L):
    spec = ProblemSpec.power(N, alpha, p)
    return spec, minimize_ground_state(spec, make_grid(N, M, L))


def reference_3d():
    return ground_state(3, 2.0, 2.0, 32, 16.0)


def criterion_1():
    rng = np.random.default_rng(1)
    worst = 0.0
    for N in (2, 3):
        g = make_grid(N, 16, 6.0)
        for alpha in (0.5, 1.0, 1.5) + ((2.0, 2.5) if N == 3 else ()):
            k = build_kernel(g, alpha)
            f = Field(g, rng.normal(size=g.shape))
            worst = max(worst, float(np.max(np.abs(riesz_convolve(f, k).values - riesz_convolve_direct(f, k).values))))
    return worst <= 1e-10, f"fast vs direct max-abs {worst:.2e} (tol 1e-10)"


def criterion_2():
    g = make_grid(3, 48, 16.0)
    got = riesz_convolve(gaussian(g), build_kernel(g, 2.0)).values[g.origin_index]
    oracle = newton_potential_radial(lambda s: math.exp(-s * s), 0.0)
    rel = abs(got - oracle) / oracle
    return rel <= 2e-3 and abs(oracle - 0.5) < 1e-12, f"origin value {got:.8f} vs {oracle:.8f}, rel {rel:.2e} (tol 2e-3)"


def criterion_3():
    g = make_grid(2, 16, 8.0)
    spec = ProblemSpec.power(2, 1.0, 2.5)
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(20):
        u = Field(g, rng.normal(size=g.shape))
        w = Field(g, rng.normal(size=g.shape))
        exact = l2_inner(el_residual(u, spec), w)
        err = min(abs(central_difference(lambda e: energy(u + e * w, spec), h) - exact)
                  for h in (1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6))
        worst = max(worst, err / abs(exact))
    return worst <= 1e-6, f"worst relative FD mismatch {worst:.2e} over 20 pairs (tol 1e-6)"


def criterion_4():
    _, sol = reference_3d()
    checks = {
        "converged": sol.status == CONVERGED,
        "residual": sol.residual_rel <= 1e-8,
        "nehari": sol.nehari_rel <= 1e-6,
        "pohozaev": sol.pohozaev_rel <= 1e-4,
    }
    bad = [k for k, ok in checks.items() if not ok]
    return not bad, (f"status={sol.status} residual={sol.residual_rel:.2e} nehari={sol.nehari_rel:.2e} "
                     f"pohozaev={sol.pohozaev_rel:.2e}" + (f" failing: {', '.join(bad)}" if bad else ""))


def criterion_5():
    spec, sol = reference_3d()
    t = log_t_grid(0.25, 4.0, 97)
    cert = certify(sol, spec, t_values=t)
    keys = ("peak_at_one", "below_peak", "negative_at_large_t")
    ok = all(cert.checks[k] for k in keys)
    e = cert.profile.energies
    return ok, (f"argmax t={cert.profile.t_max:.6f} (nearest to 1: t={t[48]:.6f}), I(u)={sol.energy:.8f}, "
                f"I(u_4)={e[-1]:.4f}, " + ", ".join(f"{k}={cert.checks[k]}" for k in keys))


def criterion_6():
    spec, sol = ground_state(2, 1.0, 2.5, 64, 20.0)
    if sol.status != CONVERGED:
        return False, f"N=2 solve ended with status {sol.status}"
    cert = certify(sol, spec, t0=0.1)
    A, B, C = cert.spliced.coefficients
    t0 = 0.1
    ramp = 0.5 * (A + t0**2 * B) - 0.5 * t0 ** (2 + spec.alpha) * C
    dil = float(profile_energy(t0, A, B, C, 2, spec.alpha))
    gap = abs(ramp - dil) / max(1.0, abs(dil))
    low = cert.spliced.energies[cert.spliced.t_values <= t0]
    ok = gap <= 1e-12 and bool(np.all(low < sol.energy))
    return ok, (f"splice gap {gap:.1e} (tol 1e-12), max ramp energy {low.max():.6f} < I(u)={sol.energy:.6f}; "
                f"certificate {'passed' if cert.passed else cert.violations}")


def criterion_7():
    res = run_sweep(canonical_points(), {3: make_grid(3, 96, 12.0)})
    bad = []
    for r in res.rows:
        want_ok = r.status == CONVERGED and r.energy > 0 if r.p in (2.0, 2.5, 3.0) else r.status in DEGENERATE
        if not want_ok:
            bad.append(f"p={r.p:g}:{r.status}")
    score = res.dichotomy_score()
    rows = " ".join(f"p={r.p:g}:{r.status}" for r in res.rows)
    return not bad and score == 1.0, f"{rows}; score {score:.0%}" + (f"; mismatched {bad}" if bad else "")


def criterion_8():
    e32 = reference_3d()[1].energy
    e48 = ground_state(3, 2.0, 2.0, 48, 16.0)[1].energy
    rel = abs(e32 - e48) / abs(e48)
    return rel <= 0.02, f"I(M=32)={e32:.6f} I(M=48)={e48:.6f} rel {rel:.2e} (tol 2e-2)"


def criterion_9():
    spec, sol = reference_3d()
    samples = mountain_pass_samples(spec, sol.u.grid, count=50, seed=9)
    gap = float(samples.min() - sol.energy)
    return gap >= -1e-6, f"min over 50 fields of max_t I(w_t) = {samples.min():.6f}, I(u) = {sol.energy:.6f}"


def criterion_10():
    cfg_text = "N=3\nalpha=2\np=2\nM=32\nL=16\nseed=11\n"
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        (tmp / "run.cfg").write_text(cfg_text)
        summaries, codes = [], []
        for k in range(2):
            codes.append(cli_main(["solve", "--config", str(tmp / "run.cfg"), "--out", str(tmp / f"r{k}")]))
            s = json.loads((tmp / f"r{k}" / "summary.json").read_text())
            s.pop("wall_time_s")
            summaries.append(s)
    same = summaries[0] == summaries[1]
    return same and codes[0] == codes[1], f"exit codes {codes}, summaries identical={same}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def run_criterion(k: int):
    ok, detail = CRITERIA[k - 1]()
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[k] = line
    print(line)
    return ok, line


@pytest.mark.parametrize("k", range(1, 11))
def test_criterion(k):
    ok, line = run_criterion(k)
    assert ok, line


if __name__ == "__main__":
    outcome = [run_criterion(k)[0] for k in range(1, 11)]
    sys.exit(0 if all(outcome) else 1)
