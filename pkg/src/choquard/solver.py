"""Ground states by minimizing the amplitude-free quotient

    Q(u) = (int |grad u|^2 + u^2) / D(u)^(1/p),    D(u) = int (I_alpha * F(u)) F(u),

for ``F = |u|^p / p``.  A minimizer ``v`` solves ``(-Lap+1) v = lam (I_alpha*F(v)) F'(v)``
with ``lam = ||v||_H1^2 / (p D(v))``; the rescaled ``u = lam^(1/(2p-2)) v`` then
solves the equation with no multiplier.  Descent uses the direction
``-(-Lap+1)^{-1} grad Q`` with Armijo backtracking; a unit step is exactly the
fixed-point update ``v <- lam (-Lap+1)^{-1} (I_alpha*F(v)) F'(v)``.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .grid import (Field, GridSpec, ParameterError, apply_helmholtz, boundary_ratio, gaussian,
                   peak_shift, second_moment, solve_helmholtz)
from .model import (PathProfile, ProblemSpec, dilation_profile, el_residual, energy_parts,
                    hypothesis_check, nehari, path_n2, pohozaev_from_parts, profile_energy)
from .riesz import build_kernel, convolve_array

log = logging.getLogger(__name__)

CONVERGED = "converged"
VANISHING = "degenerate_vanishing"
SPREADING = "degenerate_spreading"
MAX_ITERS = "max_iters"
CERTIFICATE_FAILED = "certificate_failed"
DEGENERATE = (VANISHING, SPREADING)


class DegenerateFieldError(ValueError):
    """The nonlocal term of a field vanishes, so the quotient is undefined."""


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 2000
    tol_residual: float = 1e-8
    armijo_c: float = 1e-4
    armijo_shrink: float = 0.5
    recenter_every: int = 25
    init_amplitude: float = 1.0
    init_width: float = 1.0
    seed: int = 0
    restarts: int = 0
    min_step: float = 1e-10
    vanishing_mass_ratio: float = 1e-10
    memory: int = 8
    pohozaev_gate: float = 1e-2

    def __post_init__(self):
        if self.max_iters < 1:
            raise ParameterError("max_iters must be at least 1")
        if not self.tol_residual > 0:
            raise ParameterError("tol_residual must be positive")
        if not (0 < self.armijo_c < 1 and 0 < self.armijo_shrink < 1):
            raise ParameterError("armijo_c and armijo_shrink must lie in (0, 1)")
        if self.recenter_every < 1:
            raise ParameterError("recenter_every must be at least 1")
        if not (self.init_amplitude > 0 and self.init_width > 0):
            raise ParameterError("initial amplitude and width must be positive")
        if self.restarts < 0:
            raise ParameterError("restarts must be nonnegative")


@dataclass
class Solution:
    u: Field
    energy: float
    residual_rel: float
    pohozaev_rel: float
    nehari_rel: float
    multiplier: float
    iterations: int
    status: str
    quotient: float = math.nan
    pohozaev: float = math.nan
    boundary_ratio: float = math.nan
    hypotheses_passed: bool = True
    history: dict = field(default_factory=dict, repr=False)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    def summary(self) -> dict:
        return {
            "status": self.status,
            "energy": self.energy,
            "residual_rel": self.residual_rel,
            "pohozaev_rel": self.pohozaev_rel,
            "nehari_rel": self.nehari_rel,
            "multiplier": self.multiplier,
            "quotient": self.quotient,
            "iterations": self.iterations,
            "boundary_ratio": self.boundary_ratio,
            "hypotheses_passed": self.hypotheses_passed,
        }


def _single_power(spec: ProblemSpec) -> float:
    nl = spec.nonlinearity
    if len(nl.terms) != 1:
        raise ParameterError("ground-state solver needs a single-term power nonlinearity")
    return nl.exponent


def weinstein_quotient(u: Field, spec: ProblemSpec) -> float:
    p = _single_power(spec)
    A, B, D = energy_parts(u, spec)
    if not D > 0:
        raise DegenerateFieldError("nonlocal term vanishes; quotient undefined")
    return (A + B) / D ** (1.0 / p)


class _State:
    """Everything the iteration needs at one iterate, computed once."""

    __slots__ = ("v", "Hv", "G", "D", "Q", "lam", "nl", "res")

    def __init__(self, v: np.ndarray, grid: GridSpec, kernel, spec: ProblemSpec, p: float):
        vol = grid.cell_volume
        self.v = v
        self.Hv = apply_helmholtz(v, grid)
        self.G = vol * float(np.vdot(self.Hv, v))
        Fv = spec.nonlinearity.F(v)
        phi = convolve_array(Fv, kernel)
        self.D = vol * float(np.vdot(phi, Fv))
        if not self.D > 0:
            raise DegenerateFieldError("nonlocal term vanished during descent")
        self.Q = self.G / self.D ** (1.0 / p)
        self.lam = self.G / (p * self.D)
        self.nl = phi * spec.nonlinearity.dF(v)
        r = self.Hv - self.lam * self.nl
        self.res = math.sqrt(vol * float(np.vdot(r, r)) / self.G)


def _initial(grid: GridSpec, cfg: SolverConfig, attempt: int) -> np.ndarray:
    width = cfg.init_width
    if attempt:
        rng = np.random.default_rng([cfg.seed, attempt])
        width *= math.exp(rng.normal(0.0, 0.25))
    return np.array(gaussian(grid, cfg.init_amplitude, width).values)


def _descend(spec: ProblemSpec, grid: GridSpec, cfg: SolverConfig, v0: np.ndarray):
    p = _single_power(spec)
    kernel = build_kernel(grid, spec.alpha)
    vol = grid.cell_volume
    axes = tuple(range(grid.N))
    st = _State(v0, grid, kernel, spec, p)
    mass0 = vol * float(np.vdot(v0, v0)) / st.G
    width_cap = (grid.L / 4) ** 2
    hist = {"quotient": [st.Q], "residual": [st.res], "width_sq": [], "mass_ratio": [], "step": []}
    status, it = MAX_ITERS, 0
    eps_q = 64 * np.finfo(float).eps
    pairs: list[tuple[np.ndarray, np.ndarray, float]] = []
    g = _quotient_gradient(st, p)

    for it in range(cfg.max_iters + 1):
        width_sq = second_moment(st.v, grid)
        mass_ratio = vol * float(np.vdot(st.v, st.v)) / st.G / mass0
        hist["width_sq"].append(width_sq)
        hist["mass_ratio"].append(mass_ratio)
        if width_sq > width_cap:
            status = SPREADING
            break
        if mass_ratio < cfg.vanishing_mass_ratio:
            status = VANISHING
            break
        if st.res <= cfg.tol_residual:
            status = CONVERGED
            break
        if it == cfg.max_iters:
            break

        d = _lbfgs_direction(g, pairs, st, grid, p)
        slope = vol * float(np.vdot(g, d))
        if not slope < 0:
            pairs.clear()
            d = _lbfgs_direction(g, pairs, st, grid, p)
            slope = vol * float(np.vdot(g, d))
        s = 1.0
        while True:
            trial = _State(st.v + s * d, grid, kernel, spec, p)
            if trial.Q <= st.Q + cfg.armijo_c * s * slope + eps_q * abs(st.Q):
                break
            s *= cfg.armijo_shrink
            if s < cfg.min_step:
                trial = None
                break
        if trial is None:
            log.info("line search stalled at iteration %d (residual %.3e)", it, st.res)
            break
        g_new = _quotient_gradient(trial, p)
        step, dg = trial.v - st.v, g_new - g
        sy = float(np.vdot(step, dg))
        if sy > 1e-12 * np.linalg.norm(step) * np.linalg.norm(dg):
            pairs.append((step, dg, 1.0 / sy))
            if len(pairs) > cfg.memory:
                pairs.pop(0)
        st, g = trial, g_new
        hist["quotient"].append(st.Q)
        hist["residual"].append(st.res)
        hist["step"].append(s)
        if (it + 1) % cfg.recenter_every == 0:
            shift = peak_shift(st.v, grid)
            if any(shift):
                st = _State(np.roll(st.v, shift, axis=axes), grid, kernel, spec, p)
                g = _quotient_gradient(st, p)
                pairs.clear()
    return st, status, it, hist


def _quotient_gradient(st: _State, p: float) -> np.ndarray:
    """L2 gradient of Q at the current iterate."""
    return 2.0 / st.D ** (1.0 / p) * (st.Hv - st.lam * st.nl)


def _lbfgs_direction(g: np.ndarray, pairs, st: _State, grid: GridSpec, p: float) -> np.ndarray:
    """Two-loop recursion with the Sobolev preconditioner as initial inverse Hessian.

    With no stored pairs this is exactly the fixed-point update direction.
    """
    q = g.copy()
    coefs = []
    for s, y, rho in reversed(pairs):
        a = rho * float(np.vdot(s, q))
        q -= a * y
        coefs.append(a)
    if pairs:
        s, y, _ = pairs[-1]
        Py = solve_helmholtz(y, grid)
        gamma = float(np.vdot(s, y)) / float(np.vdot(y, Py))
    else:
        gamma = 0.5 * st.D ** (1.0 / p)
    r = gamma * solve_helmholtz(q, grid)
    for (s, y, rho), a in zip(pairs, reversed(coefs)):
        b = rho * float(np.vdot(y, r))
        r += (a - b) * s
    return -r


def minimize_ground_state(spec: ProblemSpec, grid: GridSpec, cfg: SolverConfig | None = None) -> Solution:
    """Compute the ground state of ``spec`` on ``grid``.

    Runs outside the existence range are allowed; they end in a degenerate
    status (profile collapsing below the grid scale or spreading over the box)
    rather than raising.  The Pohozaev gate that detects this on a finite grid
    assumes the profile is resolved: an under-resolved in-range run (large p on
    a coarse grid) can also trip it, so refine before reading a degenerate
    status as nonexistence.
    """
    cfg = cfg or SolverConfig()
    p = _single_power(spec)
    if grid.N != spec.N:
        raise ParameterError(f"grid dimension {grid.N} differs from problem dimension {spec.N}")
    hyp = hypothesis_check(spec)
    if not hyp.passed:
        log.warning("p=%g lies outside the existence interval %s", p, hyp.interval)

    total_iters = 0
    for attempt in range(cfg.restarts + 1):
        try:
            st, status, iters, hist = _descend(spec, grid, cfg, _initial(grid, cfg, attempt))
        except DegenerateFieldError:
            st, status, iters, hist = None, VANISHING, 0, {}
        total_iters += iters
        if status != MAX_ITERS:
            break

    if st is None:
        return Solution(Field(grid, np.zeros(grid.shape)), 0.0, math.nan, math.nan, math.nan,
                        math.nan, total_iters, status, hypotheses_passed=hyp.passed, history=hist)

    u = Field(grid, st.lam ** (1.0 / (2 * p - 2)) * st.v)
    sol = _diagnose(u, spec)
    sol.multiplier = st.lam
    sol.iterations = total_iters
    sol.quotient = st.Q
    sol.history = hist
    sol.hypotheses_passed = hyp.passed
    if status == CONVERGED and not (sol.residual_rel <= cfg.tol_residual and sol.energy > 0):
        status = MAX_ITERS
    if status == CONVERGED and sol.pohozaev_rel > cfg.pohozaev_gate:
        # Nehari holds exactly here, so a large Pohozaev defect means Q still decreases
        # along dilations: concentration if positive, spreading if negative.
        status = VANISHING if sol.pohozaev > 0 else SPREADING
    sol.status = status
    return sol


def _diagnose(u: Field, spec: ProblemSpec) -> Solution:
    A, B, C = energy_parts(u, spec)
    h1 = A + B
    r = el_residual(u, spec).values
    res = math.sqrt(u.grid.cell_volume * float(np.vdot(r, r)) / h1)
    poh = pohozaev_from_parts(A, B, C, spec.N, spec.alpha)
    return Solution(
        u=u,
        energy=0.5 * h1 - 0.5 * C,
        residual_rel=res,
        pohozaev_rel=abs(poh) / h1,
        nehari_rel=abs(nehari(u, spec)) / h1,
        multiplier=math.nan,
        iterations=0,
        status=CONVERGED,
        pohozaev=poh,
        boundary_ratio=boundary_ratio(u),
    )


def log_t_grid(t_min: float = 0.25, t_max: float = 4.0, count: int = 97) -> np.ndarray:
    return np.geomspace(t_min, t_max, count)


@dataclass
class Certificate:
    status: str
    residual_rel: float
    pohozaev_rel: float
    nehari_rel: float
    energy: float
    profile: PathProfile
    checks: dict
    spliced: PathProfile | None = None

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def violations(self) -> list[str]:
        return [k for k, ok in self.checks.items() if not ok]


def certify(sol: Solution, spec: ProblemSpec, *, tol_residual: float = 1e-8, pohozaev_tol: float = 1e-4,
            nehari_tol: float = 1e-6, t_values=None, t0: float | None = None) -> Certificate:
    """Recompute every identity for a converged solution and check the dilation path.

    The path must peak at the sample nearest t = 1, stay strictly below I(u)
    elsewhere and be negative at the largest t.  For N = 2 with ``t0`` given,
    the spliced path is checked too.
    """
    if sol.status != CONVERGED:
        raise ValueError(f"certify needs a converged solution, got status {sol.status!r}")
    u = sol.u
    if u.is_zero:
        raise ValueError("certify rejects the zero field")
    fresh = _diagnose(u, spec)
    t = log_t_grid() if t_values is None else np.asarray(t_values, dtype=float)
    prof = dilation_profile(u, spec, t, pohozaev_tol)
    peak = int(np.argmin(np.abs(np.log(t))))
    off = np.arange(t.size) != peak
    checks = {
        "residual": fresh.residual_rel <= tol_residual,
        "pohozaev": fresh.pohozaev_rel <= pohozaev_tol,
        "nehari": fresh.nehari_rel <= nehari_tol,
        "positive_energy": fresh.energy > 0,
        "peak_at_one": prof.argmax == peak,
        "below_peak": bool(np.all(prof.energies[off] < prof.energies[peak])),
        "negative_at_large_t": bool(prof.energies[-1] < 0),
    }
    spliced = None
    if spec.N == 2 and t0 is not None:
        low = np.linspace(0.0, t0, 41)
        spliced = path_n2(u, spec, t0, np.concatenate([low, t[t > t0]]), pohozaev_tol)
        A, B, C = spliced.coefficients
        ramp_at_t0 = 0.5 * (A + t0**2 * B) - 0.5 * t0 ** (2 + spec.alpha) * C
        dil_at_t0 = float(profile_energy(t0, A, B, C, 2, spec.alpha))
        checks["splice_continuous"] = abs(ramp_at_t0 - dil_at_t0) <= 1e-12 * max(1.0, abs(dil_at_t0))
        checks["ramp_below_peak"] = bool(np.all(spliced.energies[: low.size] < fresh.energy))
    status = CONVERGED if all(checks.values()) else CERTIFICATE_FAILED
    return Certificate(status, fresh.residual_rel, fresh.pohozaev_rel, fresh.nehari_rel, fresh.energy,
                       prof, checks, spliced)


def profile_max(A: float, B: float, C: float, N: int, alpha: float) -> float:
    """Supremum over t > 0 of the closed-form dilation energy (finite whenever C > 0)."""
    if not C > 0:
        raise ValueError("dilation energy is unbounded when the nonlocal term vanishes")
    f = lambda logt: -float(profile_energy(math.exp(logt), A, B, C, N, alpha))
    grid = np.linspace(-12, 12, 481)
    vals = [-f(x) for x in grid]
    k = int(np.argmax(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return max(-res.fun, vals[k])


def random_admissible_field(grid: GridSpec, rng: np.random.Generator) -> Field:
    """A positive sum of one to three Gaussian bumps with random centres, widths and heights."""
    vals = np.zeros(grid.shape)
    for _ in range(rng.integers(1, 4)):
        centre = rng.uniform(-2.0, 2.0, size=grid.N)
        vals += gaussian(grid, rng.uniform(0.2, 3.0), rng.uniform(0.6, 2.5), centre).values
    return Field(grid, vals)


def mountain_pass_samples(spec: ProblemSpec, grid: GridSpec, count: int = 50, seed: int = 0) -> np.ndarray:
    """Max of the dilation energy over t for ``count`` random fields; each bounds the min-max level from above."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        w = random_admissible_field(grid, rng)
        A, B, C = energy_parts(w, spec)
        if C > 0:
            out.append(profile_max(A, B, C, spec.N, spec.alpha))
    return np.array(out)


def timed_solve(spec: ProblemSpec, grid: GridSpec, cfg: SolverConfig | None = None) -> tuple[Solution, float]:
    t = time.perf_counter()
    sol = minimize_ground_state(spec, grid, cfg)
    return sol, time.perf_counter() - t
