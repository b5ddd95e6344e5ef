"""Variational structure of the Choquard problem ``-Lap u + u = (I_alpha * F(u)) F'(u)``.

Energy ``I(u) = 1/2 int(|grad u|^2 + u^2) - 1/2 int (I_alpha * F(u)) F(u)`` and the
identities it generates: Euler-Lagrange residual, Nehari, Pohozaev, the scaled
functional and closed-form dilation paths.  Nonlinearities are finite sums of
positive powers ``F(s) = sum c_i |s|^p_i / p_i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grid import Field, ParameterError, h1_seminorms, laplacian
from .riesz import build_kernel, convolve_array


@dataclass(frozen=True)
class Nonlinearity:
    terms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        terms = tuple((float(c), float(p)) for c, p in self.terms)
        if not terms:
            raise ParameterError("nonlinearity needs at least one term")
        for c, p in terms:
            if not c > 0:
                raise ParameterError(f"coefficients must be positive, got {c}")
            if not p > 1:
                raise ParameterError(f"exponents must exceed 1, got {p}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def power(cls, p: float, c: float = 1.0) -> "Nonlinearity":
        return cls(((c, p),))

    @property
    def is_homogeneous(self) -> bool:
        return len({p for _, p in self.terms}) == 1

    @property
    def exponent(self) -> float:
        """The common exponent of a homogeneous nonlinearity."""
        if not self.is_homogeneous:
            raise ParameterError("nonlinearity is not a single power")
        return self.terms[0][1]

    def F(self, s):
        a = np.abs(s)
        return sum(c * a**p / p for c, p in self.terms)

    def dF(self, s):
        a = np.abs(s)
        return sum(c * np.sign(s) * a ** (p - 1) for c, p in self.terms)

    def dF_times_s(self, s):
        a = np.abs(s)
        return sum(c * a**p for c, p in self.terms)


@dataclass(frozen=True)
class ProblemSpec:
    N: int
    alpha: float
    nonlinearity: Nonlinearity

    def __post_init__(self):
        if self.N not in (2, 3):
            raise ParameterError(f"dimension N must be 2 or 3, got {self.N}")
        if not (0.0 < self.alpha < self.N):
            raise ParameterError(f"alpha must lie in (0, {self.N}), got {self.alpha}")

    @classmethod
    def power(cls, N: int, alpha: float, p: float) -> "ProblemSpec":
        return cls(N, float(alpha), Nonlinearity.power(p))

    @property
    def p(self) -> float:
        return self.nonlinearity.exponent


def f_eval(nl: Nonlinearity, s: float) -> tuple[float, float]:
    return float(nl.F(s)), float(nl.dF(s))


def _check_dims(u: Field, spec: ProblemSpec) -> None:
    if u.grid.N != spec.N:
        raise ParameterError(f"field dimension {u.grid.N} differs from problem dimension {spec.N}")


def _potential(u: Field, spec: ProblemSpec) -> tuple[np.ndarray, np.ndarray]:
    """``(F(u), I_alpha * F(u))`` as arrays."""
    _check_dims(u, spec)
    Fu = spec.nonlinearity.F(u.values)
    return Fu, convolve_array(Fu, build_kernel(u.grid, spec.alpha))


def nonlocal_term(u: Field, spec: ProblemSpec) -> float:
    """D(u) = int (I_alpha * F(u)) F(u)."""
    Fu, phi = _potential(u, spec)
    return float(u.grid.cell_volume * np.vdot(phi, Fu))


def energy_parts(u: Field, spec: ProblemSpec) -> tuple[float, float, float]:
    """The three integrals ``(grad_sq, mass_sq, D)`` that every scalar here is built from."""
    grad_sq, mass_sq = h1_seminorms(u)
    return grad_sq, mass_sq, nonlocal_term(u, spec)


def energy(u: Field, spec: ProblemSpec) -> float:
    A, B, C = energy_parts(u, spec)
    return 0.5 * (A + B) - 0.5 * C


def el_residual(u: Field, spec: ProblemSpec) -> Field:
    """(-Lap + 1) u - (I_alpha * F(u)) F'(u); also the L2 gradient of the energy."""
    _, phi = _potential(u, spec)
    lap = laplacian(u).values
    return Field(u.grid, -lap + u.values - phi * spec.nonlinearity.dF(u.values))


def nehari(u: Field, spec: ProblemSpec) -> float:
    """Equation tested against u: ``grad_sq + mass_sq - int (I_alpha*F(u)) F'(u) u``."""
    grad_sq, mass_sq = h1_seminorms(u)
    _, phi = _potential(u, spec)
    tested = u.grid.cell_volume * np.vdot(phi, spec.nonlinearity.dF_times_s(u.values))
    return grad_sq + mass_sq - float(tested)


def pohozaev_from_parts(A: float, B: float, C: float, N: int, alpha: float) -> float:
    return 0.5 * (N - 2) * A + 0.5 * N * B - 0.5 * (N + alpha) * C


def pohozaev(u: Field, spec: ProblemSpec) -> float:
    return pohozaev_from_parts(*energy_parts(u, spec), spec.N, spec.alpha)


def profile_energy(t, A: float, B: float, C: float, N: int, alpha: float):
    """Energy of the dilation ``v(x/t)`` from the integrals of ``v``."""
    t = np.asarray(t, dtype=float)
    return 0.5 * t ** (N - 2) * A + 0.5 * t**N * B - 0.5 * t ** (N + alpha) * C


def scaled_energy(sigma: float, v: Field, spec: ProblemSpec) -> float:
    """``I(v(e^{-sigma} .))`` in closed form."""
    return float(profile_energy(math.exp(sigma), *energy_parts(v, spec), spec.N, spec.alpha))


@dataclass(frozen=True)
class PathProfile:
    t_values: np.ndarray
    energies: np.ndarray
    coefficients: tuple[float, float, float]
    N: int
    alpha: float
    solution_like: bool
    t0: float | None = None

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.energies))

    @property
    def t_max(self) -> float:
        return float(self.t_values[self.argmax])

    def derivative_at_one(self) -> float:
        """d/dt of the dilation energy at t = 1; equals the Pohozaev functional."""
        A, B, C = self.coefficients
        return pohozaev_from_parts(A, B, C, self.N, self.alpha)


def _solution_like(A: float, B: float, C: float, N: int, alpha: float, tol: float) -> bool:
    scale = max(A + B, np.finfo(float).tiny)
    return abs(pohozaev_from_parts(A, B, C, N, alpha)) <= tol * scale


def _check_t(t_values) -> np.ndarray:
    t = np.asarray(t_values, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ParameterError("t_values must be a nonempty 1-d sequence")
    if np.any(t <= 0):
        raise ParameterError("dilation parameters must be positive")
    return t


def dilation_profile(v: Field, spec: ProblemSpec, t_values: Sequence[float],
                     pohozaev_tol: float = 1e-4) -> PathProfile:
    """Energies along ``t -> v(x/t)`` evaluated from the integrals of ``v``.

    ``solution_like`` flags whether the integrals satisfy the Pohozaev relation
    to ``pohozaev_tol`` (relative to the H1 norm); only then is t = 1 the peak.
    """
    if v.is_zero:
        raise ParameterError("dilation profile of the zero field")
    t = _check_t(t_values)
    A, B, C = energy_parts(v, spec)
    return PathProfile(t, profile_energy(t, A, B, C, spec.N, spec.alpha), (A, B, C),
                       spec.N, spec.alpha, _solution_like(A, B, C, spec.N, spec.alpha, pohozaev_tol))


def path_n2_energy(t, t0: float, A: float, B: float, C: float, alpha: float, p: float):
    """Energy on the planar path: dilation for t > t0, amplitude ramp ``(t/t0) v(./t0)`` below."""
    t = np.asarray(t, dtype=float)
    s = t / t0
    ramp = 0.5 * s**2 * (A + t0**2 * B) - 0.5 * s ** (2 * p) * t0 ** (2 + alpha) * C
    return np.where(t > t0, profile_energy(np.maximum(t, t0), A, B, C, 2, alpha), ramp)


def path_n2(v: Field, spec: ProblemSpec, t0: float, t_values: Sequence[float],
            pohozaev_tol: float = 1e-4) -> PathProfile:
    """Continuous path from 0 through ``v`` for N = 2, where plain dilation is discontinuous at t = 0."""
    if spec.N != 2:
        raise ParameterError("the spliced path is only needed for N = 2")
    if not (0.0 < t0 < 1.0):
        raise ParameterError(f"splice point t0 must lie in (0, 1), got {t0}")
    if v.is_zero:
        raise ParameterError("path of the zero field")
    p = spec.p
    t = np.asarray(t_values, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(t < 0):
        raise ParameterError("t_values must be a nonempty sequence of nonnegative reals")
    A, B, C = energy_parts(v, spec)
    return PathProfile(t, path_n2_energy(t, t0, A, B, C, spec.alpha, p), (A, B, C), 2, spec.alpha,
                       _solution_like(A, B, C, 2, spec.alpha, pohozaev_tol), t0)


def existence_range(N: int, alpha: float) -> tuple[float, float]:
    """Open interval of exponents p for which ``F = |u|^p/p`` admits nontrivial solutions."""
    if N not in (2, 3):
        raise ParameterError(f"dimension N must be 2 or 3, got {N}")
    if not (0.0 < alpha < N):
        raise ParameterError(f"alpha must lie in (0, {N}), got {alpha}")
    lo = 1.0 + alpha / N
    hi = math.inf if N == 2 else (N + alpha) / (N - 2)
    return lo, hi


@dataclass(frozen=True)
class HypothesisReport:
    N: int
    alpha: float
    exponents: tuple[float, ...]
    interval: tuple[float, float]
    F0: bool
    F1: bool
    F2: bool

    @property
    def passed(self) -> bool:
        return self.F0 and self.F1 and self.F2

    def lines(self) -> list[str]:
        prime = "'" if self.N == 2 else ""
        lo, hi = self.interval
        return [
            f"N={self.N} alpha={self.alpha:g} exponents={list(self.exponents)}",
            f"existence interval: ({lo:.17g}, {hi:.17g})",
            f"(F0) nontrivial: {'pass' if self.F0 else 'fail'}",
            f"(F1{prime}) growth: {'pass' if self.F1 else 'fail'}",
            f"(F2{prime}) subcritical: {'pass' if self.F2 else 'fail'}",
            f"overall: {'pass' if self.passed else 'fail'}",
        ]


def hypothesis_check(spec: ProblemSpec) -> HypothesisReport:
    """Decide the growth hypotheses for a power-sum nonlinearity.

    For F = sum c_i |s|^p_i / p_i the small-s condition is p_min > 1 + alpha/N.
    For N = 3 the growth bound on F' and the large-s condition both reduce to
    p_max <= or < (N+alpha)/(N-2); for N = 2 any power is dominated by the
    exponential bound, so only the small-s condition bites.
    """
    ps = tuple(p for _, p in spec.nonlinearity.terms)
    lo, hi = existence_range(spec.N, spec.alpha)
    F0 = all(c > 0 for c, _ in spec.nonlinearity.terms)
    if spec.N == 2:
        F1 = True
    else:
        F1 = all(lo <= p <= hi for p in ps)
    F2 = all(lo < p < hi for p in ps)
    return HypothesisReport(spec.N, spec.alpha, ps, (lo, hi), F0, F1, F2)


def identity_combination(u: Field, spec: ProblemSpec) -> tuple[float, float, float]:
    """Coefficients of the Pohozaev-minus-Nehari combination and its value on ``u``.

    ``combo = Poh(u) - (N+alpha)/(2p) * Neh(u)``; on a solution both vanish, so
    when the two coefficients share a strict sign the only solution is zero.
    """
    if not spec.nonlinearity.is_homogeneous or len(spec.nonlinearity.terms) != 1:
        raise ParameterError("identity combination needs a single-term nonlinearity")
    N, alpha, p = spec.N, spec.alpha, spec.p
    k = (N + alpha) / (2 * p)
    grad_coef = 0.5 * (N - 2) - k
    mass_coef = 0.5 * N - k
    grad_sq, mass_sq = h1_seminorms(u)
    return grad_coef, mass_coef, grad_coef * grad_sq + mass_coef * mass_sq
