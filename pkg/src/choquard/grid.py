"""Periodic-box discretization of R^N, sampled real fields and spectral calculus.

The box is [-L/2, L/2)^N with M samples per axis.  Sample ``j`` along an axis
sits at ``-L/2 + j*h`` with ``h = L/M``, so the origin is index ``M//2``.
Transforms use ``scipy.fft`` with the default normalization (unscaled forward,
1/M^N on the inverse); lattice frequencies are ``xi = k/L`` for
``k in [-M/2, M/2)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft


class ParameterError(ValueError):
    """A parameter lies outside its admissible domain."""


class GridMismatchError(ValueError):
    """Two fields (or a field and a kernel) live on different grids."""


@dataclass(frozen=True)
class GridSpec:
    N: int
    M: int
    L: float

    def __post_init__(self):
        if self.N not in (2, 3):
            raise ParameterError(f"dimension N must be 2 or 3, got {self.N}")
        if int(self.M) != self.M or self.M < 8 or self.M % 2:
            raise ParameterError(f"points per axis M must be an even integer >= 8, got {self.M}")
        if not np.isfinite(self.L) or self.L <= 0:
            raise ParameterError(f"box length L must be positive, got {self.L}")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return self.L / self.M

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.M,) * self.N

    @property
    def size(self) -> int:
        return self.M**self.N

    @property
    def cell_volume(self) -> float:
        return self.h**self.N

    @property
    def origin_index(self) -> tuple[int, ...]:
        return (self.M // 2,) * self.N

    def axis(self) -> np.ndarray:
        return -0.5 * self.L + self.h * np.arange(self.M)

    def coordinates(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays, one per axis."""
        x = self.axis()
        out = []
        for i in range(self.N):
            shape = [1] * self.N
            shape[i] = self.M
            out.append(x.reshape(shape))
        return out

    def radius_sq(self) -> np.ndarray:
        return sum(c**2 for c in self.coordinates()) * np.ones(self.shape)

    def frequency_sq(self, real: bool = False) -> np.ndarray:
        """|2 pi xi|^2 on the (r)fftn output layout."""
        k = 2.0 * np.pi * sfft.fftfreq(self.M, d=self.h)
        kr = 2.0 * np.pi * sfft.rfftfreq(self.M, d=self.h)
        out = 0.0
        for i in range(self.N):
            shape = [1] * self.N
            ki = kr if (real and i == self.N - 1) else k
            shape[i] = ki.size
            out = out + ki.reshape(shape) ** 2
        return np.asarray(out)

    def sample(self, fn) -> "Field":
        """Field with values ``fn(*coordinates)``."""
        vals = np.broadcast_to(fn(*self.coordinates()), self.shape)
        return Field(self, np.array(vals, dtype=float))


def make_grid(N: int, M: int, L: float) -> GridSpec:
    return GridSpec(N, M, L)


@dataclass(frozen=True)
class Field:
    """Real samples of a function on ``grid``, stored as an N-d array (row-major)."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} samples, got {v.size}")
        v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite samples")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    def __mul__(self, a: float) -> "Field":
        return Field(self.grid, a * self.values)

    __rmul__ = __mul__

    def __add__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    @cached_property
    def is_zero(self) -> bool:
        return not np.any(self.values)


def zeros(grid: GridSpec) -> Field:
    return Field(grid, np.zeros(grid.shape))


def gaussian(grid: GridSpec, amplitude: float = 1.0, width: float = 1.0, center=None) -> Field:
    """``amplitude * exp(-|x - center|^2 / width^2)``."""
    c = np.zeros(grid.N) if center is None else np.asarray(center, dtype=float)
    r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coordinates(), c))
    return Field(grid, amplitude * np.exp(-r2 / width**2) * np.ones(grid.shape))


def _same_grid(u: Field, v: Field) -> None:
    if u.grid != v.grid:
        raise GridMismatchError(f"grid mismatch: {u.grid} vs {v.grid}")


def l2_inner(u: Field, v: Field) -> float:
    """Rectangle-rule quadrature of the product ``u*v``."""
    _same_grid(u, v)
    return float(u.grid.cell_volume * np.vdot(u.values, v.values))


def h1_seminorms(u: Field) -> tuple[float, float]:
    """Return ``(int |grad u|^2, int u^2)``, the gradient term spectrally via Parseval."""
    g = u.grid
    uh = sfft.fftn(u.values)
    grad_sq = g.cell_volume / g.size * float(np.sum(g.frequency_sq() * np.abs(uh) ** 2))
    return grad_sq, l2_inner(u, u)


def h1_norm_sq(u: Field) -> float:
    return sum(h1_seminorms(u))


def parseval_mass(u: Field) -> float:
    """``int u^2`` evaluated on the transform side; equals ``l2_inner(u, u)``."""
    g = u.grid
    return g.cell_volume / g.size * float(np.sum(np.abs(sfft.fftn(u.values)) ** 2))


# Spectral operators on raw arrays; used in the solver's inner loop.

def apply_helmholtz(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """(-Delta + 1) applied spectrally."""
    k2 = _rfreq_sq(grid)
    return sfft.irfftn((1.0 + k2) * sfft.rfftn(values), s=grid.shape, axes=range(grid.N))


def solve_helmholtz(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """(-Delta + 1)^{-1} applied spectrally."""
    k2 = _rfreq_sq(grid)
    return sfft.irfftn(sfft.rfftn(values) / (1.0 + k2), s=grid.shape, axes=range(grid.N))


_RFREQ_CACHE: dict[GridSpec, np.ndarray] = {}


def _rfreq_sq(grid: GridSpec) -> np.ndarray:
    k2 = _RFREQ_CACHE.get(grid)
    if k2 is None:
        k2 = grid.frequency_sq(real=True)
        k2.setflags(write=False)
        _RFREQ_CACHE[grid] = k2
    return k2


def laplacian(u: Field) -> Field:
    k2 = _rfreq_sq(u.grid)
    g = u.grid
    return Field(g, sfft.irfftn(-k2 * sfft.rfftn(u.values), s=g.shape, axes=range(g.N)))


def peak_shift(values: np.ndarray, grid: GridSpec) -> tuple[int, ...]:
    """Circular shift that moves the max-|value| sample onto the origin index."""
    peak = np.unravel_index(int(np.argmax(np.abs(values))), values.shape)
    return tuple(o - p for o, p in zip(grid.origin_index, peak))


def recenter(u: Field) -> Field:
    """Circularly shift ``u`` so that its largest |sample| sits at the origin.

    The zero field is returned unchanged with a ``RuntimeWarning``.
    """
    if u.is_zero:
        warnings.warn("recenter called on the zero field; returned unchanged", RuntimeWarning)
        return u
    shift = peak_shift(u.values, u.grid)
    if not any(shift):
        return u
    return Field(u.grid, np.roll(u.values, shift, axis=tuple(range(u.grid.N))))


def boundary_ratio(u: Field) -> float:
    """max |u| over the box faces divided by max |u|; should be tiny for a well-sized box."""
    v = np.abs(u.values)
    peak = v.max()
    if peak == 0:
        return 0.0
    face = max(float(np.take(v, 0, axis=i).max()) for i in range(u.grid.N))
    return face / peak


def second_moment(values: np.ndarray, grid: GridSpec) -> float:
    """Effective squared width ``int |x - c|^2 u^2 / int u^2`` about the centroid of u^2."""
    w = values**2
    total = w.sum()
    if total == 0:
        return 0.0
    out = 0.0
    for x in grid.coordinates():
        c = float((w * x).sum() / total)
        out += float((w * (x - c) ** 2).sum() / total)
    return out
