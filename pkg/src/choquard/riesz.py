"""Free-space Riesz potential ``I_alpha * f`` on the periodic grid.

The kernel ``A(N, alpha) |x|^{alpha-N}`` is tabulated on the doubled box
[-L, L)^N and applied by zero-padding (Hockney's method), so there is no
periodic-image interaction and no singular zero mode.  The singular sample at
the origin needs special treatment:

``"corrected"`` (default)
    Lattice-zeta corrected weights.  For a smooth ``g`` the punctured lattice
    sum obeys ``h^N sum' K(hn) g(hn) = int K g + A h^alpha Z(N-alpha) g(0)
    + A h^(alpha+2) Z(N-alpha-2)/(2N) Delta g(0) + O(h^(alpha+4))`` with ``Z``
    the Epstein zeta function of the cubic lattice.  The origin and
    nearest-neighbour samples are chosen to cancel both error terms.
``"ball"``
    Average of the kernel over the ball with the cell's volume.  Only O(h^alpha)
    accurate because it misses the lattice constant.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gamma, pi

import numpy as np
import scipy.fft as sfft
from scipy import special

from .grid import Field, GridMismatchError, GridSpec, ParameterError

SINGULAR_MODES = ("corrected", "ball")
DIRECT_MAX_M = 32


def riesz_constant(N: int, alpha: float) -> float:
    """Normalization ``Gamma((N-a)/2) / (Gamma(a/2) pi^(N/2) 2^a)`` of the Riesz kernel."""
    _check_alpha(N, alpha)
    return gamma((N - alpha) / 2) / (gamma(alpha / 2) * pi ** (N / 2) * 2**alpha)


def _check_alpha(N: int, alpha: float) -> None:
    if not (0.0 < alpha < N):
        raise ParameterError(f"alpha must lie in (0, {N}), got {alpha}")


def _upper_gamma(a: float, x: np.ndarray) -> np.ndarray:
    """Non-regularized upper incomplete gamma, extended to a <= 0 by recurrence."""
    if a > 0:
        return special.gamma(a) * special.gammaincc(a, x)
    if a == 0:
        return special.exp1(x)
    return (_upper_gamma(a + 1.0, x) - x**a * np.exp(-x)) / a


def epstein_zeta(N: int, s: float, radius: int = 6) -> float:
    """Analytic continuation of ``sum_{n in Z^N, n != 0} |n|^{-s}``.

    Riemann's theta-function splitting; every lattice tail decays like
    ``exp(-pi |n|^2)`` so ``radius=6`` is at machine precision.
    """
    if s == N:
        raise ParameterError("Epstein zeta has a pole at s = N")
    if s == 0:
        return -1.0
    if s < 0 and float(s / 2).is_integer():
        return 0.0
    r = np.arange(-radius, radius + 1)
    mesh = np.meshgrid(*([r] * N), indexing="ij")
    n2 = sum(m**2 for m in mesh).ravel()
    x = pi * n2[n2 > 0].astype(float)
    near = np.sum(x ** (-s / 2) * _upper_gamma(s / 2, x))
    far = np.sum(x ** (-(N - s) / 2) * _upper_gamma((N - s) / 2, x))
    return float(pi ** (s / 2) / special.gamma(s / 2) * (near + far + 2 / (s - N) - 2 / s))


def _unit_ball_volume(N: int) -> float:
    return pi ** (N / 2) / gamma(N / 2 + 1)


def _sphere_area(N: int) -> float:
    return 2 * pi ** (N / 2) / gamma(N / 2)


@dataclass(frozen=True, eq=False)
class RieszKernel:
    alpha: float
    grid: GridSpec
    constant: float
    singular: str
    table: np.ndarray = field(repr=False)
    spectrum: np.ndarray = field(repr=False)

    def displacement(self, offset) -> float:
        """Table value at integer lattice displacement ``offset`` (|offset_i| < M)."""
        return float(self.table[tuple(int(o) % (2 * self.grid.M) for o in offset)])


def _doubled_distances(grid: GridSpec) -> np.ndarray:
    M = grid.M
    k = np.arange(2 * M)
    d = np.where(k < M, k, k - 2 * M) * grid.h
    mesh = np.meshgrid(*([d] * grid.N), indexing="ij")
    return np.sqrt(sum(m**2 for m in mesh))


def build_kernel(grid: GridSpec, alpha: float, singular: str = "corrected") -> RieszKernel:
    """Kernel samples on the doubled box, in wrap-around (FFT) order.

    Results are cached per ``(grid, alpha, singular)``; tables are read-only.
    """
    return _build_kernel(grid, float(alpha), singular)


@lru_cache(maxsize=32)
def _build_kernel(grid: GridSpec, alpha: float, singular: str) -> RieszKernel:
    N, h = grid.N, grid.h
    _check_alpha(N, alpha)
    if singular not in SINGULAR_MODES:
        raise ParameterError(f"singular must be one of {SINGULAR_MODES}, got {singular!r}")
    A = riesz_constant(N, alpha)
    r = _doubled_distances(grid)
    origin = (0,) * N
    r[origin] = 1.0
    table = A * r ** (alpha - N)
    if singular == "ball":
        r_h = h * _unit_ball_volume(N) ** (-1.0 / N)
        table[origin] = A * _sphere_area(N) * r_h**alpha / (alpha * h**N)
    else:
        z0 = epstein_zeta(N, N - alpha)
        z2 = epstein_zeta(N, N - alpha - 2)
        scale = A * h ** (alpha - N)
        table[origin] = -scale * (z0 - z2)
        for i in range(N):
            for step in (1, -1):
                idx = [0] * N
                idx[i] = step % (2 * grid.M)
                table[tuple(idx)] = scale * (1.0 - z2 / (2 * N))
    table.setflags(write=False)
    spectrum = sfft.rfftn(table)
    spectrum.setflags(write=False)
    return RieszKernel(alpha, grid, A, singular, table, spectrum)


def _check_pair(f: Field, kernel: RieszKernel) -> None:
    if f.grid != kernel.grid:
        raise GridMismatchError(f"field grid {f.grid} does not match kernel grid {kernel.grid}")


def convolve_array(values: np.ndarray, kernel: RieszKernel) -> np.ndarray:
    """Hockney convolution on a raw sample array (no validation)."""
    g = kernel.grid
    padded_shape = (2 * g.M,) * g.N
    fh = sfft.rfftn(values, s=padded_shape)
    out = sfft.irfftn(fh * kernel.spectrum, s=padded_shape)
    return g.cell_volume * out[(slice(0, g.M),) * g.N]


def riesz_convolve(f: Field, kernel: RieszKernel) -> Field:
    """Discrete free-space convolution ``h^N sum_y table[x-y] f(y)`` via FFT."""
    _check_pair(f, kernel)
    return Field(f.grid, convolve_array(f.values, kernel))


def riesz_convolve_direct(f: Field, kernel: RieszKernel) -> Field:
    """The same discrete sum by explicit summation over every (x, y) pair.

    Independent of the transform path; cost grows like M^(2N) so the grid is
    limited to ``M <= 32``.
    """
    _check_pair(f, kernel)
    g = f.grid
    if g.M > DIRECT_MAX_M:
        raise ParameterError(f"direct convolution limited to M <= {DIRECT_MAX_M}, got {g.M}")
    M2 = 2 * g.M
    idx = np.indices(g.shape).reshape(g.N, -1).T
    src = f.flat
    live = np.flatnonzero(src)
    src_idx, src_val = idx[live], src[live]
    out = np.empty(g.size)
    for j, x in enumerate(idx):
        diff = (x - src_idx) % M2
        out[j] = np.dot(kernel.table[tuple(diff.T)], src_val)
    return Field(g, g.cell_volume * out)
