"""Independent reference computations used by the tests."""
import math

import mpmath
import numpy as np
from scipy import integrate, special


def newton_potential_radial(rho, r):
    """Potential of a radial density under 1/(4 pi |x|): (1/r) int_0^r rho s^2 ds + int_r^inf rho s ds."""
    if r == 0:
        return integrate.quad(lambda s: rho(s) * s, 0, np.inf, epsabs=1e-14, epsrel=1e-13)[0]
    inner = integrate.quad(lambda s: rho(s) * s**2, 0, r, epsabs=1e-14, epsrel=1e-13)[0]
    outer = integrate.quad(lambda s: rho(s) * s, r, np.inf, epsabs=1e-14, epsrel=1e-13)[0]
    return inner / r + outer


def gaussian_newton_closed_form(r):
    """sqrt(pi) erf(r) / (4 r), with limit 1/2 at the origin."""
    return 0.5 if r == 0 else math.sqrt(math.pi) * special.erf(r) / (4 * r)


def square_lattice_zeta(s):
    """sum' |n|^{-s} over Z^2 = 4 zeta(s/2) beta(s/2) (Dirichlet beta), valid by continuation."""
    z = mpmath.zeta(s / 2)
    beta = mpmath.dirichlet(s / 2, [0, 1, 0, -1])
    return float(4 * z * beta)


def central_difference(f, h):
    return (f(h) - f(-h)) / (2 * h)


def dilation_energy_bruteforce(t, A, B, C, N, alpha):
    return 0.5 * t ** (N - 2) * A + 0.5 * t**N * B - 0.5 * t ** (N + alpha) * C
