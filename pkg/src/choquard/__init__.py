"""Ground states of the Choquard equation -Lap u + u = (I_alpha * F(u)) F'(u) on R^N, N = 2, 3."""
from .grid import Field, GridSpec, ParameterError, h1_seminorms, l2_inner, make_grid, recenter
from .model import (Nonlinearity, PathProfile, ProblemSpec, dilation_profile, el_residual, energy,
                    existence_range, f_eval, hypothesis_check, identity_combination, nehari,
                    nonlocal_term, path_n2, pohozaev, scaled_energy)
from .riesz import build_kernel, riesz_constant, riesz_convolve, riesz_convolve_direct
from .solver import Solution, SolverConfig, certify, minimize_ground_state, weinstein_quotient
from .sweep import SweepResult, run_sweep

__version__ = "0.1.0"
