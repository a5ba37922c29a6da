"""anibound: discrete quasi-minimizers of anisotropic, non-uniformly elliptic
energies and certification of their local boundedness by explicit level-set
iteration."""

from .exponents import (
    INF,
    Exponents,
    DerivedExponents,
    IterationConstants,
    conjugate_exponent,
    harmonic_mean,
    sobolev_star,
    derive,
    check_admissibility,
    theta_exponents,
    iteration_constants,
    choose_d,
)
from .fields import Grid, GridFunction, Ball, make_grid, gradient, lp_norm, superlevel_measure, truncate
from .integrand import WeightField, ModelIntegrand, eval_integrand, energy
from .minimize import SolveConfig, SolveResult, solve, verify_quasiminimality
from .degiorgi import certify, fast_convergence, hole_filling, j_sequence, sequences

__version__ = "0.1.0"
