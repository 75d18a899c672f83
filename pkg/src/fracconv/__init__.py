"""Fractional convection solvers built on second and third order
Grunwald-type convolution weights, with Crank-Nicolson time stepping."""

from fracconv.coeff import Scheme, WeightTable, a_seq, b_seq, c_seq, d_seq, scheme_weights, sequences
from fracconv.genfun import g_direct, g_k_form, re_g_closed, stability_scan
from fracconv.krylov import GmresConfig, GmresOutcome, gmres
from fracconv.solver import Direct, GridSpec, Gmres, ProblemSpec, SolveReport, run
from fracconv.toeplitz import ToeplitzOperator, build_bhat, combine_beta

__version__ = "0.1.0"

__all__ = [
    "Scheme",
    "WeightTable",
    "a_seq",
    "b_seq",
    "c_seq",
    "d_seq",
    "sequences",
    "scheme_weights",
    "g_direct",
    "g_k_form",
    "re_g_closed",
    "stability_scan",
    "GmresConfig",
    "GmresOutcome",
    "gmres",
    "ToeplitzOperator",
    "build_bhat",
    "combine_beta",
    "Direct",
    "Gmres",
    "GridSpec",
    "ProblemSpec",
    "SolveReport",
    "run",
]
