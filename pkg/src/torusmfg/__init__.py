"""Monotone-operator solver for the stationary first-order MFG on the flat torus."""

__version__ = "0.1.0"

from .grid import GridSpec, StatePair, div, grad, inner_l2, mass, x_norm
from .hamiltonian import HamiltonianModel, QuadraticHamiltonian
from .operator import DualVector, ProblemSpec, apply_A, apply_A_eps, apply_B, pair, residual_strong
from .feasible import is_feasible, project_K
from .solver import SolverConfig, solve_mfg, solve_regularized, verify_minty

__all__ = [
    "GridSpec", "StatePair", "div", "grad", "inner_l2", "mass", "x_norm",
    "HamiltonianModel", "QuadraticHamiltonian",
    "DualVector", "ProblemSpec", "apply_A", "apply_A_eps", "apply_B", "pair", "residual_strong",
    "is_feasible", "project_K",
    "SolverConfig", "solve_mfg", "solve_regularized", "verify_minty",
]
