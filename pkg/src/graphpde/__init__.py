"""Reaction-diffusion with the discrete p-Laplacian on networks with boundary.

Modules: :mod:`~graphpde.network` (graphs and their files),
:mod:`~graphpde.operators` (discrete calculus), :mod:`~graphpde.boundary`
(mixed boundary condition), :mod:`~graphpde.eigen` (first eigenpair),
:mod:`~graphpde.dynamics` (time integration), :mod:`~graphpde.classify`
(regime prediction) and :mod:`~graphpde.cli`.
"""

from .boundary import BoundarySolveConfig, fill_boundary, solve_boundary_value
from .classify import Regime, RegimeReport, classify
from .dynamics import IntegratorConfig, ProblemSpec, Trajectory, estimate_blowup_rate, integrate
from .eigen import EigenPair, EigenSolveConfig, first_eigenpair
from .network import GraphFormatError, Network, load_network, parse_network
from .operators import p_laplacian, p_normal_derivative, phi_p

__version__ = "0.1.0"

__all__ = [
    "BoundarySolveConfig",
    "EigenPair",
    "EigenSolveConfig",
    "GraphFormatError",
    "IntegratorConfig",
    "Network",
    "ProblemSpec",
    "Regime",
    "RegimeReport",
    "Trajectory",
    "classify",
    "estimate_blowup_rate",
    "fill_boundary",
    "first_eigenpair",
    "integrate",
    "load_network",
    "p_laplacian",
    "p_normal_derivative",
    "parse_network",
    "phi_p",
    "solve_boundary_value",
]
