"""Hybrid finite-difference solver for the quasilinear turning-point problem

    -eps^2 u'' + x b(u) u' = c(x),   u(nu) = U_-,  u(1) = U_+,

on piecewise-equidistant S(l) meshes, with error sweeps and numerical
stability certification.
"""

from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    MissingExactSolution,
    NonConvergence,
    SingularMatrix,
    TurnpointError,
)
from .meshgen import LambdaMode, Mesh, MeshConfig, Nu, build_mesh
from .problem import Problem, custom_problem, manufactured_tanh_problem
from .scheme import Scheme, SchemeLayout, compute_layout, jacobian, residual
from .solver import DiscreteSolution, SolverConfig, solve
from .analysis import certify_suite, error_report, h_norm

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DimensionError",
    "DomainError",
    "MissingExactSolution",
    "NonConvergence",
    "SingularMatrix",
    "TurnpointError",
    "LambdaMode",
    "Mesh",
    "MeshConfig",
    "Nu",
    "build_mesh",
    "Problem",
    "custom_problem",
    "manufactured_tanh_problem",
    "Scheme",
    "SchemeLayout",
    "compute_layout",
    "jacobian",
    "residual",
    "DiscreteSolution",
    "SolverConfig",
    "solve",
    "certify_suite",
    "error_report",
    "h_norm",
]
