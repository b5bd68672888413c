"""Robust adaptive beamforming under induced-norm uncertainty via sequential SOCP."""
from .linalg import ExtRational, vec_norm
from .rab import (QuadraticConstraint, RabProblem, RobustNormConstraint, StoppingRule,
                  objective, solve_sequential, worst_case_sinr)
from .socp import SolverConfig, Status, solve
from .worst_case import UncertaintySpec

__all__ = [
    "ExtRational", "vec_norm", "QuadraticConstraint", "RabProblem", "RobustNormConstraint",
    "StoppingRule", "objective", "solve_sequential", "worst_case_sinr", "SolverConfig",
    "Status", "solve", "UncertaintySpec",
]
