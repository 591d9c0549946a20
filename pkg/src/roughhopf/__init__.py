"""Combinatorial Hopf algebras, elementary differentials and a log-ODE solver
for rough differential equations on charts."""

from .algebra import FormalSum, TruncationError, grade_project, pairing, truncate

__version__ = "0.1.0"

__all__ = ["FormalSum", "TruncationError", "grade_project", "pairing", "truncate", "__version__"]
