"""Equations over free Q_pi-groups."""

from .kernels import BACKEND
from .pi_arith import PiSet, PiViolation

__all__ = ["BACKEND", "PiSet", "PiViolation"]
__version__ = "0.1.0"
