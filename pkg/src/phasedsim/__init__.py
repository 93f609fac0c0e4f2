"""Outcome-complete stabilizer simulation with exact global phase."""

from .errors import PhasedSimError

__all__ = ["PhasedSimError"]
__version__ = "0.1.0"
