"""Numerical workbench for real and quaternionic bundles over real algebraic curves."""

from .errors import InvalidArgument, InvalidState, UndeterminedEntry
from .linalg import GroupKind, Family
from .presentation import CurveTopology, CurveType, Structure

__all__ = [
    "CurveTopology",
    "CurveType",
    "Family",
    "GroupKind",
    "InvalidArgument",
    "InvalidState",
    "Structure",
    "UndeterminedEntry",
]

__version__ = "0.1.0"
