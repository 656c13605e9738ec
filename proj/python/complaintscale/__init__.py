"""Complaint intensity annotation and analysis."""

from ._core import *  # noqa: F401,F403
from ._core import Error, design_tuples, aggregate_scores, bin_score

__all__ = [name for name in dir() if not name.startswith("_")]
