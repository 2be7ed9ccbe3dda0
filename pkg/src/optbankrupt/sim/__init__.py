"""Path simulation of the optimal dual process, wealth and controls."""

from .backend import COMPILED, NAME as BACKEND
from .engine import (BudgetEstimate, PathRecord, SimConfig, budget_check, budget_check_paths,
                     simulate, wealth_gap)

__all__ = ["BACKEND", "COMPILED", "BudgetEstimate", "PathRecord", "SimConfig", "budget_check",
           "budget_check_paths", "simulate", "wealth_gap"]
