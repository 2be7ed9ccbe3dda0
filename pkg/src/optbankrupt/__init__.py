"""Consumption, portfolio and leisure choice with an optimal bankruptcy time.

The dual value functions are closed-form power sums whose free boundaries
are found by smooth pasting; policies, paths and sweeps build on them.
"""

from .dual import U_tilde, consumption_leisure, u_tilde
from .errors import (BothCasesAdmissible, BracketingFailure, ConfigError, DomainError,
                     InvalidParams, MultipleCasesAdmissible, NoCaseAdmissible, OptBankruptError,
                     OutOfRange)
from .model import DerivedConstants, ModelParams, derive, load_params, validate
from .pb import PbSolution, solve_pb
from .policy import (PolicyMaps, controls_at, dual_root, invert_multiplier, policy_maps,
                     solve_no_bankruptcy, thresholds, value_at)
from .presets import PRESETS, get_preset, load_config
from .primal import PrimalSolution, audit, solve_primal
from .solve import report, solve_model
from .sweep import Grid, SweepSpec, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BothCasesAdmissible", "BracketingFailure", "ConfigError", "DerivedConstants", "DomainError",
    "Grid", "InvalidParams", "ModelParams", "MultipleCasesAdmissible", "NoCaseAdmissible",
    "OptBankruptError", "OutOfRange", "PRESETS", "PbSolution", "PolicyMaps", "PrimalSolution",
    "SweepSpec", "U_tilde", "audit", "consumption_leisure", "controls_at", "derive", "dual_root",
    "get_preset", "invert_multiplier", "load_config", "load_params", "policy_maps", "report",
    "run_sweep", "solve_model", "solve_no_bankruptcy", "solve_pb", "solve_primal", "thresholds",
    "u_tilde", "validate", "value_at",
]
