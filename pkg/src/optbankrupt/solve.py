"""One-call solve and report."""

from __future__ import annotations

from .model import ModelParams, derive
from .pb import PbSolution, solve_pb
from .policy import policy_maps
from .primal import PrimalSolution, audit, audit_passes, solve_primal

SCHEMA_VERSION = 1


def solve_model(params: ModelParams, waive=(), pb: PbSolution | None = None) -> PrimalSolution:
    """Validate, solve the post-bankruptcy problem, then the primal one."""
    dc = derive(params, waive=waive)
    if pb is None:
        pb = solve_pb(params, dc)
    return solve_primal(params, dc, pb)


def report(sol: PrimalSolution, x0: float | None = None, n_audit: int = 1000) -> dict:
    """Policy summary plus the residual audit, as plain JSON-ready data."""
    out = {"schema_version": SCHEMA_VERSION, "params": sol.params.to_dict()}
    out.update(policy_maps(sol, x0).report())
    checks = audit(sol, n=n_audit)
    out["residual_audit"] = {
        "pasting": dict(sol.residuals),
        "pb_pasting": dict(sol.pb.residuals),
        "checks": checks,
        "passes": audit_passes(checks),
    }
    return out
