"""Command-line driver: ``solve``, ``sweep`` and ``simulate``.

Exit codes: 0 success, 1 configuration or input error, 2 when no unique
case admits a solution.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .errors import (ConfigError, InvalidParams, MultipleCasesAdmissible, NoCaseAdmissible,
                     OptBankruptError)
from .presets import load_config
from .sim import backend
from .sim.engine import SimConfig, budget_check, simulate
from .solve import SCHEMA_VERSION, report, solve_model
from .policy import policy_maps
from .sweep import Grid, SweepSpec, columns, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NOCASE = 0, 1, 2


def _num(x) -> str:
    return repr(float(x))


def _jsonable(obj):
    """Plain JSON types; non-finite floats become the strings inf/-inf/nan."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def _dump_json(data) -> str:
    return json.dumps(_jsonable(data), indent=2, sort_keys=False, allow_nan=False) + "\n"


def _flatten(data, prefix=""):
    for k, v in data.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        else:
            yield key, v


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return _num(v)
    return "" if v is None else str(v)


def _csv(header_comment: str, cols, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        values = [r.get(c) for c in cols] if isinstance(r, dict) else r
        w.writerow([_cell(v) for v in values])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- subcommands -------------------------------------------------------------

def cmd_solve(args) -> int:
    cfg = load_config(args.config, args.param)
    sol = solve_model(cfg.params, cfg.waive)
    rep = report(sol)
    if args.format == "csv":
        rows = [(k, v) for k, v in _flatten(rep)]
        _emit(_csv(f"optbankrupt solve schema {SCHEMA_VERSION}: key,value", ["key", "value"], rows),
              args.out)
    else:
        _emit(_dump_json(rep), args.out)
    return EXIT_OK


def _sweep_spec(args, cfg) -> SweepSpec:
    if args.grid:
        spec = SweepSpec(Grid.parse(args.grid), Grid.parse(args.grid2) if args.grid2 else None)
    elif cfg.sweep:
        spec = SweepSpec.from_dict(cfg.sweep)
    else:
        raise ConfigError("sweep needs --grid name=start:stop:count or a 'sweep' config section")
    if args.outputs:
        spec = SweepSpec(spec.grid, spec.grid2, tuple(args.outputs.split(",")))
    return spec


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, args.param)
    spec = _sweep_spec(args, cfg)
    rows = run_sweep(cfg.params, spec, cfg.waive, workers=args.workers)
    cols = columns(spec)
    if args.format == "json":
        _emit(_dump_json({"schema_version": SCHEMA_VERSION, "columns": cols,
                          "rows": [{c: r.get(c) for c in cols} for r in rows]}), args.out)
    else:
        _emit(_csv(f"optbankrupt sweep schema {SCHEMA_VERSION}: " + ",".join(cols), cols, rows),
              args.out)
    return EXIT_OK


PATH_COLS = ["path", "t", "Z", "X", "c", "l", "pi", "regime"]


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.param)
    sim = dict(cfg.sim)
    for key in ("dt", "horizon", "n_paths"):
        val = getattr(args, key)
        if val is not None:
            sim[key] = val
    if args.seed is not None:
        sim["seed"] = args.seed
    budget_paths = sim.pop("budget_paths", None)
    if args.budget_paths is not None:
        budget_paths = args.budget_paths
    try:
        sc = SimConfig(**sim)
    except TypeError as exc:
        raise ConfigError(f"bad sim section: {exc}") from None
    sol = solve_model(cfg.params, cfg.waive)
    pol = policy_maps(sol)
    paths = simulate(sol, pol, sc)
    taus = np.array([np.nan if p.tau is None else p.tau for p in paths])
    finite = taus[np.isfinite(taus)]
    summary = {
        "schema_version": SCHEMA_VERSION,
        "backend": backend.NAME,
        "sim": {"dt": sc.dt, "horizon": sc.horizon, "n_paths": sc.n_paths, "seed": sc.seed,
                "scheme": sc.scheme},
        "case": sol.case_tag,
        "x0": pol.x0,
        "x_bar": pol.x_bar,
        "immediate_bankruptcy": pol.immediate_bankruptcy,
        "tau": {
            "finite_fraction": finite.size / taus.size,
            "mean": float(finite.mean()) if finite.size else None,
            "median": float(np.median(finite)) if finite.size else None,
        },
    }
    if budget_paths:
        bc = budget_check(sol, SimConfig(sc.dt, sc.horizon, int(budget_paths), sc.seed))
        summary["budget_check"] = bc.to_dict()
    if args.format == "json":
        _emit(_dump_json(summary), args.out)
        return EXIT_OK
    rows = []
    for i, p in enumerate(paths):
        step = max(1, int(args.every))
        for j, row in enumerate(p.rows()):
            if j % step == 0 or j == p.times.size - 1:
                rows.append((i,) + row)
    _emit(_csv(f"optbankrupt paths schema {SCHEMA_VERSION}: " + ",".join(PATH_COLS),
               PATH_COLS, rows), args.out)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(_dump_json(summary))
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="optbankrupt", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, default_format):
        p.add_argument("--config", help="JSON run file (parameters, preset, waive, sim, sweep)")
        p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                       help="override one parameter; repeatable")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=default_format)
        p.add_argument("--seed", type=_u64, help="64-bit RNG seed (used by simulate)")

    s = sub.add_parser("solve", help="solve one instance and print the policy report")
    common(s, "json")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("sweep", help="sweep one or two parameters")
    common(s, "csv")
    s.add_argument("--grid", help="name=start:stop:count[:linear|log]")
    s.add_argument("--grid2", help="second grid for 2-D sweeps (varies fastest)")
    s.add_argument("--outputs", help="comma-separated subset of the output columns")
    s.add_argument("--workers", type=int, default=1, help="worker processes")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("simulate", help="simulate optimal paths")
    common(s, "csv")
    s.add_argument("--dt", type=float)
    s.add_argument("--horizon", type=float)
    s.add_argument("--n-paths", dest="n_paths", type=int)
    s.add_argument("--every", type=int, default=1, help="keep every n-th step in the CSV")
    s.add_argument("--budget-paths", type=int, help="paths for the budget identity check")
    s.add_argument("--summary", help="write the JSON summary here (CSV mode)")
    s.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidParams as exc:
        print(f"error: invalid parameters: {', '.join(exc.violations)}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoCaseAdmissible, MultipleCasesAdmissible) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NOCASE
    except OptBankruptError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
