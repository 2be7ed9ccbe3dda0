"""Parameter sweeps over one or two model inputs."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, InvalidParams, OptBankruptError
from .model import ModelParams, derive, field_names
from .pb import PbSolution, solve_pb
from .policy import policy_maps
from .primal import solve_primal

OUTPUTS = ("x_bar", "x_hat", "x_tilde", "V", "lambda_star", "case_tag")

# inputs that do not enter the post-bankruptcy problem
_PB_FREE = ("F", "eta", "d", "alpha", "x0")


@dataclass(frozen=True)
class Grid:
    param: str
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.param not in field_names():
            raise ConfigError(f"unknown sweep parameter {self.param!r}")
        if int(self.count) != self.count or self.count < 2:
            raise ConfigError("grid count must be an integer >= 2")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"spacing must be linear or log, got {self.spacing!r}")
        if self.spacing == "log" and not (self.start > 0 and self.stop > 0):
            raise ConfigError("log spacing needs positive endpoints")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, int(self.count))
        return np.linspace(self.start, self.stop, int(self.count))

    @classmethod
    def parse(cls, text: str) -> "Grid":
        """``name=start:stop:count[:log]``."""
        name, sep, rest = text.partition("=")
        parts = rest.split(":")
        if not sep or len(parts) not in (3, 4):
            raise ConfigError(f"grid {text!r} is not of the form name=start:stop:count[:spacing]")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"grid {text!r} has non-numeric bounds") from None
        return cls(name.strip(), start, stop, count, parts[3] if len(parts) == 4 else "linear")

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        try:
            return cls(d["param"], float(d["start"]), float(d["stop"]), int(d["count"]),
                       d.get("spacing", "linear"))
        except KeyError as exc:
            raise ConfigError(f"grid entry misses {exc}") from None


@dataclass(frozen=True)
class SweepSpec:
    grid: Grid
    grid2: Grid | None = None
    outputs: tuple[str, ...] = OUTPUTS

    def __post_init__(self):
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad:
            raise ConfigError(f"unknown sweep outputs {bad}")

    def points(self):
        if self.grid2 is None:
            return [(float(v),) for v in self.grid.values()]
        pairs = itertools.product(self.grid.values(), self.grid2.values())
        return [(float(a), float(b)) for a, b in pairs]

    @property
    def params(self) -> tuple[str, ...]:
        return (self.grid.param,) if self.grid2 is None else (self.grid.param, self.grid2.param)

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        g2 = d.get("grid2")
        return cls(Grid.from_dict(d["grid"]) if "grid" in d else Grid.from_dict(d),
                   Grid.from_dict(g2) if g2 else None,
                   tuple(d.get("outputs", OUTPUTS)))


def pb_key(params: ModelParams) -> tuple:
    d = params.to_dict()
    return tuple(sorted((k, v) for k, v in d.items() if k not in _PB_FREE))


class PbCache:
    """Post-bankruptcy solutions keyed by the inputs that affect them."""

    def __init__(self):
        self._store: dict[tuple, PbSolution] = {}
        self.hits = 0
        self.misses = 0

    def get(self, params: ModelParams, dc) -> PbSolution:
        key = pb_key(params)
        pb = self._store.get(key)
        if pb is None:
            self.misses += 1
            pb = solve_pb(params, dc)
            self._store[key] = pb
            return pb
        self.hits += 1
        # same constants, but U~ reads alpha and F from the attached inputs
        return replace(pb, dc=dc)


def evaluate_point(params: ModelParams, waive=(), cache: PbCache | None = None) -> dict:
    """Outputs at one grid point; ``status`` is ok, skipped or failed."""
    row = {"theta": params.theta, "status": "ok", "message": ""}
    try:
        dc = derive(params, waive=waive)
    except InvalidParams as exc:
        row.update(status="skipped", message=";".join(exc.violations))
        return row
    try:
        pb = cache.get(params, dc) if cache is not None else solve_pb(params, dc)
        sol = solve_primal(params, dc, pb)
        pm = policy_maps(sol)
    except OptBankruptError as exc:
        row.update(status="failed", message=f"{type(exc).__name__}: {exc}")
        return row
    row.update(x_bar=pm.x_bar, x_hat=pm.x_hat, x_tilde=pm.x_tilde, V=pm.V_x,
               lambda_star=pm.lambda_star, case_tag=sol.case_tag)
    return row


def _chunk(args):
    base, names, points, waive = args
    cache = PbCache()
    out = []
    for pt in points:
        p = base.with_overrides(dict(zip(names, pt)))
        out.append(evaluate_point(p, waive, cache))
    return out


def run_sweep(base: ModelParams, spec: SweepSpec, waive=(), workers: int = 1) -> list[dict]:
    """Rows in grid order (the second parameter varies fastest)."""
    names = spec.params
    points = spec.points()
    if workers <= 1:
        results = _chunk((base, names, points, waive))
    else:
        size = math.ceil(len(points) / workers)
        chunks = [points[i:i + size] for i in range(0, len(points), size)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = [r for part in ex.map(_chunk, [(base, names, c, waive) for c in chunks])
                       for r in part]
    rows = []
    for pt, res in zip(points, results):
        row = dict(zip(names, map(float, pt)))
        row.update(res)
        rows.append(row)
    return rows


def columns(spec: SweepSpec) -> list[str]:
    return list(spec.params) + ["theta", "status"] + list(spec.outputs) + ["message"]
