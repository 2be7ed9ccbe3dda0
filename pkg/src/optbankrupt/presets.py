"""Named parameter sets and the run-configuration loader."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import ConfigError
from .model import ASSUMPTIONS, ModelParams, parse_override


@dataclass(frozen=True)
class Preset:
    name: str
    params: ModelParams
    waive: tuple[str, ...] = ()
    note: str = ""


BASELINE = ModelParams()

PRESETS = {
    "baseline": Preset("baseline", BASELINE, note="Reference inputs."),
    # no labour income: leisure pinned at its endowment, zero wage. Without
    # wages the debt can exceed the income of the floor, so that check is off.
    "full_leisure": Preset(
        "full_leisure", BASELINE.with_overrides({"w": 0.0, "L": 1.0}),
        waive=("debt_floor_condition",),
        note="Full leisure, no labour income."),
    "simulation": Preset("simulation", BASELINE.with_overrides({"x0": 25.0}),
                         note="Baseline started at x0 = 25 so that bankruptcy is not immediate."),
    "low_rate": Preset(
        "low_rate",
        BASELINE.with_overrides({"r": 0.02, "mu": 0.07, "sigma": 0.15, "gamma": 0.1, "alpha": 0.7}),
        note="Market and cost inputs under which larger fixed costs stay admissible."),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}") from None


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI run needs: model inputs plus optional sections."""

    params: ModelParams
    waive: tuple[str, ...] = ()
    sim: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)


_SECTIONS = ("preset", "waive", "sim", "sweep")


def load_config(path: str | Path | None = None, overrides: Iterable[str] = ()) -> RunConfig:
    """Parse a JSON run file.

    Top-level keys are parameter names, plus ``preset`` (start from a named
    preset), ``waive`` (assumption tags to skip), ``sim`` and ``sweep``.
    ``overrides`` are ``name=value`` strings applied last.
    """
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
    base = get_preset(data["preset"]) if "preset" in data else PRESETS["baseline"]
    values = {k: v for k, v in data.items() if k not in _SECTIONS}
    params = base.params.with_overrides(values) if values else base.params
    pairs = dict(parse_override(o) for o in overrides)
    if pairs:
        params = params.with_overrides(pairs)
    waive = tuple(data.get("waive", base.waive))
    unknown = [t for t in waive if t not in ASSUMPTIONS]
    if unknown:
        raise ConfigError(f"unknown assumption tags in waive: {unknown}")
    for key in ("sim", "sweep"):
        if not isinstance(data.get(key, {}), dict):
            raise ConfigError(f"section {key!r} must be a JSON object")
    return RunConfig(params, waive, dict(data.get("sim", {})), dict(data.get("sweep", {})))
