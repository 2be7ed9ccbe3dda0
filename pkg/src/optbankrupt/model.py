"""Model parameters, assumption checks and derived constants.

All monetary quantities are in the same (arbitrary) wealth unit and all
rates are per year. The default values of :class:`ModelParams` are the
baseline calibration used throughout the package.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ConfigError, InvalidParams


@dataclass(frozen=True)
class ModelParams:
    """Exogenous constants of the consumption/portfolio/leisure problem.

    Attributes
    ----------
    delta : float
        Consumption weight in the Cobb-Douglas bundle, ``0 < delta < 1``.
    k : float
        Relative risk aversion, ``k > 1``.
    r, mu, sigma : float
        Risk-free rate, risky drift and risky volatility.
    gamma : float
        Subjective discount rate.
    d : float
        Continuous debt repayment rate (removed by bankruptcy).
    w : float
        Wage rate. ``w = 0`` switches labour income off.
    F : float
        Fixed bankruptcy toll.
    eta : float
        Liquidity cushion; pre-bankruptcy wealth must stay above ``F + eta``.
    alpha : float
        Fraction of wealth (net of the toll) kept after bankruptcy.
    L_bar : float
        Time endowment.
    L : float
        Maximum leisure rate, ``0 < L <= L_bar``.
    x0 : float
        Initial wealth.
    """

    delta: float = 0.6
    k: float = 3.0
    r: float = 0.05
    mu: float = 0.1
    sigma: float = 0.2
    gamma: float = 0.3
    d: float = 0.3
    w: float = 1.5
    F: float = 0.96
    eta: float = 0.0001
    alpha: float = 0.9
    L_bar: float = 1.0
    L: float = 0.8
    x0: float = 6.6

    @property
    def theta(self) -> float:
        return (self.mu - self.r) / self.sigma

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> "ModelParams":
        """Build parameters from a mapping, rejecting unknown keys.

        Missing keys take their baseline value.
        """
        names = field_names()
        unknown = sorted(set(data) - set(names))
        if unknown:
            raise ConfigError(f"unknown parameter(s): {', '.join(unknown)}")
        values = {}
        for key, raw in data.items():
            values[key] = _as_float(key, raw)
        return cls(**values)

    def with_overrides(self, overrides: Mapping[str, object]) -> "ModelParams":
        names = field_names()
        unknown = sorted(set(overrides) - set(names))
        if unknown:
            raise ConfigError(f"unknown parameter(s): {', '.join(unknown)}")
        return replace(self, **{k: _as_float(k, v) for k, v in overrides.items()})


def field_names() -> tuple[str, ...]:
    return tuple(f.name for f in fields(ModelParams))


def _as_float(key, raw) -> float:
    if isinstance(raw, bool):
        raise ConfigError(f"parameter {key!r} must be numeric, got {raw!r}")
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {key!r} must be numeric, got {raw!r}") from None


def parse_override(text: str) -> tuple[str, float]:
    """Parse a ``name=value`` override string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form name=value")
    key, _, value = text.partition("=")
    key = key.strip()
    if key not in field_names():
        raise ConfigError(f"unknown parameter: {key}")
    return key, _as_float(key, value.strip())


def load_params(path: str | Path | None = None, overrides: Iterable[str] = ()) -> ModelParams:
    """Read a JSON parameter file (or start from the baseline) and apply overrides."""
    if path is None:
        params = ModelParams()
    else:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        params = ModelParams.from_dict(data)
    pairs = dict(parse_override(o) for o in overrides)
    return params.with_overrides(pairs) if pairs else params


# Tags of every checked assumption, in reporting order.
ASSUMPTIONS = (
    "finite",
    "preference_condition",
    "sigma_positive",
    "theta_positive",
    "rate_positive",
    "gamma_condition",
    "debt_positive",
    "toll_positive",
    "eta_nonnegative",
    "wage_nonnegative",
    "alpha_range",
    "leisure_range",
    "bankruptcy_benefit_condition",
    "debt_floor_condition",
    "initial_wealth_condition",
)


def validate(params: ModelParams) -> list[str]:
    """Return the tags of all violated assumptions (empty when valid)."""
    p = params
    values = [getattr(p, n) for n in field_names()]
    if not all(math.isfinite(v) for v in values):
        return ["finite"]
    out = []
    if not (0.0 < p.delta < 1.0 and p.k > 1.0):
        out.append("preference_condition")
    if not p.sigma > 0.0:
        out.append("sigma_positive")
    theta = p.theta if p.sigma > 0 else float("nan")
    if not theta > 0.0:
        out.append("theta_positive")
    if not p.r > 0.0:
        out.append("rate_positive")
    if not p.gamma > p.r + 0.5 * theta * theta:
        out.append("gamma_condition")
    if not p.d > 0.0:
        out.append("debt_positive")
    if not p.F > 0.0:
        out.append("toll_positive")
    if not p.eta >= 0.0:
        out.append("eta_nonnegative")
    if not p.w >= 0.0:
        out.append("wage_nonnegative")
    if not 0.0 < p.alpha < 1.0:
        out.append("alpha_range")
    if not 0.0 < p.L <= p.L_bar:
        out.append("leisure_range")
    if 0.0 < p.alpha and not (p.r * p.F - p.d + p.w * p.L_bar - p.w * p.L_bar / p.alpha < 0.0):
        out.append("bankruptcy_benefit_condition")
    if p.r > 0.0 and not (p.F + p.eta >= (p.d - p.w * p.L_bar) / p.r):
        out.append("debt_floor_condition")
    if not p.x0 >= p.F + p.eta:
        out.append("initial_wealth_condition")
    return out


@dataclass(frozen=True)
class DerivedConstants:
    """Constants shared by every solver.

    ``beta1`` and ``beta2`` are the exponents of the dual utility below and
    above the leisure kink ``y_tilde``; ``n1 < 0 < 1 < n2`` are the roots of
    the characteristic equation of the dual ODE and ``Gamma1``, ``Gamma2``
    the divisors of its particular solutions. With ``w = 0`` the kink sits at
    infinity and ``A2`` is unused (set to 0).
    """

    params: ModelParams
    theta: float
    beta1: float
    beta2: float
    A1: float
    A2: float
    y_tilde: float
    n1: float
    n2: float
    Gamma1: float
    Gamma2: float
    # argmax maps: c = c_lo*y**(beta1-1) below the kink,
    # c = c_hi*y**(-1/k) and l = l_hi*y**(-1/k) above it
    c_lo: float
    c_hi: float
    l_hi: float

    def gamma_fn(self, beta):
        """Divisor of the particular solution ``z**beta`` of the dual ODE."""
        p = self.params
        h = 0.5 * self.theta**2
        return p.gamma - (p.gamma - p.r) * beta - h * beta * (beta - 1.0)


def characteristic_roots(theta: float, r: float, gamma: float) -> tuple[float, float]:
    """Roots of ``(theta^2/2) n (n-1) + (gamma - r) n - gamma = 0``, ordered."""
    a = 0.5 * theta * theta
    b = gamma - r - a
    c = -gamma
    disc = math.sqrt(b * b - 4.0 * a * c)
    q = -0.5 * (b + math.copysign(disc, b))
    x1, x2 = q / a, c / q
    return (x1, x2) if x1 < x2 else (x2, x1)


def derive(params: ModelParams, waive: Iterable[str] = ()) -> DerivedConstants:
    """Compute the derived constants.

    Parameters
    ----------
    params : ModelParams
    waive : iterable of str
        Assumption tags that may be violated (used by presets that leave the
        model's standing assumptions on purpose, e.g. the no-labour case).

    Raises
    ------
    InvalidParams
        If any non-waived assumption fails.
    """
    bad = [t for t in validate(params) if t not in set(waive)]
    if bad:
        raise InvalidParams(bad)
    p = params
    theta = p.theta
    a = p.delta * (1.0 - p.k)
    beta1 = a / (a - 1.0)
    beta2 = (p.k - 1.0) / p.k
    e_lo = (1.0 - p.k) * (1.0 - p.delta) / (a - 1.0)
    A1 = (1.0 - p.delta + p.delta * p.k) / a * p.L ** (-e_lo)
    if p.w > 0.0:
        ratio = (1.0 - p.delta) / (p.delta * p.w)
        A2 = p.k / a * ratio ** ((1.0 - p.k) * (1.0 - p.delta) / p.k)
        y_tilde = p.L ** (-p.k) * ratio ** (1.0 - a)
        c_hi = ratio ** ((1.0 - p.k) * (1.0 - p.delta) / p.k)
        l_hi = ratio ** ((1.0 - a) / p.k)
    else:
        A2, y_tilde, c_hi, l_hi = 0.0, math.inf, 0.0, 0.0
    n1, n2 = characteristic_roots(theta, p.r, p.gamma)
    dc = DerivedConstants(
        params=p, theta=theta, beta1=beta1, beta2=beta2, A1=A1, A2=A2,
        y_tilde=y_tilde, n1=n1, n2=n2, Gamma1=0.0, Gamma2=0.0,
        c_lo=p.L ** (-e_lo), c_hi=c_hi, l_hi=l_hi,
    )
    return replace(dc, Gamma1=dc.gamma_fn(beta1), Gamma2=dc.gamma_fn(beta2))
