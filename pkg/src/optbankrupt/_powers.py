"""Finite sums of power functions, ``sum_i c_i * z**e_i``.

Every closed-form value function in the model is such a sum on each piece
of its domain, so derivatives of any order are exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _falling(e: float, m: int) -> float:
    out = 1.0
    for j in range(m):
        out *= e - j
    return out


@dataclass(frozen=True)
class PowerSum:
    terms: tuple[tuple[float, float], ...]  # (coefficient, exponent)

    @classmethod
    def of(cls, *pairs) -> "PowerSum":
        return cls(tuple((float(c), float(e)) for c, e in pairs if c != 0.0))

    def __call__(self, z, m: int = 0):
        """Evaluate the ``m``-th derivative at ``z`` (scalar or array)."""
        if np.ndim(z) == 0:
            # extended-precision scalars stay extended (used by precision checks)
            z = z if isinstance(z, np.longdouble) else float(z)
            return sum(c * _falling(e, m) * z ** (e - m) for c, e in self.terms)
        z = np.asarray(z, dtype=float)
        out = np.zeros_like(z)
        for c, e in self.terms:
            out += c * _falling(e, m) * np.power(z, e - m)
        return out

    def __add__(self, other: "PowerSum") -> "PowerSum":
        return PowerSum(self.terms + other.terms)

    def __neg__(self) -> "PowerSum":
        return PowerSum(tuple((-c, e) for c, e in self.terms))

    def __sub__(self, other: "PowerSum") -> "PowerSum":
        return self + (-other)

    def rescaled(self, s: float) -> "PowerSum":
        """The function ``z -> self(z / s)``."""
        return PowerSum(tuple((c * s ** (-e), e) for c, e in self.terms))

    def euler(self, mu: float, cancel: float | None = None) -> "PowerSum":
        """The function ``z -> mu * f(z) - z f'(z)``.

        Each term ``c z**e`` maps to ``(mu - e) c z**e``; a term whose exponent
        equals ``cancel`` is dropped exactly, which removes the rounding noise
        of a cancellation that is exact in closed form.
        """
        out = []
        for c, e in self.terms:
            if cancel is not None and e == cancel:
                continue
            out.append(((mu - e) * c, e))
        return PowerSum(tuple(out))
