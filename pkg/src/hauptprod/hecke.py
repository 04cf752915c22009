"""Hecke operators T_k(m) acting on q-expansions of level-N forms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .arith import divisors
from .qseries import EtaQuotient, LaurentSeries, PrecisionError, eta_expand


@dataclass(frozen=True)
class ModularFormExpansion:
    weight: int
    level: int
    series: LaurentSeries

    def __post_init__(self):
        if self.series.exact:
            raise ValueError("a modular form expansion must carry a finite precision")

    @property
    def precision(self) -> int:
        return int(self.series.precision)

    def __add__(self, other: "ModularFormExpansion") -> "ModularFormExpansion":
        self._compatible(other)
        return ModularFormExpansion(self.weight, self.level, self.series + other.series)

    def __mul__(self, c) -> "ModularFormExpansion":
        return ModularFormExpansion(self.weight, self.level, self.series * c)

    __rmul__ = __mul__

    def _compatible(self, other):
        if (self.weight, self.level) != (other.weight, other.level):
            raise ValueError("weight and level must agree")


def hecke_apply(
    k: int, m: int, f: ModularFormExpansion, precision: int | None = None
) -> ModularFormExpansion:
    """T_k(m) f with b(n) = sum_{d | (m, n), (d, N) = 1} d^{k-1} a(m n / d^2).

    The result is trusted below floor(precision(f) / m); asking for more is an error.
    """
    if m < 1:
        raise ValueError("m must be positive")
    if k != f.weight:
        raise ValueError(f"operator weight {k} does not match form weight {f.weight}")
    if f.series.valuation < 0:
        raise ValueError("Hecke action is implemented for holomorphic expansions only")
    avail = f.precision // m
    if precision is None:
        precision = avail
    elif precision > avail:
        raise PrecisionError(
            f"T({m}) to precision {precision} needs input precision {m * precision}, "
            f"have {f.precision}"
        )
    N = f.level
    a = f.series
    mdiv = [d for d in divisors(m) if math.gcd(d, N) == 1]
    out = []
    for n in range(precision):
        if n == 0:
            # constant term: sum over all admissible d | m
            out.append(sum((Fraction(d) ** (k - 1) * a[0] for d in mdiv), Fraction(0)))
            continue
        out.append(sum(
            (Fraction(d) ** (k - 1) * a[m * n // (d * d)] for d in mdiv if n % d == 0),
            Fraction(0),
        ))
    return ModularFormExpansion(k, N, LaurentSeries(out, 0, precision))


def eta_square_form(N: int, precision: int) -> ModularFormExpansion:
    """(eta(z) eta(11 z))^2, the normalized weight-2 newform of level 11."""
    if N != 11:
        raise ValueError("only the level-11 fixture is available")
    if precision < 1:
        raise ValueError("precision must be >= 1")
    return ModularFormExpansion(2, 11, eta_expand(EtaQuotient(((1, 2), (11, 2))), precision))
