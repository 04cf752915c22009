"""First-order Bessel functions I1 and J1 by their ascending series.

Partial sums are accumulated in mpmath at `SeriesEvalPolicy.dps` decimal
digits, which absorbs the cancellation in J1 for the moderate arguments that
occur in the coefficient sums (x <= 4 pi sqrt(r r')).
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath


@dataclass(frozen=True)
class SeriesEvalPolicy:
    absolute_tolerance: float = 1e-18
    max_terms: int = 400
    dps: int = 32

    def __post_init__(self):
        if not self.absolute_tolerance > 0:
            raise ValueError("absolute_tolerance must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if self.dps < 16:
            raise ValueError("dps below double precision defeats the purpose")


DEFAULT_POLICY = SeriesEvalPolicy()


class SeriesTruncationError(ArithmeticError):
    def __init__(self, partial: float, bound: float, terms: int):
        super().__init__(
            f"series not converged after {terms} terms: partial={partial!r}, "
            f"remainder bound={bound!r}"
        )
        self.partial = partial
        self.bound = bound
        self.terms = terms


@dataclass(frozen=True)
class SeriesResult:
    value: float
    error_bound: float
    terms: int


def _ascending(x: float, sign: int, policy: SeriesEvalPolicy) -> SeriesResult:
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    if x == 0:
        return SeriesResult(0.0, 0.0, 1)
    with mpmath.workdps(policy.dps):
        h = mpmath.mpf(x) / 2
        h2 = h * h
        term = h
        total = term
        tol = mpmath.mpf(policy.absolute_tolerance)
        for k in range(1, policy.max_terms + 1):
            # term_k = term_{k-1} * (x/2)^2 / (k (k+1))
            ratio = h2 / (k * (k + 1))
            term = term * ratio
            if abs(term) < tol and ratio < 0.5:
                if sign > 0:
                    # positive series, later ratios shrink: geometric tail
                    bound = abs(term) / (1 - ratio)
                else:
                    # alternating with decreasing terms
                    bound = abs(term)
                return SeriesResult(float(total), float(bound), k)
            total += term if sign > 0 or k % 2 == 0 else -term
        raise SeriesTruncationError(float(total), float(abs(term)), policy.max_terms)


def bessel_i1_series(x: float, policy: SeriesEvalPolicy = DEFAULT_POLICY) -> SeriesResult:
    return _ascending(x, +1, policy)


def bessel_j1_series(x: float, policy: SeriesEvalPolicy = DEFAULT_POLICY) -> SeriesResult:
    return _ascending(x, -1, policy)


def bessel_i1(x: float, policy: SeriesEvalPolicy = DEFAULT_POLICY) -> float:
    """Modified Bessel I1(x) = sum_k (x/2)^(2k+1) / (k! (k+1)!)."""
    return _ascending(x, +1, policy).value


def bessel_j1(x: float, policy: SeriesEvalPolicy = DEFAULT_POLICY) -> float:
    """J1(x) = sum_k (-1)^k (x/2)^(2k+1) / (k! (k+1)!)."""
    return _ascending(x, -1, policy).value
