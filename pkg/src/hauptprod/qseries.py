"""Truncated Laurent series in one and two variables with exact rational coefficients.

A `LaurentSeries` knows the exponent `precision` below which its coefficients
are trusted; ``precision = math.inf`` marks an exact (polynomial) value.  All
operations propagate the smallest precision their inputs justify and refuse to
produce coefficients beyond it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .arith import factorize

INF = math.inf


class PrecisionError(ArithmeticError):
    """A coefficient was requested beyond the trusted precision."""


class NotInvertibleError(ArithmeticError):
    pass


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _common_denominator(cs: Sequence[Fraction]) -> tuple[list[int], int]:
    den = 1
    for c in cs:
        den = math.lcm(den, c.denominator)
    return [c.numerator * (den // c.denominator) for c in cs], den


def _convolve(a: Sequence[int], b: Sequence[int], n: int) -> list[int]:
    """First n terms of the Cauchy product of two integer sequences."""
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            lim = n - i
            for j, y in enumerate(b[:lim]):
                out[i + j] += x * y
    return out


class LaurentSeries:
    """sum_{n >= valuation} c_n q^n, trusted for exponents n < precision."""

    __slots__ = ("valuation", "coeffs", "precision")

    def __init__(self, coeffs: Iterable = (), valuation: int = 0, precision: float = INF):
        cs = [_frac(c) for c in coeffs]
        if precision != INF:
            precision = int(precision)
            del cs[max(0, precision - valuation):]
        lead = 0
        while lead < len(cs) and cs[lead] == 0:
            lead += 1
        end = len(cs)
        while end > lead and cs[end - 1] == 0:
            end -= 1
        cs = cs[lead:end]
        if cs:
            valuation += lead
        else:
            valuation = precision if precision != INF else 0
        self.valuation: int = valuation
        self.coeffs: tuple[Fraction, ...] = tuple(cs)
        self.precision = precision

    # -- construction ------------------------------------------------------

    @classmethod
    def monomial(cls, n: int, c=1, precision: float = INF) -> "LaurentSeries":
        return cls([c], n, precision)

    @classmethod
    def one(cls, precision: float = INF) -> "LaurentSeries":
        return cls([1], 0, precision)

    @classmethod
    def from_dict(cls, terms: Mapping[int, object], precision: float = INF) -> "LaurentSeries":
        if not terms:
            return cls((), 0, precision)
        lo, hi = min(terms), max(terms)
        return cls([terms.get(n, 0) for n in range(lo, hi + 1)], lo, precision)

    # -- access ------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def exact(self) -> bool:
        return self.precision == INF

    @property
    def degree(self) -> int:
        """Largest exponent with a stored nonzero coefficient."""
        return self.valuation + len(self.coeffs) - 1

    def __getitem__(self, n: int) -> Fraction:
        if n >= self.precision:
            raise PrecisionError(f"coefficient q^{n} requested, precision is {self.precision}")
        k = n - self.valuation
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return Fraction(0)

    def coefficients(self, start: int, stop: int) -> list[Fraction]:
        return [self[n] for n in range(start, stop)]

    def items(self):
        for k, c in enumerate(self.coeffs):
            if c:
                yield self.valuation + k, c

    def truncate(self, precision: int) -> "LaurentSeries":
        if precision > self.precision:
            raise PrecisionError(f"cannot raise precision {self.precision} to {precision}")
        return LaurentSeries(self.coeffs, self.valuation, precision)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def _span(self, precision) -> list[Fraction]:
        """Coefficients from the valuation up to (excluding) `precision`."""
        n = int(precision) - self.valuation if precision != INF else len(self.coeffs)
        cs = list(self.coeffs[:max(n, 0)])
        return cs + [Fraction(0)] * (n - len(cs))

    # -- ring operations ---------------------------------------------------

    def __neg__(self):
        return LaurentSeries([-c for c in self.coeffs], self.valuation, self.precision)

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries([other])
        prec = min(self.precision, other.precision)
        terms: dict[int, Fraction] = {}
        for s in (self, other):
            for n, c in s.items():
                if n < prec:
                    terms[n] = terms.get(n, Fraction(0)) + c
        return LaurentSeries.from_dict(terms, prec)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries([other])
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            c = _frac(other)
            return LaurentSeries([c * x for x in self.coeffs], self.valuation, self.precision)
        if self.is_zero() or other.is_zero():
            prec = min(self.precision + other.valuation, other.precision + self.valuation)
            return LaurentSeries((), 0, prec)
        val = self.valuation + other.valuation
        prec = min(self.precision + other.valuation, other.precision + self.valuation)
        n = len(self.coeffs) + len(other.coeffs) - 1
        if prec != INF:
            n = min(n, int(prec) - val)
        a, da = _common_denominator(self.coeffs)
        b, db = _common_denominator(other.coeffs)
        prod = _convolve(a, b, max(n, 0))
        den = da * db
        return LaurentSeries([Fraction(x, den) for x in prod], val, prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, LaurentSeries):
            return self * other.inverse()
        return self * (1 / _frac(other))

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = LaurentSeries.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return (
            self.precision == other.precision
            and self.valuation == other.valuation
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.valuation, self.coeffs, self.precision))

    def agrees_with(self, other: "LaurentSeries") -> bool:
        """Equality on the common trusted range."""
        prec = min(self.precision, other.precision)
        return (self - other).truncate(prec).is_zero() if prec != INF else self == other

    # -- transcendental and structural operations ---------------------------

    def inverse(self, precision: int | None = None) -> "LaurentSeries":
        """1/f; exact inputs need an explicit target `precision`."""
        if self.is_zero():
            raise NotInvertibleError("zero series has no inverse")
        v = self.valuation
        if self.exact:
            if len(self.coeffs) == 1:
                return LaurentSeries([1 / self.coeffs[0]], -v)
            if precision is None:
                raise PrecisionError("inverse of an exact non-monomial needs a target precision")
            n = precision + v
        else:
            n = int(self.precision) - v
            if precision is not None:
                n = min(n, precision + v)
        u = self._span(v + n)
        inv0 = 1 / u[0]
        g = [inv0] + [Fraction(0)] * (n - 1) if n > 0 else []
        for k in range(1, n):
            acc = Fraction(0)
            for i in range(1, k + 1):
                if u[i]:
                    acc += u[i] * g[k - i]
            g[k] = -acc * inv0
        return LaurentSeries(g, -v, n - v)

    def theta(self) -> "LaurentSeries":
        """q d/dq."""
        return LaurentSeries(
            [(self.valuation + k) * c for k, c in enumerate(self.coeffs)],
            self.valuation,
            self.precision,
        )

    def dilate(self, m: int) -> "LaurentSeries":
        """f(q^m)."""
        if m < 1:
            raise ValueError("dilation factor must be positive")
        terms = {m * n: c for n, c in self.items()}
        return LaurentSeries.from_dict(terms, self.precision * m if not self.exact else INF)

    def shift(self, k: int) -> "LaurentSeries":
        """q^k f."""
        return LaurentSeries(self.coeffs, self.valuation + k, self.precision + k)

    def log(self, precision: int | None = None) -> "LaurentSeries":
        """Formal logarithm of f = 1 + O(q)."""
        if self.valuation < 0 or self[0] != 1:
            raise ValueError("log needs a series of the form 1 + O(q)")
        prec = self.precision if precision is None else min(self.precision, precision)
        if prec == INF:
            raise PrecisionError("log of an exact series needs a target precision")
        prec = int(prec)
        ratio = self.theta() * self.truncate(prec).inverse()
        return LaurentSeries(
            [0] + [ratio[n] / n for n in range(1, prec)], 0, prec
        )

    def exp(self, precision: int | None = None) -> "LaurentSeries":
        """Formal exponential of f = O(q)."""
        if not self.is_zero() and self.valuation < 1:
            raise ValueError("exp needs a series with valuation >= 1")
        prec = self.precision if precision is None else min(self.precision, precision)
        if prec == INF:
            raise PrecisionError("exp of an exact series needs a target precision")
        prec = int(prec)
        f = [n * self[n] if n else Fraction(0) for n in range(prec)]
        g = [Fraction(1)] + [Fraction(0)] * (prec - 1)
        for n in range(1, prec):
            g[n] = sum((f[k] * g[n - k] for k in range(1, n + 1) if f[k]), Fraction(0)) / n
        return LaurentSeries(g, 0, prec)

    # -- serialisation -----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "valuation": self.valuation,
            "precision": None if self.exact else int(self.precision),
            "coefficients": [str(c) for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, obj: dict | str) -> "LaurentSeries":
        if isinstance(obj, str):
            obj = json.loads(obj)
        prec = obj.get("precision")
        return cls(
            [Fraction(c) for c in obj["coefficients"]],
            int(obj["valuation"]),
            INF if prec is None else int(prec),
        )

    def __repr__(self):
        shown = ", ".join(f"{n}: {c}" for n, c in list(self.items())[:6])
        more = ", ..." if len(self.coeffs) > 6 else ""
        return f"LaurentSeries({{{shown}{more}}}, precision={self.precision})"


def series_mul(f: LaurentSeries, g: LaurentSeries) -> LaurentSeries:
    return f * g


def series_inverse(f: LaurentSeries, precision: int | None = None) -> LaurentSeries:
    return f.inverse(precision)


def series_log(f: LaurentSeries, precision: int | None = None) -> LaurentSeries:
    return f.log(precision)


def series_exp(f: LaurentSeries, precision: int | None = None) -> LaurentSeries:
    return f.exp(precision)


# -- two variables ---------------------------------------------------------


class BiSeries:
    """sum c_{ij} p^i q^j, trusted for low_i <= i <= box[0] and low_j <= j <= box[1].

    Sparse; entries outside the box are never stored.  Either bound of `box`
    may be ``math.inf`` for an exact value.
    """

    __slots__ = ("terms", "box", "low")

    def __init__(self, terms: Mapping[tuple[int, int], object] | None = None,
                 box: tuple[float, float] = (INF, INF), low: tuple[int, int] = (-1, -1)):
        self.box = box
        self.low = low
        A, B = box
        self.terms: dict[tuple[int, int], object] = {}
        for (i, j), c in (terms or {}).items():
            if i < low[0] or j < low[1]:
                raise ValueError(f"term p^{i} q^{j} below the lower bounds {low}")
            if i <= A and j <= B and c != 0:
                self.terms[(i, j)] = c

    @classmethod
    def from_p_series(cls, f: LaurentSeries, q_box: float = INF) -> "BiSeries":
        """Embed a series in p (no q dependence)."""
        A = f.precision - 1 if not f.exact else INF
        return cls({(n, 0): c for n, c in f.items()}, (A, q_box), (min(f.valuation, 0), 0))

    @classmethod
    def from_q_series(cls, f: LaurentSeries, p_box: float = INF) -> "BiSeries":
        return cls.from_p_series(f, p_box).transpose()

    def __getitem__(self, ij: tuple[int, int]):
        i, j = ij
        if i > self.box[0] or j > self.box[1]:
            raise PrecisionError(f"p^{i} q^{j} is outside the trusted box {self.box}")
        return self.terms.get(ij, 0)

    def items(self):
        return sorted(self.terms.items())

    def truncate(self, box: tuple[float, float]) -> "BiSeries":
        if box[0] > self.box[0] or box[1] > self.box[1]:
            raise PrecisionError(f"cannot enlarge box {self.box} to {box}")
        return BiSeries(self.terms, box, self.low)

    def transpose(self) -> "BiSeries":
        return BiSeries({(j, i): c for (i, j), c in self.terms.items()},
                        (self.box[1], self.box[0]), (self.low[1], self.low[0]))

    def __neg__(self):
        return BiSeries({k: -c for k, c in self.terms.items()}, self.box, self.low)

    def __add__(self, other: "BiSeries") -> "BiSeries":
        box = (min(self.box[0], other.box[0]), min(self.box[1], other.box[1]))
        low = (min(self.low[0], other.low[0]), min(self.low[1], other.low[1]))
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return BiSeries(out, box, low)

    def __sub__(self, other: "BiSeries") -> "BiSeries":
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, BiSeries):
            return BiSeries({k: c * other for k, c in self.terms.items()}, self.box, self.low)
        low = (self.low[0] + other.low[0], self.low[1] + other.low[1])
        box = (
            min(self.box[0] + other.low[0], other.box[0] + self.low[0]),
            min(self.box[1] + other.low[1], other.box[1] + self.low[1]),
        )
        A, B = box
        out: dict[tuple[int, int], object] = {}
        for (i, j), c in self.terms.items():
            for (k, l), d in other.terms.items():
                ii, jj = i + k, j + l
                if ii <= A and jj <= B:
                    out[(ii, jj)] = out.get((ii, jj), 0) + c * d
        return BiSeries(out, box, low)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, BiSeries):
            return NotImplemented
        return self.box == other.box and self.terms == other.terms

    def mixed_terms(self) -> dict[tuple[int, int], object]:
        return {(i, j): c for (i, j), c in self.terms.items() if i >= 1 and j >= 1}

    def __repr__(self):
        return f"BiSeries({len(self.terms)} terms, box={self.box}, low={self.low})"


# -- eta quotients, Delta, E4, j -------------------------------------------


@dataclass(frozen=True)
class EtaQuotient:
    """prod_d eta(d z)^{e_d}; `factors` holds (d, e_d) pairs."""

    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        merged: dict[int, int] = {}
        for d, e in self.factors:
            if d < 1:
                raise ValueError(f"dilation must be positive, got {d}")
            merged[d] = merged.get(d, 0) + e
        object.__setattr__(self, "factors", tuple(sorted((d, e) for d, e in merged.items() if e)))

    @classmethod
    def of(cls, mapping: Mapping[int, int]) -> "EtaQuotient":
        return cls(tuple(mapping.items()))

    @property
    def prefactor_exponent(self) -> Fraction:
        return Fraction(sum(d * e for d, e in self.factors), 24)

    @property
    def weight(self) -> Fraction:
        return Fraction(sum(e for _, e in self.factors), 2)


def _euler_power(d: int, e: int, n: int) -> list[int]:
    """First n coefficients of prod_{k>=1} (1 - q^{dk})^e."""
    f = [0] * n
    if n == 0:
        return f
    f[0] = 1
    k = d
    while k < n:
        if e > 0:
            for _ in range(e):
                for i in range(n - 1, k - 1, -1):
                    f[i] -= f[i - k]
        else:
            for _ in range(-e):
                for i in range(k, n):
                    f[i] += f[i - k]
        k += d
    return f


def eta_expand(eq: EtaQuotient, precision: int) -> LaurentSeries:
    """Exact expansion of an eta quotient, trusted for exponents < precision."""
    v = eq.prefactor_exponent
    if v.denominator != 1:
        raise ValueError(
            f"sum d*e_d = {v * 24} is not divisible by 24; fractional exponents are unsupported"
        )
    v = int(v)
    n = max(precision - v, 0)
    acc = [0] * n
    if n:
        acc[0] = 1
    for d, e in eq.factors:
        acc = _convolve(acc, _euler_power(d, e, n), n)
    return LaurentSeries(acc, v, precision)


def sigma(k: int, n: int) -> int:
    return math.prod((p ** (k * (e + 1)) - 1) // (p**k - 1) for p, e in factorize(n))


def eisenstein_e4(precision: int) -> LaurentSeries:
    return LaurentSeries([1] + [240 * sigma(3, n) for n in range(1, precision)], 0, precision)


def delta(precision: int) -> LaurentSeries:
    return eta_expand(EtaQuotient(((1, 24),)), precision)


def j_function(precision: int) -> LaurentSeries:
    """j = E4^3 / Delta, trusted for exponents < precision."""
    if precision < 1:
        raise ValueError("precision must be >= 1")
    e4 = eisenstein_e4(precision + 1)
    return (e4 * e4 * e4) * delta(precision + 2).inverse()
