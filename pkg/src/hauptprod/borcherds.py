"""Exact two-variable check of the product expansion of J_N(p) - J_N(q).

    J_N(p) - J_N(q) = (1/p - 1/q) prod_{r, r' > 0} (1 - p^r q^r')^{E_N(r, r')}

Two exponent tables are available:

``replicable`` (default)
    E_N is fixed by requiring the logarithm of the product to match
    sum_{k | (M, M')} a_{N/(N,k)}(M M'/k^2) / k at p^M q^M', i.e. the k-th
    term uses the Hauptmodul of level N/(N, k).  Solving gives
    E_N(r, r') = sum_{t | (r, r')} (1/t) sum_{k | t} mu(k) a_{N/(N, t/k)}(r r'/t^2).
``literal``
    E_N(r, r') = sum_{d | (r, r', N)} a_N(r r'/d^2).  For N = 1 both agree;
    for levels with a proper divisor structure inside the box the literal
    table does not reproduce the left side.

Only factors with r <= A+1 and r' <= B+1 can reach the box: after the
(1/p - 1/q) prefactor a factor (1 - p^r q^r') first contributes at p-degree
r - 1 and q-degree r' - 1.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .arith import divisors, mobius
from .hauptmodul import hauptmodul, hauptmodul_coefficient, recipe
from .qseries import INF, BiSeries

EXPONENT_SOURCES = ("replicable", "literal")


@dataclass(frozen=True)
class ExponentTable:
    level: int
    source: str
    entries: Mapping[tuple[int, int], int]

    def __getitem__(self, key: tuple[int, int]) -> int:
        return self.entries[key]

    def is_symmetric(self) -> bool:
        return all(self.entries.get((b, a), v) == v for (a, b), v in self.entries.items())


def _replicable_exponent(N: int, r: int, rp: int) -> int:
    g = math.gcd(r, rp)
    total = Fraction(0)
    for t in divisors(g):
        n = r * rp // (t * t)
        inner = sum(
            mobius(k) * hauptmodul_coefficient(N // math.gcd(N, t // k), n)
            for k in divisors(t)
        )
        total += Fraction(inner, t)
    if total.denominator != 1:
        raise ArithmeticError(f"non-integral exponent E_{N}({r},{rp}) = {total}")
    return int(total)


def _literal_exponent(N: int, r: int, rp: int) -> int:
    g = math.gcd(math.gcd(r, rp), N)
    return sum(hauptmodul_coefficient(N, r * rp // (d * d)) for d in divisors(g))


def exponent_table(N: int, A: int, B: int, source: str = "replicable") -> ExponentTable:
    """E_N(r, r') for 1 <= r <= A+1, 1 <= r' <= B+1."""
    recipe(N)
    if source not in EXPONENT_SOURCES:
        raise ValueError(f"unknown exponent source {source!r}; choose from {EXPONENT_SOURCES}")
    fn = _replicable_exponent if source == "replicable" else _literal_exponent
    entries = {(r, rp): fn(N, r, rp) for r in range(1, A + 2) for rp in range(1, B + 2)}
    return ExponentTable(N, source, entries)


def _binomial(E: int, k: int) -> int:
    num = 1
    for t in range(k):
        num *= E - t
    return num // math.factorial(k)


def _factor(r: int, rp: int, E: int, box: tuple[int, int]) -> BiSeries:
    """(1 - p^r q^rp)^E over 0 <= i <= box[0], 0 <= j <= box[1] (binomial series)."""
    A, B = box
    terms = {}
    k = 0
    while r * k <= A and rp * k <= B:
        c = _binomial(E, k)
        if c:
            terms[(r * k, rp * k)] = -c if k % 2 else c
        k += 1
    return BiSeries(terms, box, (0, 0))


def prefactor() -> BiSeries:
    return BiSeries({(-1, 0): 1, (0, -1): -1}, (INF, INF), (-1, -1))


def product_rhs(
    N: int, A: int, B: int, exponents: ExponentTable | None = None, threads: int = 1
) -> BiSeries:
    """(1/p - 1/q) prod (1 - p^r q^r')^E over the box -1 <= i <= A, -1 <= j <= B."""
    if exponents is None:
        exponents = exponent_table(N, A, B)
    inner = (A + 1, B + 1)
    keys = [(r, rp) for r in range(1, A + 2) for rp in range(1, B + 2)]
    missing = [k for k in keys if k not in exponents.entries]
    if missing:
        raise ValueError(f"exponent table lacks entries {missing[:3]}...")

    def build(key):
        return _factor(key[0], key[1], exponents[key], inner)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        factors = list(pool.map(build, keys))
    acc = BiSeries({(0, 0): 1}, inner, (0, 0))
    # fold in lexicographic (r, r') order
    for f in factors:
        acc = acc * f
    return (prefactor() * acc).truncate((A, B))


def lhs_difference(N: int, A: int, B: int) -> BiSeries:
    """J_N(p) - J_N(q) over the box."""
    h = hauptmodul(N, max(A, B) + 1)
    p_part = BiSeries.from_p_series(h.truncate(A + 1), q_box=B)
    q_part = BiSeries.from_q_series(h.truncate(B + 1), p_box=A)
    return (p_part - q_part).truncate((A, B))


@dataclass(frozen=True)
class MonomialStatus:
    i: int
    j: int
    lhs: Fraction
    rhs: Fraction

    @property
    def match(self) -> bool:
        return self.lhs == self.rhs


@dataclass(frozen=True)
class VerificationReport:
    level: int
    box: tuple[int, int]
    exponent_source: str
    monomials: tuple[MonomialStatus, ...]
    truncation: dict
    elapsed_ms: float = field(compare=False)

    @property
    def mismatches(self) -> list[MonomialStatus]:
        return [m for m in self.monomials if not m.match]

    @property
    def passed(self) -> bool:
        return not self.mismatches

    @property
    def max_discrepancy(self) -> Fraction:
        return max((abs(m.lhs - m.rhs) for m in self.monomials), default=Fraction(0))

    @property
    def mixed_checked(self) -> int:
        return sum(1 for m in self.monomials if m.i >= 1 and m.j >= 1)

    def to_json(self, timing: bool = True) -> dict:
        def num(x: Fraction):
            return x.numerator if x.denominator == 1 else str(x)

        return {
            "level": self.level,
            "box": list(self.box),
            "pass": self.passed,
            "mismatches": [
                {"i": m.i, "j": m.j, "lhs": num(m.lhs), "rhs": num(m.rhs)} for m in self.mismatches
            ],
            "elapsed_ms": round(self.elapsed_ms, 3) if timing else None,
            "exponent_source": self.exponent_source,
            "max_discrepancy": num(self.max_discrepancy),
            "monomials_checked": len(self.monomials),
            "truncation": self.truncation,
        }


def verify_identity(
    N: int,
    A: int,
    B: int | None = None,
    source: str = "replicable",
    perturb: Mapping[tuple[int, int], int] | None = None,
    threads: int = 1,
) -> VerificationReport:
    """Compare both sides monomial by monomial in exact arithmetic.

    `perturb` adds integers to chosen exponents (mutation testing).
    """
    B = A if B is None else B
    t0 = time.perf_counter()
    table = exponent_table(N, A, B, source)
    if perturb:
        entries = dict(table.entries)
        for key, delta in perturb.items():
            entries[key] = entries[key] + delta
        table = ExponentTable(N, source + "+perturbed", entries)
    rhs = product_rhs(N, A, B, table, threads)
    lhs = lhs_difference(N, A, B)
    monomials = tuple(
        MonomialStatus(i, j, Fraction(lhs[i, j]), Fraction(rhs[i, j]))
        for i in range(-1, A + 1)
        for j in range(-1, B + 1)
    )
    truncation = {
        "factor_bounds": [A + 1, B + 1],
        "hauptmodul_terms": (A + 1) * (B + 1),
    }
    return VerificationReport(
        N, (A, B), table.source, monomials, truncation, (time.perf_counter() - t0) * 1e3
    )
