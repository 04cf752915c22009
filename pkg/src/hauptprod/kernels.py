"""Fourier data of the weight-2 Eisenstein and Poincare series at the cusp at infinity.

The Eisenstein coefficients have an exact closed form (the reference) and a
literal truncated double sum.  Poincare coefficients are Kloosterman-Bessel
sums over moduli c = 0 mod N, truncated at c_max with a rigorous tail bound.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .arith import (
    DomainError,
    KloostermanCache,
    dedekind_psi,
    divisors,
    factorize,
    kloosterman_many,
    mobius,
    sigma1,
)
from .hauptmodul import hauptmodul_coefficient, recipe
from .qseries import BiSeries
from .special import DEFAULT_POLICY, SeriesEvalPolicy, bessel_i1_series, bessel_j1_series

TWO_PI = 2 * math.pi
FOUR_PI2 = 4 * math.pi**2


# -- Eisenstein series -----------------------------------------------------


@dataclass(frozen=True)
class EisensteinExpansion:
    level: int
    constant_term: Fraction
    nonholo_coefficient: Fraction  # multiplier of 1/(pi Im z)
    coefficients: tuple[Fraction, ...]  # e_{r,N} for r = 1 .. len


def nonholomorphic_coefficient(N: int) -> Fraction:
    return -3 * dedekind_psi(N) / N**2


def eisenstein_exact(N: int, r: int) -> Fraction:
    """e_{r,N} = -24 r sum_{l | r} mu(N_l) / (l N_l^2 prod_{p | N_l} (1 - p^-2)), N_l = N/(N,l)."""
    if N < 1 or r < 1:
        raise DomainError("N and r must be positive")
    total = Fraction(0)
    for l in divisors(r):
        Nl = N // math.gcd(N, l)
        mu = mobius(Nl)
        if mu == 0:
            continue
        euler = Fraction(1)
        for p, _ in factorize(Nl):
            euler *= 1 - Fraction(1, p * p)
        total += Fraction(mu) / (l * Nl * Nl * euler)
    return -24 * r * total


def eisenstein_expansion(N: int, R: int) -> EisensteinExpansion:
    return EisensteinExpansion(
        N, Fraction(1), nonholomorphic_coefficient(N),
        tuple(eisenstein_exact(N, r) for r in range(1, R + 1)),
    )


@dataclass(frozen=True)
class NumericSum:
    value: float
    tail_bound: float
    c_max: int
    elapsed_s: float = field(default=0.0, compare=False)


def eisenstein_numeric(N: int, r: int, c_max: int) -> NumericSum:
    """-4 pi^2 r sum_{N | c <= c_max} c^-2 sum_{l | (c, r)} mu(c/l) l, the literal double sum."""
    if c_max < N:
        raise DomainError(f"c_max={c_max} < N={N}: empty sum")
    t0 = time.perf_counter()
    rdiv = divisors(r)
    terms = []
    for c in range(N, c_max + 1, N):
        inner = sum(mobius(c // l) * l for l in rdiv if c % l == 0)
        if inner:
            terms.append(inner / (c * c))
    value = -FOUR_PI2 * r * math.fsum(terms)
    # |inner| <= sigma1(r); sum_{j > J} 1/(N j)^2 < 1/(N^2 J)
    J = c_max // N
    tail = FOUR_PI2 * r * sigma1(r) / (N * N * J)
    return NumericSum(value, tail, c_max, time.perf_counter() - t0)


# -- Poincare series -------------------------------------------------------


@dataclass(frozen=True)
class PoincareCoefficient:
    level: int
    rprime: int
    r: int
    value: float
    c_max: int
    tail_bound: float
    elapsed_s: float = field(default=0.0, compare=False)

    @property
    def identity_term(self) -> int:
        """Contribution of the identity coset, q^{|r'|}, present only for r' < 0."""
        return 1 if self.rprime < 0 and self.r == -self.rprime else 0

    @property
    def series_coefficient(self) -> float:
        """Full coefficient of q^r in the Poincare series (identity term included)."""
        return self.identity_term + self.value


def poincare_tail_bound(N: int, rprime: int, r: int, c_max: int) -> float:
    """Bound on the omitted terms c > c_max.

    Each term is at most 4 pi^2 r |K| G / c^2 with G = exp(x^2/4) for I1
    (x at c_max) and G = 1 for J1; |K| <= d(c) sqrt(gcd(r, r')) sqrt(c)
    and sum_{c > X} d(c) c^-3/2 <= 3 (log X + 3) / sqrt(X).
    """
    X = c_max
    g = math.gcd(r, abs(rprime))
    x = 4 * math.pi * math.sqrt(r * abs(rprime)) / X
    growth = math.exp(x * x / 4) if rprime > 0 else 1.0
    return FOUR_PI2 * r * math.sqrt(g) * growth * 3 * (math.log(X) + 3) / math.sqrt(X)


def poincare_coeff(
    N: int,
    rprime: int,
    r: int,
    c_max: int,
    policy: SeriesEvalPolicy = DEFAULT_POLICY,
    cache: KloostermanCache | None = None,
) -> PoincareCoefficient:
    """p_{r',N}(r) = -2 pi sqrt(r/|r'|) sum_{N | c <= c_max} K(-r, r'; c)/c B(4 pi sqrt(r |r'|)/c).

    B = I1 for r' > 0 and J1 for r' < 0.
    """
    if rprime == 0:
        raise DomainError("r' must be nonzero")
    if r < 1:
        raise DomainError("r must be positive")
    if c_max < N:
        raise DomainError(f"c_max={c_max} < N={N}: empty sum")
    t0 = time.perf_counter()
    cs = range(N, c_max + 1, N)
    K = kloosterman_many(-r, rprime, cs, cache)
    bessel = bessel_i1_series if rprime > 0 else bessel_j1_series
    arg = 4 * math.pi * math.sqrt(r * abs(rprime))
    terms = [k / c * bessel(arg / c, policy).value for k, c in zip(K, cs) if k != 0.0]
    value = -TWO_PI * math.sqrt(r / abs(rprime)) * math.fsum(terms)
    return PoincareCoefficient(
        N, rprime, r, value, c_max,
        poincare_tail_bound(N, rprime, r, c_max), time.perf_counter() - t0,
    )


def rademacher_prediction(N: int, rprime: int, r: int) -> int:
    """Exact value the Poincare sum converges to for r' > 0.

    Splitting K(-r, r'; c) with the Selberg identity and substituting c = m c'
    leaves level-N/(N, m) sums for the index r r'/m^2, each equal to
    -n a(n) for the corresponding Hauptmodul:
        p_{r',N}(r) = -sum_{m | (r, r')} (r/m) a_{N/(N,m)}(r r'/m^2).
    """
    if rprime < 1:
        raise DomainError("prediction is for r' > 0")
    g = math.gcd(r, rprime)
    return -sum(
        (r // m) * hauptmodul_coefficient(N // math.gcd(N, m), r * rprime // (m * m))
        for m in divisors(g)
    )


def kernel_biseries(
    N: int, A: int, B: int, c_max: int, policy: SeriesEvalPolicy = DEFAULT_POLICY,
    cache: KloostermanCache | None = None,
) -> BiSeries:
    """Holomorphic Fourier data of the two-variable kernel over 0 <= i <= A, 0 <= j <= B.

    Row j = 0 carries the Eisenstein coefficients (float), mixed entries the
    Poincare coefficients p_{j,N}(i).  Terms with q-tilde vanish in genus zero.
    """
    recipe(N)
    if A < 1 or B < 1:
        raise DomainError("box dimensions must be >= 1")
    terms: dict[tuple[int, int], float] = {(0, 0): 1.0}
    for r in range(1, A + 1):
        terms[(r, 0)] = float(eisenstein_exact(N, r))
    for r in range(1, A + 1):
        for rp in range(1, B + 1):
            terms[(r, rp)] = poincare_coeff(N, rp, r, c_max, policy, cache).value
    return BiSeries(terms, (A, B), (0, 0))
