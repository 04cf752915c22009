"""Multiplicative functions, modular inverses and Kloosterman sums."""

from __future__ import annotations

import logging
import math
import os
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable

import mpmath
import numpy as np

from . import _kloosterman_jit as _jit

log = logging.getLogger(__name__)

EPS = np.finfo(float).eps


class DomainError(ValueError):
    """An argument lies outside the domain of an arithmetic function."""


def _check_positive(n: int, name: str = "n") -> None:
    if n < 1:
        raise DomainError(f"{name} must be a positive integer, got {n}")


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorisation of n as ((p, e), ...) in increasing p."""
    _check_positive(n)
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def divisors(n: int) -> list[int]:
    _check_positive(n)
    ds = [1]
    for p, e in factorize(n):
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)


def mobius(n: int) -> int:
    _check_positive(n)
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def divisor_count(n: int) -> int:
    _check_positive(n)
    return math.prod(e + 1 for _, e in factorize(n))


def sigma1(n: int) -> int:
    _check_positive(n)
    return math.prod((p ** (e + 1) - 1) // (p - 1) for p, e in factorize(n))


def euler_phi(n: int) -> int:
    _check_positive(n)
    return math.prod((p - 1) * p ** (e - 1) for p, e in factorize(n))


def dedekind_psi(N: int) -> Fraction:
    """N * prod_{p | N} (1 + 1/p), the index of Gamma_0(N) in SL_2(Z)."""
    _check_positive(N, "N")
    out = Fraction(N)
    for p, _ in factorize(N):
        out *= 1 + Fraction(1, p)
    return out


def inverse_table(c: int) -> list[int | None]:
    """Inverses m* mod c for m = 1 .. c-1, None where gcd(m, c) > 1."""
    _check_positive(c, "c")
    inv = _jit.inverse_table(c)
    return [int(inv[m]) if inv[m] else None for m in range(1, c)]


# -- Kloosterman sums ------------------------------------------------------


@dataclass(frozen=True, order=True)
class KloostermanKey:
    c: int
    a: int
    b: int

    @classmethod
    def normalize(cls, a: int, b: int, c: int) -> "KloostermanKey":
        _check_positive(c, "c")
        if c == 1:
            return cls(1, 0, 0)
        return cls(c, a % c, b % c)


@dataclass(frozen=True)
class KloostermanValue:
    value: float
    term_count: int

    @property
    def error_bound(self) -> float:
        # per-term rounding model: each cosine and each compensated add
        return self.term_count * EPS * 4 * math.pi


def kloosterman_value(a: int, b: int, c: int) -> KloostermanValue:
    key = KloostermanKey.normalize(a, b, c)
    if key.c == 1:
        # single residue class mod 1
        return KloostermanValue(1.0, 1)
    v, n = _jit.kloosterman_one(key.a, key.b, key.c, False)
    return KloostermanValue(float(v), int(n))


def kloosterman(a: int, b: int, c: int) -> float:
    """K(a, b; c) = sum over units m mod c of cos(2 pi (a m + b m*) / c)."""
    return kloosterman_value(a, b, c).value


def kloosterman_imag(a: int, b: int, c: int) -> float:
    """Imaginary part of the defining exponential sum (vanishes identically)."""
    key = KloostermanKey.normalize(a, b, c)
    if key.c == 1:
        return 0.0
    v, _ = _jit.kloosterman_one(key.a, key.b, key.c, True)
    return float(v)


def kloosterman_exact(a: int, b: int, c: int, dps: int = 40) -> mpmath.mpf:
    """Brute-force reference: exact multiset of angles k/c, evaluated at `dps` digits.

    Independent of the compiled path (inverses via pow, no tables).
    """
    _check_positive(c, "c")
    if c == 1:
        return mpmath.mpf(1)
    counts = Counter(
        (a * m + b * pow(m, -1, c)) % c for m in range(1, c) if math.gcd(m, c) == 1
    )
    with mpmath.workdps(dps):
        tot = mpmath.fsum(n * mpmath.cospi(mpmath.mpf(2 * k) / c) for k, n in sorted(counts.items()))
        return +tot


def kloosterman_many(
    a: int, b: int, cs: Iterable[int], cache: "KloostermanCache | None" = None
) -> np.ndarray:
    """K(a, b; c) for each c in cs; batch is parallel, each sum is serial."""
    cs = [int(c) for c in cs]
    for c in cs:
        _check_positive(c, "c")
    out = np.empty(len(cs))
    todo = []
    for i, c in enumerate(cs):
        key = KloostermanKey.normalize(a, b, c)
        hit = cache.get(key) if cache is not None else None
        if hit is None:
            todo.append((i, key))
        else:
            out[i] = hit
    if todo:
        ks = [k for _, k in todo]
        vals, _ = _jit.kloosterman_batch(
            np.array([k.a for k in ks], np.int64),
            np.array([k.b for k in ks], np.int64),
            np.array([k.c for k in ks], np.int64),
        )
        for (i, key), v in zip(todo, vals):
            out[i] = v
            if cache is not None:
                cache.put(key, float(v))
    return out


def selberg_sides(r: int, rp: int, c: int) -> tuple[float, float]:
    """Both sides of K(r, r'; c) = sum_{m | (r, r', c)} m K(r r'/m^2, 1; c/m)."""
    if r == 0 or rp == 0:
        raise DomainError("r and r' must be nonzero")
    _check_positive(c, "c")
    g = math.gcd(math.gcd(r, rp), c)
    lhs = kloosterman(r, rp, c)
    rhs = math.fsum(m * kloosterman(r * rp // (m * m), 1, c // m) for m in divisors(g))
    return lhs, rhs


def weil_bound(a: int, b: int, c: int) -> float:
    return divisor_count(c) * math.sqrt(math.gcd(math.gcd(a, b), c)) * math.sqrt(c)


def weil_margin(a: int, b: int, c: int) -> float:
    """d(c) sqrt(gcd(a, b, c)) sqrt(c) - |K(a, b; c)|."""
    _check_positive(c, "c")
    if a == 0 and b == 0:
        raise DomainError("weil_margin needs (a, b) != (0, 0)")
    return weil_bound(a, b, c) - abs(kloosterman(a, b, c))


def weil_margins(amax: int, bmax: int, cmax: int) -> np.ndarray:
    """Margins on the grid 1 <= a <= amax, 1 <= b <= bmax, 1 <= c <= cmax.

    Shape (cmax, amax, bmax); index [c-1, a-1, b-1].
    """
    cs = np.arange(1, cmax + 1, dtype=np.int64)
    K = _jit.kloosterman_grid(amax, bmax, cs)
    A = np.arange(1, amax + 1)[:, None]
    B = np.arange(1, bmax + 1)[None, :]
    out = np.empty_like(K)
    for i, c in enumerate(range(1, cmax + 1)):
        g = np.gcd(np.gcd(A, B), c)
        out[i] = divisor_count(c) * np.sqrt(g) * math.sqrt(c) - np.abs(K[i])
    return out


# -- divisor Dirichlet series ----------------------------------------------


def divisor_counts(X: int) -> np.ndarray:
    """d(n) for 0 <= n <= X (entry 0 unused), by sieve."""
    d = np.zeros(X + 1, dtype=np.int64)
    for a in range(1, X + 1):
        d[a::a] += 1
    return d


def dirichlet_d_partial(s: float, X: int) -> tuple[float, float]:
    """(sum_{n<=X} d(n)/n^s, (sum_{n<=X} n^-s)^2)."""
    if s <= 1:
        raise DomainError(f"series diverges for s={s} <= 1")
    _check_positive(X, "X")
    n = np.arange(1, X + 1, dtype=float)
    w = n**-s
    d = divisor_counts(X)[1:]
    return math.fsum(d * w), math.fsum(w) ** 2


def zeta_square_tail_bound(s: float, X: int) -> float:
    """2 zeta(s) X^(1-s)/(s-1): bounds zeta(s)^2 - (sum_{n<=X} n^-s)^2."""
    return 2 * float(mpmath.zeta(s)) * X ** (1 - s) / (s - 1)


def divisor_tail_bound(s: float, X: int) -> float:
    """Upper bound for sum_{n>X} d(n)/n^s.

    Partial summation with sum_{n<=t} d(n) <= t (log t + 1).
    """
    L = math.log(X)
    return s * X ** (1 - s) * ((L + 1) / (s - 1) + 1 / (s - 1) ** 2)


# -- on-disk cache ---------------------------------------------------------

CACHE_HEADER = "KLOOSTERMAN-CACHE v1"
CACHE_FILENAME = "kloosterman.cache"
CACHE_ENV = "HAUPTPROD_CACHE_DIR"


class CacheFormatError(ValueError):
    pass


class KloostermanCache:
    """Text cache: header line, then ``c a b value`` lines (17 significant digits)."""

    def __init__(self, values: dict[KloostermanKey, float] | None = None):
        self.values: dict[KloostermanKey, float] = dict(values or {})
        self.dirty = False

    def get(self, key: KloostermanKey) -> float | None:
        return self.values.get(key)

    def put(self, key: KloostermanKey, value: float) -> None:
        if key not in self.values:
            self.values[key] = value
            self.dirty = True

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def parse(cls, text: str) -> "KloostermanCache":
        lines = text.splitlines()
        if not lines or lines[0].strip() != CACHE_HEADER:
            head = lines[0].strip() if lines else "<empty>"
            raise CacheFormatError(f"unsupported cache header: {head!r}")
        vals = {}
        for ln, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise CacheFormatError(f"line {ln}: expected 'c a b value'")
            c, a, b = (int(x) for x in parts[:3])
            vals[KloostermanKey.normalize(a, b, c)] = float(parts[3])
        return cls(vals)

    def dumps(self) -> str:
        rows = [CACHE_HEADER]
        for k in sorted(self.values):
            rows.append(f"{k.c} {k.a} {k.b} {self.values[k]:.17g}")
        return "\n".join(rows) + "\n"

    @classmethod
    def load(cls, path: str | os.PathLike) -> "KloostermanCache":
        return cls.parse(Path(path).read_text())

    def save(self, path: str | os.PathLike) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(self.dumps())
        tmp.replace(path)
        self.dirty = False

    @classmethod
    def open_dir(cls, directory: str | os.PathLike | None) -> "KloostermanCache | None":
        """Load the cache in `directory`; a missing or corrupt file yields an empty cache."""
        if directory is None:
            return None
        path = Path(directory) / CACHE_FILENAME
        if not path.exists():
            return cls()
        try:
            return cls.load(path)
        except (CacheFormatError, ValueError) as exc:
            log.warning("ignoring unreadable Kloosterman cache %s: %s", path, exc)
            return cls()
