import math
import logging

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hauptprod import arith
from hauptprod.arith import (
    CACHE_FILENAME,
    CacheFormatError,
    DomainError,
    KloostermanCache,
    KloostermanKey,
)


def brute_divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


@pytest.mark.parametrize("n,mu", [(1, 1), (12, 0), (6, 1), (2, -1), (30, -1)])
def test_mobius_examples(n, mu):
    assert arith.mobius(n) == mu


def test_mobius_divisor_sum():
    for n in range(1, 10_001):
        assert sum(arith.mobius(d) for d in arith.divisors(n)) == (1 if n == 1 else 0)


@pytest.mark.parametrize("n,d", [(1, 1), (12, 6), (7, 2), (97, 2)])
def test_divisor_count_examples(n, d):
    assert arith.divisor_count(n) == d


@pytest.mark.parametrize("n,s", [(1, 1), (6, 12), (2, 3)])
def test_sigma1_examples(n, s):
    assert arith.sigma1(n) == s


@given(st.integers(1, 3000))
def test_divisor_functions_against_enumeration(n):
    ds = brute_divisors(n)
    assert arith.divisors(n) == ds
    assert arith.divisor_count(n) == len(ds)
    assert arith.sigma1(n) == sum(ds)
    assert arith.euler_phi(n) == sum(1 for m in range(1, n + 1) if math.gcd(m, n) == 1)


@pytest.mark.parametrize("N,psi", [(1, 1), (4, 6), (6, 12), (25, 30)])
def test_dedekind_psi_examples(N, psi):
    assert arith.dedekind_psi(N) == psi


def test_dedekind_psi_is_gamma0_index():
    # index of Gamma_0(N): number of points of P^1(Z/N)
    for N in range(1, 60):
        pts = {
            (c % N, d % N)
            for c in range(N)
            for d in range(N)
            if math.gcd(math.gcd(c, d), N) == 1
        }
        assert arith.dedekind_psi(N) * arith.euler_phi(N) == len(pts)


def test_inverse_table_examples():
    assert arith.inverse_table(5) == [1, 3, 2, 4]
    assert arith.inverse_table(4) == [1, None, 3]
    assert arith.inverse_table(2) == [1]


@given(st.integers(2, 2000))
def test_inverse_table_is_inverse(c):
    for m, inv in enumerate(arith.inverse_table(c), start=1):
        if math.gcd(m, c) == 1:
            assert m * inv % c == 1
        else:
            assert inv is None


def test_key_normalization():
    assert KloostermanKey.normalize(7, -3, 5) == KloostermanKey(5, 2, 2)
    assert KloostermanKey.normalize(4, 9, 1) == KloostermanKey(1, 0, 0)
    with pytest.raises(DomainError):
        KloostermanKey.normalize(1, 1, 0)


def test_kloosterman_examples():
    assert arith.kloosterman(1, 1, 2) == pytest.approx(1.0, abs=1e-15)
    assert arith.kloosterman(1, 1, 5) == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-14)
    assert arith.kloosterman(3, 4, 1) == 1.0
    for c in (1, 7, 12, 30):
        assert arith.kloosterman(0, 0, c) == pytest.approx(arith.euler_phi(c), abs=1e-12)


@settings(max_examples=200)
@given(st.integers(-200, 200), st.integers(-200, 200), st.integers(1, 150))
def test_kloosterman_matches_exact_oracle(a, b, c):
    kv = arith.kloosterman_value(a, b, c)
    exact = float(arith.kloosterman_exact(a, b, c))
    assert abs(kv.value) <= kv.term_count + 1e-12
    assert abs(kv.value - exact) <= kv.error_bound


@given(st.integers(-500, 500), st.integers(-500, 500), st.integers(1, 400))
def test_kloosterman_symmetry_and_periodicity(a, b, c):
    k = arith.kloosterman(a, b, c)
    assert arith.kloosterman(b, a, c) == pytest.approx(k, abs=1e-10)
    assert arith.kloosterman(a + c, b, c) == k


def test_kloosterman_imaginary_part_vanishes():
    worst = max(abs(arith.kloosterman_imag(1, 1, c)) / c for c in range(1, 10_001))
    assert worst < 1e-10
    for c in (97, 360, 1001):
        for a, b in ((2, 5), (7, 3), (0, 1)):
            assert abs(arith.kloosterman_imag(a, b, c)) < 1e-10 * c


def test_kloosterman_many_matches_single_and_fills_cache():
    cache = KloostermanCache()
    cs = list(range(1, 80))
    vals = arith.kloosterman_many(-3, 2, cs, cache)
    for c, v in zip(cs, vals):
        assert v == arith.kloosterman(-3, 2, c)
    assert len(cache) == len(cs)
    again = arith.kloosterman_many(-3, 2, cs, cache)
    assert np.array_equal(vals, again)


def test_selberg_examples():
    lhs, rhs = arith.selberg_sides(2, 2, 4)
    assert lhs == pytest.approx(2.0, abs=1e-12) and rhs == pytest.approx(2.0, abs=1e-12)
    for c in (1, 9, 31):
        lhs, rhs = arith.selberg_sides(1, 1, c)
        assert lhs == rhs == arith.kloosterman(1, 1, c)
    lhs, rhs = arith.selberg_sides(3, 5, 7)
    assert lhs == pytest.approx(float(arith.kloosterman_exact(3, 5, 7)), abs=1e-12)
    assert lhs == pytest.approx(rhs, abs=1e-12)


@given(st.integers(1, 60), st.integers(1, 60), st.integers(1, 500))
def test_selberg_property(r, rp, c):
    lhs, rhs = arith.selberg_sides(r, rp, c)
    assert abs(lhs - rhs) < 1e-8 * arith.divisor_count(c) * math.sqrt(c)


def test_weil_margin_examples():
    assert arith.weil_margin(1, 1, 5) == pytest.approx(2 * math.sqrt(5) - 0.3819660112501051, abs=1e-12)
    assert arith.weil_margin(1, 1, 2) == pytest.approx(2 * math.sqrt(2) - 1, abs=1e-12)
    with pytest.raises(DomainError):
        arith.weil_margin(0, 0, 7)


def test_weil_margins_grid_matches_pointwise():
    grid = arith.weil_margins(4, 5, 60)
    for c in (1, 2, 12, 59, 60):
        for a in range(1, 5):
            for b in range(1, 6):
                assert grid[c - 1, a - 1, b - 1] == pytest.approx(arith.weil_margin(a, b, c), abs=1e-12)


def test_dirichlet_partial_examples():
    assert arith.dirichlet_d_partial(2, 1) == (1.0, 1.0)
    with pytest.raises(DomainError):
        arith.dirichlet_d_partial(1.0, 10)


def test_divisor_counts_is_dirichlet_square_of_unit():
    d = arith.divisor_counts(10_000)
    conv = np.zeros(10_001, dtype=np.int64)
    for a in range(1, 10_001):
        conv[a * np.arange(1, 10_000 // a + 1)] += 1
    assert np.array_equal(d[1:], conv[1:])


def test_rigorous_divisor_tail_bound_holds():
    s, X = 2.0, 10_000
    target = float(mpmath.zeta(2)) ** 2
    dsum, sq = arith.dirichlet_d_partial(s, X)
    assert 0 < target - dsum < arith.divisor_tail_bound(s, X)
    assert 0 < target - sq < arith.zeta_square_tail_bound(s, X)


# -- cache -----------------------------------------------------------------


def test_cache_round_trip(tmp_path):
    cache = KloostermanCache()
    for c in range(1, 40):
        cache.put(KloostermanKey.normalize(-2, 3, c), arith.kloosterman(-2, 3, c))
    path = tmp_path / CACHE_FILENAME
    cache.save(path)
    back = KloostermanCache.load(path)
    assert back.values == cache.values
    assert path.read_text().splitlines()[0] == "KLOOSTERMAN-CACHE v1"


def test_cache_tolerates_unsorted_lines():
    text = "KLOOSTERMAN-CACHE v1\n7 1 2 0.5\n\n3 0 0 2\n5 6 1 -1.25\n"
    cache = KloostermanCache.parse(text)
    assert cache.get(KloostermanKey(5, 1, 1)) == -1.25
    assert cache.get(KloostermanKey(3, 0, 0)) == 2.0


@pytest.mark.parametrize("text", ["KLOOSTERMAN-CACHE v2\n", "", "garbage\n1 0 0 1\n"])
def test_cache_rejects_unknown_header(text):
    with pytest.raises(CacheFormatError):
        KloostermanCache.parse(text)


def test_corrupt_cache_falls_back_with_warning(tmp_path, caplog):
    (tmp_path / CACHE_FILENAME).write_text("KLOOSTERMAN-CACHE v9\n1 0 0 1\n")
    with caplog.at_level(logging.WARNING):
        cache = KloostermanCache.open_dir(tmp_path)
    assert len(cache) == 0
    assert "ignoring" in caplog.text
