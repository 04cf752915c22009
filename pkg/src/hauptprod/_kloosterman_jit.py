"""Compiled inner loops for Kloosterman sums.

Every sum runs over ascending m with Neumaier compensation, so a value never
depends on how a batch was split across threads.
"""

import numpy as np
from numba import config, njit, prange

# the bundled TBB is too old on some hosts; prefer OpenMP, then the builtin pool
config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


@njit(cache=True)
def _modinv(x, c):
    r0, r1 = c, x % c
    s0, s1 = 0, 1
    while r1 != 0:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    return s0 % c


@njit(cache=True)
def unit_mask(c):
    unit = np.ones(c, np.bool_)
    unit[0] = False
    n = c
    p = 2
    while p * p <= n:
        if n % p == 0:
            for k in range(0, c, p):
                unit[k] = False
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        for k in range(0, c, n):
            unit[k] = False
    return unit


@njit(cache=True)
def inverse_table(c):
    """inv[m] = m^-1 mod c for units m, 0 elsewhere (batch inversion, O(c))."""
    inv = np.zeros(c, np.int64)
    if c == 1:
        return inv
    unit = unit_mask(c)
    units = np.empty(c, np.int64)
    k = 0
    for m in range(1, c):
        if unit[m]:
            units[k] = m
            k += 1
    prefix = np.empty(k, np.int64)
    acc = 1
    for i in range(k):
        prefix[i] = acc
        acc = (acc * units[i]) % c
    inv_acc = _modinv(acc, c)
    for i in range(k - 1, -1, -1):
        u = units[i]
        inv[u] = (inv_acc * prefix[i]) % c
        inv_acc = (inv_acc * u) % c
    return inv


@njit(cache=True)
def _trig_table(c, use_sin):
    tab = np.empty(c, np.float64)
    for k in range(c):
        t = 2.0 * np.pi * k / c
        tab[k] = np.sin(t) if use_sin else np.cos(t)
    return tab


@njit(cache=True)
def _accumulate(a, b, c, inv, tab):
    s = 0.0
    comp = 0.0
    n = 0
    for m in range(1, c):
        ms = inv[m]
        if ms == 0:
            continue
        t = tab[(a * m + b * ms) % c]
        tmp = s + t
        if abs(s) >= abs(t):
            comp += (s - tmp) + t
        else:
            comp += (t - tmp) + s
        s = tmp
        n += 1
    return s + comp, n


@njit(cache=True)
def kloosterman_one(a, b, c, use_sin):
    """(sum, term_count) for reduced 0 <= a, b < c and c >= 2."""
    inv = inverse_table(c)
    tab = _trig_table(c, use_sin)
    return _accumulate(a, b, c, inv, tab)


@njit(cache=True, parallel=True)
def kloosterman_batch(a, b, c):
    """Vectorised over aligned arrays of reduced arguments; c == 1 yields 1."""
    n = c.shape[0]
    out = np.empty(n, np.float64)
    cnt = np.empty(n, np.int64)
    for i in prange(n):
        if c[i] == 1:
            out[i] = 1.0
            cnt[i] = 1
        else:
            v, k = kloosterman_one(a[i], b[i], c[i], False)
            out[i] = v
            cnt[i] = k
    return out, cnt


@njit(cache=True, parallel=True)
def kloosterman_grid(amax, bmax, cs):
    """K(a, b; c) for 1 <= a <= amax, 1 <= b <= bmax and every c in cs."""
    out = np.empty((cs.shape[0], amax, bmax), np.float64)
    for i in prange(cs.shape[0]):
        c = cs[i]
        if c == 1:
            out[i, :, :] = 1.0
            continue
        inv = inverse_table(c)
        tab = _trig_table(c, False)
        for a in range(1, amax + 1):
            for b in range(1, bmax + 1):
                v, _ = _accumulate(a % c, b % c, c, inv, tab)
                out[i, a - 1, b - 1] = v
    return out
