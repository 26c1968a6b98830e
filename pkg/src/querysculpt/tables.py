"""Vectorised per-input measure tables for whole families of total functions.

Exhaustive sweeps (every function at n = 4, ten thousand random functions at
n = 8) call the scalar routines in :mod:`measures` far too often, so here the
same quantities are computed for a batch at once with numpy:

* ``C_f(x)`` via monochromatic subcubes: the subcube of ``x`` with free set
  ``M`` is constant iff its two halves along the lowest free variable are.
* ``bs_f(x)`` via a subset DP over variables: ``P[S]`` is the best packing of
  sensitive blocks inside ``S``.
* ``RC_f(x)`` through a key of minimal sensitive blocks (n <= 5) and the exact
  LP of :mod:`measures`, solved once per distinct key.
* ``D`` for every total function at n <= 4 through a table over subfunctions.

The scalar routines remain the reference; tests cross-check both.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .core import CapError
from .measures import fractional_packing

MAX_TABLE_ARITY = 10


def value_matrix(values, n: int) -> np.ndarray:
    """Rows of truth tables (bool, shape (F, 2**n)) from integer value bitmaps."""
    vals = np.asarray(values, dtype=np.uint64 if n <= 6 else object)
    N = 1 << n
    if n <= 6:
        idx = np.arange(N, dtype=np.uint64)
        return ((vals[:, None] >> idx[None, :]) & np.uint64(1)).astype(bool)
    out = np.zeros((len(values), N), dtype=bool)
    for r, v in enumerate(values):
        raw = np.frombuffer(int(v).to_bytes(N // 8, "little"), dtype=np.uint8)
        out[r] = np.unpackbits(raw, bitorder="little").astype(bool)
    return out


def all_value_matrix(n: int) -> np.ndarray:
    """Truth tables of all ``2**(2**n)`` total functions, row ``v`` = bitmap ``v``."""
    if n > 4:
        raise CapError("all_value_matrix: n > 4")
    return value_matrix(np.arange(1 << (1 << n), dtype=np.uint64), n)


def _xor_perm(n: int) -> np.ndarray:
    N = 1 << n
    idx = np.arange(N)
    return idx[None, :] ^ idx[:, None]      # [d, x] -> x ^ d


def certificate_tables(T: np.ndarray, n: int) -> np.ndarray:
    """``C_f(x)`` for every row (function) and column (input)."""
    if n > MAX_TABLE_ARITY:
        raise CapError("certificate_tables: n too large")
    F, N = T.shape
    idx = np.arange(N)
    mono = [None] * N
    mono[0] = np.ones((F, N), dtype=bool)
    best = np.zeros((F, N), dtype=np.int8)   # largest monochromatic free set
    for M in range(1, N):
        j = (M & -M).bit_length() - 1
        P = M ^ (1 << j)
        partner = idx ^ (1 << j)
        m = mono[P] & mono[P][:, partner] & (T == T[:, partner])
        mono[M] = m
        np.maximum(best, np.where(m, np.int8(bin(M).count("1")), np.int8(0)), out=best)
    return (n - best).astype(np.int8)


def sensitivity_stack(T: np.ndarray, n: int) -> np.ndarray:
    """``sens[d, f, x] = T[f, x ^ d] != T[f, x]``."""
    perm = _xor_perm(n)
    return np.stack([T[:, perm[d]] != T for d in range(1 << n)])


def bs_tables(T: np.ndarray, n: int, sens: np.ndarray | None = None) -> np.ndarray:
    """``bs_f(x)`` for every row and column by a subset DP over variables."""
    if n > MAX_TABLE_ARITY:
        raise CapError("bs_tables: n too large")
    if sens is None:
        sens = sensitivity_stack(T, n)
    F, N = T.shape
    P = np.zeros((N, F, N), dtype=np.uint8)
    for S in range(1, N):
        j = S & -S
        cur = P[S ^ j].copy()
        rest = S ^ j
        sub = rest
        while True:
            B = sub | j
            np.maximum(cur, (P[S ^ B] + 1) * sens[B], out=cur)
            if sub == 0:
                break
            sub = (sub - 1) & rest
        P[S] = cur
    return P[N - 1].astype(np.int8)


def minimal_block_keys(T: np.ndarray, n: int, sens: np.ndarray | None = None) -> np.ndarray:
    """Bitmap (over masks d) of minimal sensitive blocks, per function and input."""
    if n > 5:
        raise CapError("minimal_block_keys: n > 5")
    if sens is None:
        sens = sensitivity_stack(T, n)
    N = 1 << n
    below = np.zeros_like(sens)
    for d in range(1, N):
        acc = below[d]
        for j in range(n):
            if d >> j & 1:
                acc |= sens[d ^ (1 << j)] | below[d ^ (1 << j)]
    minimal = sens & ~below
    key = np.zeros(T.shape, dtype=np.int64)
    for d in range(1, N):
        key |= minimal[d].astype(np.int64) << d
    return key


def blocks_of_key(key: int) -> tuple[int, ...]:
    ds = [d for d in range(key.bit_length()) if key >> d & 1]
    return tuple(sorted(ds, key=lambda m: (bin(m).count("1"), m)))


def rc_tables(T: np.ndarray, n: int, sens: np.ndarray | None = None):
    """``RC_f(x)`` as an object array of Fractions, one LP per distinct key."""
    keys = minimal_block_keys(T, n, sens)
    uniq, inv = np.unique(keys, return_inverse=True)
    vals = [fractional_packing(blocks_of_key(int(k)), n).value for k in uniq]
    out = np.empty(len(uniq), dtype=object)
    out[:] = vals
    return out[inv.reshape(keys.shape)]


def d_tables(n: int) -> list[np.ndarray]:
    """``D`` of every total function on k <= n variables, indexed by value bitmap."""
    if n > 4:
        raise CapError("d_tables: n > 4")
    tabs = [np.zeros(2, dtype=np.int8)]
    for k in range(1, n + 1):
        N = 1 << k
        T = all_value_matrix(k)
        idx = np.arange(N)
        best = np.full(T.shape[0], k, dtype=np.int8)
        weights = (1 << np.arange(N // 2, dtype=np.int64))
        for i in range(k):
            lo = idx[(idx >> i) & 1 == 0]
            hi = lo | (1 << i)
            r0 = (T[:, lo].astype(np.int64) * weights).sum(axis=1)
            r1 = (T[:, hi].astype(np.int64) * weights).sum(axis=1)
            prev = tabs[k - 1]
            np.minimum(best, 1 + np.maximum(prev[r0], prev[r1]), out=best)
        const = (T.sum(axis=1) == 0) | (T.sum(axis=1) == N)
        best[const] = 0
        tabs.append(best)
    return tabs


def bal_of_rows(T: np.ndarray) -> np.ndarray:
    """Smaller value-class size per row (0 for constants)."""
    ones = T.sum(axis=1)
    return np.minimum(ones, T.shape[1] - ones)


def rc_max(rc_row) -> Fraction:
    return max(rc_row)
