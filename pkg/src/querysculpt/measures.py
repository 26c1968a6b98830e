"""Exact query-complexity measures of (partial) Boolean functions.

Everything is phrased through the sensitive blocks of an input ``x``: the masks
``d`` with ``x ^ d`` in the domain and ``f(x ^ d) != f(x)``.  Certificate
complexity is the hitting number of that family, block sensitivity its packing
number and ``RC`` (fractional block sensitivity) the common value of the
fractional packing and hitting LPs.  Only inclusion-minimal blocks matter for
all three, so per-input work is keyed on the minimal antichain, which is also
what the caches below remember.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import exact
from .core import (BooleanFunction, CapError, PartialAssignment, check_cap,
                   fmt_input, iter_bits, mask_to_array, popcount)
from .exact import Log2, Sqrt
from .lp import check_packing_certificate, solve_packing

D_CAP = 14
C_CAP = 20
BS_CAP = 16
RC_OPPOSITE_CAP = 1 << 14
RC_EXACT_LIMIT = 4096


# -- sensitive blocks -------------------------------------------------------

def opposite(f: BooleanFunction, x: int) -> int:
    """Bitmap of domain inputs with value different from ``f(x)``."""
    return f.opposite(x)


def disagreement_masks(f: BooleanFunction, x: int) -> list[int]:
    """The masks ``x ^ y`` over opposite-value inputs ``y``, ascending."""
    return sorted(y ^ x for y in iter_bits(f.opposite(x)))


def _minimal_of_array(sens: np.ndarray, n: int) -> list[int]:
    below = np.zeros(1 << n, dtype=bool)  # some proper subset is sensitive
    idx = np.arange(1 << n)
    for j in range(n):
        hi = idx[(idx >> j) & 1 == 1]
        lo = hi ^ (1 << j)
        below[hi] |= sens[lo] | below[lo]
    return np.flatnonzero(sens & ~below).tolist()


def minimal_blocks_of(masks, n: int) -> tuple[int, ...]:
    """Inclusion-minimal members of a family of nonzero masks, sorted by (size, mask)."""
    masks = list(masks)
    if not masks:
        return ()
    if n <= 12 and len(masks) > 64:
        sens = np.zeros(1 << n, dtype=bool)
        sens[np.asarray(masks, dtype=np.int64)] = True
        mins = _minimal_of_array(sens, n)
    else:
        mins = []
        for d in sorted(masks, key=lambda m: (popcount(m), m)):
            if not any(b & d == b for b in mins):
                mins.append(d)
    return tuple(sorted(mins, key=lambda m: (popcount(m), m)))


def minimal_blocks(f: BooleanFunction, x: int) -> tuple[int, ...]:
    """Minimal sensitive blocks of ``x`` as bit masks."""
    if 6 <= f.n <= 12:
        t = f.table
        sens = t[np.arange(f.size) ^ x] == 1 - t[x]
        if not sens.any():
            return ()
        return tuple(sorted(_minimal_of_array(sens, f.n), key=lambda m: (popcount(m), m)))
    return minimal_blocks_of(disagreement_masks(f, x), f.n)


# -- combinatorial kernels on a block family ---------------------------------

@lru_cache(maxsize=1 << 16)
def hitting_number(blocks: tuple[int, ...]) -> tuple[int, int]:
    """Minimum hitting set of ``blocks``: (size, mask), lowest indices preferred."""
    if not blocks:
        return 0, 0
    best = [len(blocks) + 64, 0]
    order = sorted(blocks, key=lambda m: (popcount(m), m))

    def lower(rest):
        # greedy disjoint subfamily: each needs its own hitting element
        used = cnt = 0
        for b in rest:
            if not b & used:
                used |= b
                cnt += 1
        return cnt

    def go(rest, chosen, k):
        if not rest:
            if k < best[0]:
                best[0], best[1] = k, chosen
            return
        if k + lower(rest) >= best[0]:
            return
        first = rest[0]
        for j in iter_bits(first):
            bit = 1 << j
            go([b for b in rest if not b & bit], chosen | bit, k + 1)

    go(order, 0, 0)
    return best[0], best[1]


@lru_cache(maxsize=1 << 16)
def packing_number(blocks: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Maximum number of pairwise disjoint blocks, with one optimal family."""
    if not blocks:
        return 0, ()
    universe = 0
    for b in blocks:
        universe |= b
    memo: dict[int, tuple[int, tuple[int, ...]]] = {}

    def go(S):
        if S in memo:
            return memo[S]
        inside = [b for b in blocks if b & S == b]
        if not inside:
            memo[S] = (0, ())
            return memo[S]
        low = 0
        for b in inside:
            low |= b
        j = low & -low
        best = go(S & ~j)
        for b in inside:
            if b & j:
                k, fam = go(S & ~b)
                if k + 1 > best[0]:
                    best = (k + 1, (b,) + fam)
        memo[S] = best
        return best

    return go(universe)


@dataclass(frozen=True)
class BlockLP:
    value: Fraction
    weights: tuple[Fraction, ...]   # packing weight per block
    hitting: tuple[Fraction, ...]   # fractional hitting weight per variable
    exact: bool


@lru_cache(maxsize=1 << 16)
def fractional_packing(blocks: tuple[int, ...], n: int) -> BlockLP:
    """Fractional packing = fractional hitting number of a block family."""
    if not blocks:
        return BlockLP(Fraction(0), (), (Fraction(0),) * n, True)
    if len(blocks) > RC_EXACT_LIMIT:
        return _fractional_packing_float(blocks, n)
    A = [[1 if b >> j & 1 else 0 for b in blocks] for j in range(n)]
    rhs = [1] * n
    cost = [1] * len(blocks)
    res = solve_packing(A, rhs, cost)
    check_packing_certificate(A, rhs, cost, res.x, res.y)
    return BlockLP(res.value, tuple(res.x), tuple(res.y), True)


def _fractional_packing_float(blocks, n) -> BlockLP:
    from scipy.optimize import linprog

    A = np.array([[1.0 if b >> j & 1 else 0.0 for b in blocks] for j in range(n)])
    tol = 1e-9
    primal = linprog(-np.ones(len(blocks)), A_ub=A, b_ub=np.ones(n), bounds=(0, None),
                     method="highs", options={"primal_feasibility_tolerance": tol})
    dual = linprog(np.ones(n), A_ub=-A.T, b_ub=-np.ones(len(blocks)), bounds=(0, None),
                   method="highs", options={"primal_feasibility_tolerance": tol})
    if primal.status != 0 or dual.status != 0:
        raise ArithmeticError("floating-point LP fallback failed")
    u, w = primal.x, dual.x
    # mandatory recheck of both certificates and the duality gap
    if (A @ u > 1 + 1e-7).any() or (A.T @ w < 1 - 1e-7).any() or abs(u.sum() - w.sum()) > 1e-7:
        raise ArithmeticError("floating-point LP certificate failed the recheck")
    val = Fraction(float(w.sum())).limit_denominator(1 << 20)
    return BlockLP(val, tuple(Fraction(float(v)) for v in u),
                   tuple(Fraction(float(v)) for v in w), False)


# -- per-input measures -----------------------------------------------------

def certificate_complexity_at(f: BooleanFunction, x: int, *, witness: bool = False):
    """``C_f(x)``; with ``witness=True`` also a minimum certificate."""
    check_cap(f.n, C_CAP, "certificate_complexity_at")
    k, mask = hitting_number(minimal_blocks(f, x))
    if witness:
        return k, PartialAssignment.of(x, mask, f.n)
    return k


def block_sensitivity_at(f: BooleanFunction, x: int, *, witness: bool = False):
    """``bs_f(x)``; with ``witness=True`` also a disjoint family of sensitive blocks."""
    check_cap(f.n, BS_CAP, "block_sensitivity_at")
    k, fam = packing_number(minimal_blocks(f, x))
    return (k, fam) if witness else k


@dataclass(frozen=True)
class HardDistribution:
    """Optimal distribution over opposite-value inputs for the RC min-max."""

    x: int
    support: tuple[tuple[int, Fraction], ...]
    max_disagreement: Fraction
    hitting: tuple[Fraction, ...] = ()
    exact: bool = True

    def disagreement(self, n: int) -> list[Fraction]:
        """``Pr_{y~mu}[y_i != x_i]`` for i = 1..n."""
        out = [Fraction(0)] * n
        for y, p in self.support:
            for j in iter_bits(y ^ self.x):
                out[j] += p
        return out

    def to_dict(self, n: int) -> dict:
        return {
            "x": fmt_input(self.x, n),
            "support": [[fmt_input(y, n), _q(p)] for y, p in self.support],
            "max_disagreement": _q(self.max_disagreement),
            "exact": self.exact,
        }


def fractional_block_sensitivity_at(f: BooleanFunction, x: int):
    """``(RC_f(x), HardDistribution)`` from the exact packing LP over minimal blocks."""
    opp = f.opposite(x)
    if popcount(opp) > RC_OPPOSITE_CAP:
        raise CapError(f"opposite-value set of size {popcount(opp)} exceeds {RC_OPPOSITE_CAP}")
    blocks = minimal_blocks(f, x)
    sol = fractional_packing(blocks, f.n)
    if not blocks:
        return Fraction(0), HardDistribution(x, (), Fraction(0), sol.hitting, True)
    rc = sol.value
    support = tuple((x ^ b, w / rc) for b, w in zip(blocks, sol.weights) if w)
    return rc, HardDistribution(x, support, 1 / rc, sol.hitting, sol.exact)


def rc_at(f: BooleanFunction, x: int) -> Fraction:
    return fractional_packing(minimal_blocks(f, x), f.n).value


def qc_proxy_at(f: BooleanFunction, x: int):
    """``sqrt(RC_f(x))``, a constant-factor stand-in for quantum certificate complexity."""
    return _tidy(Sqrt(rc_at(f, x)))


# -- whole-function measures ---------------------------------------------------

def deterministic_complexity(f: BooleanFunction) -> int:
    """Exact decision-tree depth by memoised minimax over surviving domains."""
    check_cap(f.n, D_CAP, "deterministic_complexity")
    from .core import variable_masks

    vm = variable_masks(f.n)
    vals = f.values
    memo: dict[int, int] = {}

    def go(dom: int, bound: int) -> int:
        v = vals & dom
        if v == 0 or v == dom:
            return 0
        if dom in memo:
            return memo[dom]
        best = bound
        for m in vm:
            one = dom & m
            if one == 0 or one == dom:
                continue
            a = go(dom & ~m, best - 1)
            if 1 + a >= best:
                continue
            b = go(one, best - 1)
            best = min(best, 1 + max(a, b))
            if best == 1:
                break
        if best < bound:
            memo[dom] = best
        return best

    return go(f.domain, f.n + 1)


def balance(f: BooleanFunction):
    """``0`` for constants, else ``1 + log2`` of the smaller value class (exact)."""
    if f.is_constant:
        return 0
    m = min(popcount(f.zeros), popcount(f.ones))
    return _tidy(Log2(2 * m))


def balance_ceil(f: BooleanFunction) -> int:
    if f.is_constant:
        return 0
    m = min(popcount(f.zeros), popcount(f.ones))
    return 1 + (m - 1).bit_length()


def certificate_table(f: BooleanFunction) -> dict[int, int]:
    return {x: certificate_complexity_at(f, x) for x in f.points()}


def bs_table(f: BooleanFunction) -> dict[int, int]:
    return {x: block_sensitivity_at(f, x) for x in f.points()}


def rc_table(f: BooleanFunction) -> dict[int, Fraction]:
    return {x: rc_at(f, x) for x in f.points()}


def certificate_complexity(f: BooleanFunction) -> int:
    return max(certificate_table(f).values())


def block_sensitivity(f: BooleanFunction) -> int:
    return max(bs_table(f).values())


def fractional_block_sensitivity(f: BooleanFunction) -> Fraction:
    return max(rc_table(f).values())


# -- H-index -----------------------------------------------------------------

def _tidy(v):
    """Collapse exact values that are rational to int/Fraction."""
    c = exact.canonical(v)
    if c[0] == "rat":
        q = c[1]
        return int(q) if q.denominator == 1 else q
    return v


def h_index(values) -> object:
    """Minimum ``h >= 0`` with ``|{x : g(x) > h}| <= 2**h``, exactly.

    ``values`` lists ``g`` over the inputs that count (the domain).  On each
    interval between consecutive levels the count is constant, so the answer is
    the least ``max(s, log2 #{g > s})`` over starts ``s`` in ``{0} U levels``.
    """
    vals = list(values)
    if all(isinstance(v, int) for v in vals):
        return _h_index_int(vals)
    if all(isinstance(v, (int, Fraction)) for v in vals):
        return _h_index_rational(vals)
    counts = Counter(vals)
    distinct = list(counts)
    key = _natural_key(distinct)
    if key is None:
        for v in distinct:
            if exact.cmp(v, 0) < 0:
                raise ValueError("H-index needs nonnegative values")
        levels = sorted(distinct, key=exact.sort_key)
    else:
        if any(key(v) < 0 for v in distinct):
            raise ValueError("H-index needs nonnegative values")
        levels = sorted(distinct, key=key)
    starts = [0] + [v for v in levels if exact.cmp(v, 0) > 0]
    c = len(vals)
    best = None
    pos = 0
    for s in starts:
        while pos < len(levels) and exact.cmp(levels[pos], s) <= 0:
            c -= counts[levels[pos]]
            pos += 1
        settled = c == 0 or exact.cmp(s, Log2(c)) >= 0
        cand = s if settled else Log2(c)
        if best is None or exact.cmp(cand, best) < 0:
            best = cand
        if settled:
            break  # later starts only give larger candidates
    return _tidy(best)


def _h_index_rational(vals: list) -> object:
    """Rational values on a common denominator, so the counting runs on integers."""
    den = math.lcm(*{v.denominator for v in vals})
    ks = Counter(v.numerator * (den // v.denominator) for v in vals)
    if min(ks) < 0:
        raise ValueError("H-index needs nonnegative values")
    levels = sorted(ks)
    c = len(vals)
    best = None
    pos = 0
    for k in [0] + [k for k in levels if k > 0]:
        while pos < len(levels) and levels[pos] <= k:
            c -= ks[levels[pos]]
            pos += 1
        s = Fraction(k, den)
        settled = c == 0 or exact.cmp(s, Log2(c)) >= 0
        cand = s if settled else Log2(c)
        if best is None or exact.cmp(cand, best) < 0:
            best = cand
        if settled:
            break
    return _tidy(best)


def _natural_key(vals):
    """A plain sort key when all values share one exactly-orderable form."""
    if all(isinstance(v, (int, Fraction)) for v in vals):
        return lambda v: v
    if all(isinstance(v, Sqrt) for v in vals):
        return lambda v: v.c
    if (all(isinstance(v, exact.LogScaled) for v in vals) and len({v.base for v in vals}) == 1
            and vals[0].base > 1):
        return lambda v: v.r
    return None


def _h_index_int(vals: list[int]):
    if any(v < 0 for v in vals):
        raise ValueError("H-index needs nonnegative values")
    vals = sorted(vals)
    total = len(vals)
    starts = [0] + sorted({v for v in vals if v > 0})
    best = None
    pos = 0
    for s in starts:
        while pos < total and vals[pos] <= s:
            pos += 1
        c = total - pos
        if c <= (1 << s):
            cand = s
        else:
            cand = Log2(c)
        if best is None or exact.cmp(cand, best) < 0:
            best = cand
        if c <= (1 << s):
            break  # later starts only give larger s
    return _tidy(best)


def count_above(values, h) -> int:
    return sum(1 for v in values if exact.cmp(v, h) > 0)


def count_at_least(values, h) -> int:
    return sum(1 for v in values if exact.cmp(v, h) >= 0)


def selector_values(selector, f: BooleanFunction, tables: dict | None = None) -> list:
    """Per-domain-input values of the chosen measure."""
    tables = tables or {}

    def base(name):
        if name not in tables:
            tables[name] = {"C": certificate_table, "bs": bs_table, "RC": rc_table}[name](f)
        return [tables[name][x] for x in f.points()]

    if isinstance(selector, tuple):
        kind, name, factor = selector
        if kind != "scaled":
            raise ValueError(f"unknown selector {selector!r}")
        return [exact.scale(v, factor) for v in base(name)]
    if selector in ("C", "bs", "RC"):
        return base(selector)
    if selector == "sqrtC":
        return [Sqrt(c) for c in base("C")]
    if selector == "Csquared":
        return [c * c for c in base("C")]
    raise ValueError(f"unknown selector {selector!r}")


def h_index_of(selector, f: BooleanFunction, tables: dict | None = None):
    """H-index of a per-input measure: C, bs, RC, sqrtC, Csquared or ("scaled", name, factor)."""
    return h_index(selector_values(selector, f, tables))


def parse_selector(text: str):
    """Parse CLI selectors such as ``C``, ``sqrtC`` or ``scaled:RC:2log``."""
    if text.startswith("scaled:"):
        _, name, factor = text.split(":")
        return ("scaled", name, parse_factor(factor, None))
    return text


def parse_factor(text: str, n: int | None):
    """``p/q`` rational, or ``<r>log`` meaning r*log2(n) (n filled in later)."""
    if text.endswith("log"):
        r = Fraction(text[:-3] or "1")
        return ("log", r) if n is None else exact.LogScaled(r, n)
    return Fraction(text)


# -- report --------------------------------------------------------------------

def _q(v) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def _num(v):
    v = _tidy(v)
    if isinstance(v, int):
        return v
    return exact.to_float(v)


@dataclass
class MeasureReport:
    n: int
    C_table: dict[int, int]
    bs_table: dict[int, int]
    RC_table: dict[int, Fraction]
    D: int | None
    C: int
    bs: int
    RC: Fraction
    Bal: object
    HiC: object
    HiBs: object
    HiRC: object
    HiSqrtC: object
    extra: dict = field(default_factory=dict)

    def check(self) -> None:
        for x in self.C_table:
            assert self.bs_table[x] <= self.RC_table[x] <= self.C_table[x], fmt_input(x, self.n)
        assert self.bs <= self.RC <= self.C
        if self.D is not None:
            assert self.C <= self.D

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "D": self.D,
            "C": self.C,
            "bs": self.bs,
            "RC": _q(self.RC),
            "Bal": _num(self.Bal),
            "Bal_exact": exact.render(self.Bal),
            "HiC": _num(self.HiC),
            "HiC_exact": exact.render(self.HiC),
            "HiBs": _num(self.HiBs),
            "HiBs_exact": exact.render(self.HiBs),
            "HiRC": _num(self.HiRC),
            "HiRC_exact": exact.render(self.HiRC),
            "HiSqrtC": _num(self.HiSqrtC),
            "HiSqrtC_exact": exact.render(self.HiSqrtC),
            "per_input": [
                {"x": fmt_input(x, self.n), "C": self.C_table[x], "bs": self.bs_table[x],
                 "RC": _q(self.RC_table[x])}
                for x in sorted(self.C_table)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def csv_row(self, function_id) -> list[str]:
        return [str(function_id), "" if self.D is None else str(self.D), str(self.C), str(self.bs),
                str(self.RC.numerator), str(self.RC.denominator), _fmt_real(self.Bal),
                _fmt_real(self.HiC), _fmt_real(self.HiBs), _fmt_real(self.HiRC),
                _fmt_real(self.HiSqrtC)]


CSV_HEADER = ["function_id", "D", "C", "bs", "RC_num", "RC_den", "Bal", "HiC", "HiBs",
              "HiRC", "HiSqrtC"]


def _fmt_real(v) -> str:
    v = _tidy(v)
    if isinstance(v, int):
        return str(v)
    return f"{exact.to_float(v):.12g}"


def measure_report(f: BooleanFunction, *, with_d: bool = True) -> MeasureReport:
    Ct, bt, rt = certificate_table(f), bs_table(f), rc_table(f)
    tables = {"C": Ct, "bs": bt, "RC": rt}
    D = deterministic_complexity(f) if with_d and f.n <= D_CAP else None
    return MeasureReport(
        n=f.n, C_table=Ct, bs_table=bt, RC_table=rt, D=D,
        C=max(Ct.values()), bs=max(bt.values()), RC=max(rt.values()),
        Bal=balance(f),
        HiC=h_index_of("C", f, tables), HiBs=h_index_of("bs", f, tables),
        HiRC=h_index_of("RC", f, tables), HiSqrtC=h_index_of("sqrtC", f, tables),
    )


def ceil_log2(k: int) -> int:
    return max(0, (k - 1).bit_length())


def log2n(n: int):
    """Exact ``log2 n``."""
    return _tidy(Log2(n))


