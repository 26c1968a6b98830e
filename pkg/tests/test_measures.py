from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from querysculpt import exact
from querysculpt.core import BooleanFunction, CapError, named_function, random_function
from querysculpt.exact import Log2, LogScaled, Sqrt
from querysculpt.measures import (CSV_HEADER, balance, balance_ceil, block_sensitivity_at,
                                  certificate_complexity_at, deterministic_complexity,
                                  fractional_block_sensitivity_at, h_index, h_index_of,
                                  measure_report, minimal_blocks, rc_at)
from querysculpt.tables import bs_tables, certificate_tables, rc_tables, value_matrix


def brute_certificate(f, x):
    for k in range(f.n + 1):
        for S in itertools.combinations(range(f.n), k):
            mask = sum(1 << j for j in S)
            if all(f(y) == f(x) for y in f.points() if (y ^ x) & mask == 0):
                return k
    raise AssertionError


def brute_bs(f, x):
    sens = [B for B in range(1, 1 << f.n) if f.in_domain(x ^ B) and f(x ^ B) != f(x)]

    def best(used, start):
        out = 0
        for i in range(start, len(sens)):
            if sens[i] & used == 0:
                out = max(out, 1 + best(used | sens[i], i + 1))
        return out
    return best(0, 0)


def brute_depth(f):
    def go(fixed_mask, fixed_bits):
        pts = [y for y in f.points() if y & fixed_mask == fixed_bits]
        if len({f(y) for y in pts}) <= 1:
            return 0
        return min(1 + max(go(fixed_mask | 1 << j, fixed_bits), go(fixed_mask | 1 << j, fixed_bits | 1 << j))
                   for j in range(f.n) if not fixed_mask >> j & 1)
    return go(0, 0)


@st.composite
def functions(draw, max_n=4, partial=True):
    n = draw(st.integers(1, max_n))
    size = 1 << n
    dom = draw(st.integers(1, (1 << size) - 1)) if partial else (1 << size) - 1
    vals = draw(st.integers(0, (1 << size) - 1)) & dom
    return BooleanFunction(n, dom, vals)


class TestPointwiseMeasures:
    @settings(max_examples=60, deadline=None)
    @given(functions())
    def test_certificate_and_bs_match_definitions(self, f):
        for x in f.points():
            assert certificate_complexity_at(f, x) == brute_certificate(f, x)
            assert block_sensitivity_at(f, x) == brute_bs(f, x)

    @settings(max_examples=60, deadline=None)
    @given(functions())
    def test_rc_sandwich_and_hard_distribution(self, f):
        for x in f.points():
            rc, mu = fractional_block_sensitivity_at(f, x)
            assert block_sensitivity_at(f, x) <= rc <= certificate_complexity_at(f, x)
            if rc:
                assert sum(p for _, p in mu.support) == 1
                assert max(mu.disagreement(f.n)) == 1 / rc == mu.max_disagreement
                assert all(f(y) != f(x) for y, _ in mu.support)

    def test_certificate_witness_is_certificate(self):
        f = named_function("MAJORITY", 5)
        k, p = certificate_complexity_at(f, 0b00111, witness=True)
        assert k == 3 and p.size == 3
        assert all(f(y) == 1 for y in f.points() if y & p.mask == p.bits)

    def test_bs_witness_blocks_disjoint_and_sensitive(self):
        f = named_function("OR", 5)
        k, fam = block_sensitivity_at(f, 0, witness=True)
        assert k == 5 == len(fam)
        assert all(a & b == 0 for a, b in itertools.combinations(fam, 2))

    def test_minimal_blocks_are_minimal(self):
        f = random_function(7, seed=11)
        for x in (0, 5, 77):
            blocks = minimal_blocks(f, x)
            assert all(not (a & b == a and a != b) for a in blocks for b in blocks)

    def test_numpy_block_path_matches_scalar_path(self):
        f = random_function(8, seed=2)
        g = BooleanFunction(8, f.domain, f.values)
        for x in range(0, 256, 17):
            sens = [B for B in range(1, 256) if f(x ^ B) != f(x)]
            minimal = sorted(B for B in sens if not any(A != B and A & B == A for A in sens))
            assert sorted(minimal_blocks(g, x)) == minimal

    @pytest.mark.parametrize("name,n,C,bs,rc", [("OR", 4, 4, 4, 4), ("AND", 3, 3, 3, 3),
                                                ("PARITY", 4, 4, 4, 4), ("MAJORITY", 5, 3, 3, 3)])
    def test_named_values(self, name, n, C, bs, rc):
        rep = measure_report(named_function(name, n))
        assert (rep.C, rep.bs, rep.RC) == (C, bs, rc)
        rep.check()


class TestWholeFunction:
    @settings(max_examples=40, deadline=None)
    @given(functions(max_n=3))
    def test_depth_matches_brute_force(self, f):
        assert deterministic_complexity(f) == brute_depth(f)

    def test_or4_report(self):
        rep = measure_report(named_function("OR", 4))
        assert (rep.D, rep.C, rep.HiC) == (4, 4, 1)
        assert len(CSV_HEADER) == len(rep.csv_row("or4"))

    def test_balance(self):
        f = named_function("OR", 4)
        assert balance(f) == 1 and balance_ceil(f) == 1
        g = named_function("PARITY", 4)
        assert exact.eq(balance(g), Log2(16)) and balance_ceil(g) == 4

    def test_depth_cap(self):
        with pytest.raises(CapError):
            deterministic_complexity(random_function(15, seed=0))


class TestHIndex:
    @given(st.lists(st.integers(0, 12), min_size=1, max_size=40))
    def test_integer_definition(self, vals):
        h = h_index(vals)
        # largest real h with #{v >= h} >= 2^h, attained at an integer or a log of a count
        assert sum(1 for v in vals if exact.cmp(v, h) >= 0) >= 2 ** float(h) - 1e-9
        bumped = float(h) + 1e-6
        assert sum(1 for v in vals if v >= bumped) < 2 ** bumped

    @given(st.lists(st.fractions(0, 10, max_denominator=6), min_size=1, max_size=30))
    def test_rational_path_matches_generic(self, vals):
        wrapped = [Sqrt(v * v) for v in vals]
        assert exact.eq(h_index(vals), h_index(wrapped))

    def test_log_valued_index(self):
        # three values of 5: #{v >= h} = 3 >= 2^h gives h = log2 3
        assert exact.eq(h_index([5, 5, 5]), Log2(3))

    def test_selectors(self):
        f = named_function("PARITY", 3)
        assert exact.eq(h_index_of("C", f), 3)
        assert exact.eq(h_index_of("Csquared", f), 3)
        assert exact.eq(h_index_of(("scaled", "C", LogScaled(1, 2)), f), 3)


class TestTables:
    def test_tables_agree_with_pointwise(self):
        funcs = [random_function(5, seed=s) for s in range(6)] + [named_function("MAJORITY", 5)]
        T = value_matrix([f.values for f in funcs], 5)
        ct, bt = certificate_tables(T, 5), bs_tables(T, 5)
        rt = rc_tables(T, 5)
        for r, f in enumerate(funcs):
            for x in range(32):
                assert ct[r][x] == certificate_complexity_at(f, x)
                assert bt[r][x] == block_sensitivity_at(f, x)
                assert Fraction(rt[r][x]) == rc_at(f, x)
