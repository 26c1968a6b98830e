from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from querysculpt import exact
from querysculpt.exact import Log2, LogScaled, Sqrt
from querysculpt.lp import check_packing_certificate, solve_packing

scipy_opt = pytest.importorskip("scipy.optimize")

rationals = st.fractions(min_value=0, max_value=50, max_denominator=20)


class TestExactComparisons:
    @given(rationals, rationals)
    def test_rationals_match_fraction_order(self, a, b):
        assert exact.cmp(a, b) == (a > b) - (a < b)

    @given(st.integers(0, 400), st.integers(0, 400))
    def test_sqrt_order_matches_radicands(self, a, b):
        assert exact.cmp(Sqrt(a), Sqrt(b)) == (a > b) - (a < b)

    def test_perfect_square_roots_are_rational(self):
        assert exact.eq(Sqrt(Fraction(9, 4)), Fraction(3, 2))
        assert exact.canonical(Sqrt(16)) == exact.canonical(4)

    @given(st.integers(1, 10 ** 6), rationals)
    def test_log_against_rational(self, k, q):
        expected = (math.log2(k) > q) - (math.log2(k) < q)
        if abs(math.log2(k) - float(q)) > 1e-9:
            assert exact.cmp(Log2(k), q) == expected

    def test_log_of_power_of_two_is_exact(self):
        assert exact.eq(Log2(8), 3)
        assert exact.eq(LogScaled(Fraction(1, 2), 16), 2)

    def test_max_min_and_square(self):
        assert exact.exact_max(1, Sqrt(2), Fraction(3, 2)) == Fraction(3, 2)
        assert exact.exact_min(1, Sqrt(2)) == 1
        assert exact.eq(exact.square(Sqrt(7)), 7)
        assert exact.floor_sqrt(Fraction(17)) == 4
        assert exact.floor_square(Sqrt(10)) == 10

    def test_negative_radicand_rejected(self):
        with pytest.raises(ValueError):
            Sqrt(-1)


def _lp_instances():
    return st.integers(1, 4).flatmap(lambda m: st.integers(1, 4).flatmap(lambda k: st.tuples(
        st.lists(st.lists(st.integers(0, 3), min_size=k, max_size=k), min_size=m, max_size=m),
        st.lists(st.integers(0, 5), min_size=m, max_size=m),
        st.lists(st.integers(0, 4), min_size=k, max_size=k))))


class TestPackingLP:
    def test_fractional_triangle(self):
        # edges of a triangle as constraints, one variable per vertex: value 3/2
        A = [[1, 1, 0], [0, 1, 1], [1, 0, 1]]
        res = solve_packing(A, [1, 1, 1], [1, 1, 1])
        assert res.value == Fraction(3, 2)
        assert check_packing_certificate(A, [1, 1, 1], [1, 1, 1], res.x, res.y) == Fraction(3, 2)

    def test_rejects_negative_rhs(self):
        with pytest.raises(ValueError):
            solve_packing([[1]], [-1], [1])

    @given(_lp_instances())
    def test_matches_highs_and_duality(self, inst):
        A, b, c = inst
        # keep the LP bounded: every variable with positive cost must be constrained
        for j in range(len(c)):
            if c[j] and all(row[j] == 0 for row in A):
                A[0][j] = 1
        res = solve_packing(A, b, c)
        assert sum(Fraction(ci) * xi for ci, xi in zip(c, res.x)) == res.value
        assert sum(Fraction(bi) * yi for bi, yi in zip(b, res.y)) == res.value
        for row, bi in zip(A, b):
            assert sum(a * xi for a, xi in zip(row, res.x)) <= bi
        ref = scipy_opt.linprog([-v for v in c], A_ub=A, b_ub=b, method="highs")
        assert abs(float(res.value) + ref.fun) < 1e-7
