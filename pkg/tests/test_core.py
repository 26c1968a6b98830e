from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from querysculpt.core import (BooleanFunction, CapError, FormatError, PartialAssignment, Promise,
                              all_total_functions, emit_bf, emit_json, flip_block, fmt_input,
                              iter_bits, named_function, parse_bf, parse_function, parse_json,
                              popcount, random_function, restrict_to)


@st.composite
def partial_functions(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    size = 1 << n
    dom = draw(st.integers(1, (1 << size) - 1))
    vals = draw(st.integers(0, (1 << size) - 1)) & dom
    return BooleanFunction(n, dom, vals)


class TestEncoding:
    def test_lsb_is_first_variable(self):
        assert fmt_input(0b001, 3) == "001"
        f = BooleanFunction.from_callable(3, lambda x: x & 1)
        assert f(0b001) == 1 and f(0b100) == 0

    def test_iter_bits_and_popcount(self):
        assert list(iter_bits(0b10110)) == [1, 2, 4]
        assert popcount(0b10110) == 3

    def test_flip_block(self):
        assert flip_block(0b0000, 0b0101) == 0b0101
        assert flip_block(0b0101, [1, 3]) == 0


class TestFormats:
    def test_bf_round_trip_or4(self):
        f = named_function("OR", 4)
        text = emit_bf(f)
        assert text == "n=4\n0111111111111111\n"
        assert parse_bf(text) == f

    def test_partial_functions_use_star(self):
        f = parse_function("n=2\n10*1\n")
        assert not f.in_domain(2) and f.points() == [0, 1, 3]
        assert emit_bf(f) == "n=2\n10*1\n"

    @pytest.mark.parametrize("text", ["n=2\n1011", "n=2\n101\n", "m=2\n1011\n", "n=2\n10x1\n",
                                      "n=2\n****\n", "n=02\n1011\n"])
    def test_bf_rejects_malformed(self, text):
        with pytest.raises(FormatError):
            parse_bf(text)

    @pytest.mark.parametrize("text", ['{"n": 2}', '[1]', '{"n": true, "values": "1011"}',
                                      '{"n": 2, "values": 1011}', "{not json"])
    def test_json_rejects_malformed(self, text):
        with pytest.raises(FormatError):
            parse_json(text)

    @given(partial_functions())
    def test_round_trips(self, f):
        assert parse_bf(emit_bf(f)) == f
        assert parse_json(emit_json(f)) == f


class TestFunctions:
    @pytest.mark.parametrize("name,n,ones", [("OR", 3, 7), ("AND", 3, 1), ("PARITY", 3, 4),
                                             ("MAJORITY", 3, 4)])
    def test_named_counts(self, name, n, ones):
        assert popcount(named_function(name, n).ones) == ones

    def test_majority_needs_odd_arity(self):
        with pytest.raises(ValueError):
            named_function("MAJORITY", 4)

    def test_enumeration_counts(self):
        assert sum(1 for _ in all_total_functions(2)) == 16
        with pytest.raises(CapError):
            next(all_total_functions(5))

    def test_random_function_seeded(self):
        assert random_function(6, seed=3) == random_function(6, seed=3)
        assert random_function(6, seed=3) != random_function(6, seed=4)

    @given(partial_functions())
    def test_negate_and_opposite(self, f):
        g = f.negate()
        for x in f.points():
            assert g(x) == 1 - f(x)
            assert f.opposite(x) == f.preimage(1 - f(x))

    def test_outside_domain_raises(self):
        f = parse_function("n=2\n10*1\n")
        with pytest.raises((ValueError, KeyError)):
            f(2)


class TestAssignments:
    def test_parse_and_render(self):
        p = PartialAssignment.parse("1*0")
        assert (p.mask, p.bits, p.size, p.indices) == (0b101, 0b100, 2, (1, 3))
        assert str(p) == "1*0"

    def test_subcube(self):
        p = PartialAssignment.parse("*1")
        assert p.subcube() == (1 << 1) | (1 << 3)

    def test_consistency(self):
        a, b = PartialAssignment.parse("1*"), PartialAssignment.parse("*0")
        assert a.consistent_with(b)
        assert not a.consistent_with(PartialAssignment.parse("0*"))

    def test_bits_outside_mask_rejected(self):
        with pytest.raises(ValueError):
            PartialAssignment(2, 0b01, 0b10)

    def test_promise_restriction(self):
        f = named_function("OR", 3)
        P = Promise.from_inputs(3, [0, 1, 6])
        g = restrict_to(f, P.members)
        assert g.points() == [0, 1, 6] and P.size == 3 and 6 in P
