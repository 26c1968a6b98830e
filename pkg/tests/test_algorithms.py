from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from querysculpt.algorithms import (CertificateProbe, DeterministicEliminator, HybridDecider,
                                    InputOracle, MajorityEliminator, TreeChainEliminator,
                                    certificate_probe_reduce, deterministic_eliminate,
                                    greedy_certificate, halving_ok, hybrid_decision,
                                    hybrid_phase1_ok, majority_eliminate, probe_bounds_ok,
                                    tree_chain_decide)
from querysculpt.core import BooleanFunction, all_total_functions, named_function, random_function
from querysculpt.measures import balance_ceil, block_sensitivity, certificate_table

total_functions = st.integers(2, 5).flatmap(
    lambda n: st.integers(1, (1 << (1 << n)) - 2).map(lambda v: BooleanFunction.total(n, v)))


class TestOracleAndTranscript:
    def test_repeat_queries_are_free(self):
        orc = InputOracle(0b101, 3)
        assert orc.query(0) == 1 and orc.query(0) == 1 and orc.query(1) == 0
        assert orc.t.total == 2 and orc.t.queries == [(1, 1), (2, 0)]
        assert orc.t.replay_ok(0b101)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            InputOracle(0, 3).query(3)

    def test_transcript_json(self):
        _, t = majority_eliminate(named_function("OR", 3), 0b010, seed=4)
        d = t.to_dict()
        assert d["total"] == len(d["queries"]) and d["seed"] == 4

    def test_greedy_certificate_certifies(self):
        f = random_function(5, seed=8)
        for x in range(32):
            p = greedy_certificate(f, x)
            assert all(f(y) == f(x) for y in f.points() if y & p.mask == p.bits)


class TestMajorityElimination:
    def test_seeded_runs_are_deterministic(self):
        f = random_function(5, seed=1)
        m = MajorityEliminator(f)
        assert [m.run(x, 3)[1].queries for x in range(32)] == [m.run(x, 3)[1].queries for x in range(32)]

    @settings(max_examples=25, deadline=None)
    @given(total_functions, st.integers(0, 2 ** 32))
    def test_invariants_every_run(self, f, seed):
        m = MajorityEliminator(f)
        cap = balance_ceil(f) + 1
        for x in range(1 << f.n):
            v, t = m.run(x, seed)
            assert t.stats["iterations"] <= cap
            assert halving_ok(t)
            assert t.replay_ok(x)

    def test_success_rate_on_majority5(self):
        f = named_function("MAJORITY", 5)
        m = MajorityEliminator(f)
        for x in range(32):
            good = sum(m.run(x, s)[0] == f(x) for s in range(60))
            assert good >= 40


class TestDeterministicElimination:
    @settings(max_examples=40, deadline=None)
    @given(total_functions)
    def test_always_correct(self, f):
        d = DeterministicEliminator(f)
        for x in range(1 << f.n):
            v, t = d.run(x)
            assert v == f(x) and t.total <= f.n

    def test_functional_wrapper(self):
        f = named_function("PARITY", 3)
        assert all(deterministic_eliminate(f, x)[0] == f(x) for x in range(8))


class TestProbeAndHybrid:
    @settings(max_examples=40, deadline=None)
    @given(total_functions)
    def test_probe_bounds(self, f):
        p = CertificateProbe(f)
        for x in range(1 << f.n):
            r = p.run(x)
            assert r.S >> x & 1
            assert probe_bounds_ok(f, r) == (True, True)

    @settings(max_examples=40, deadline=None)
    @given(total_functions)
    def test_hybrid_correct_with_phase1_bound(self, f):
        h = HybridDecider(f)
        bs = block_sensitivity(f)
        for x in range(1 << f.n):
            v, t = h.run(x)
            assert v == f(x)
            assert hybrid_phase1_ok(f, t, h.h, bs)

    def test_shared_certificate_table(self):
        f = random_function(4, seed=5)
        ct = certificate_table(f)
        assert CertificateProbe(f, ct).K == CertificateProbe(f).K
        S, _ = certificate_probe_reduce(f, 3)
        assert S >> 3 & 1
        assert hybrid_decision(f, 3)[0] == f(3)

    def test_partial_functions_rejected(self):
        f = BooleanFunction(2, 0b0111, 0b0010)
        with pytest.raises(ValueError):
            HybridDecider(f)


class TestTreeChain:
    @pytest.mark.parametrize("values", list(range(1, 255, 23)))
    def test_decides_every_input(self, values):
        f = BooleanFunction.total(3, values)
        tc = TreeChainEliminator(f)
        for x in range(8):
            v, t = tc.run(x)
            assert v == f(x)
            assert t.total <= 2 * tc.R0 * (balance_ceil(f) + 1)

    def test_constant_rejected(self):
        with pytest.raises(ValueError):
            TreeChainEliminator(BooleanFunction.total(3, 0))

    def test_wrapper(self):
        f = named_function("MAJORITY", 3)
        assert all(tree_chain_decide(f, x)[0] == f(x) for x in range(8))
