"""Acceptance criteria, one test per criterion, each printing a pass/fail line."""

from __future__ import annotations

import math
import random
from fractions import Fraction
from functools import lru_cache

import pytest

from querysculpt import gadgets
from querysculpt.algorithms import MajorityEliminator, halving_ok
from querysculpt.core import named_function, parse_function, random_function
from querysculpt.measures import balance_ceil, block_sensitivity
from querysculpt.sculpt import (SculptRefused, compile_protocol, sculpt_r0_vs_r,
                                sculpt_via_gadget)
from querysculpt.verify import verify_suite

pytestmark = pytest.mark.acceptance


@lru_cache(maxsize=None)
def _suite(name: str, **params):
    return verify_suite(name, params or None)


def _summary(rep, names) -> str:
    return "; ".join(f"{n}: {rep.check(n).violations}/{rep.check(n).instances}" for n in names)


def _all_clean(rep, names) -> bool:
    return all(rep.check(n).violations == 0 and rep.check(n).instances > 0 for n in names)


class TestMeasures:
    def test_measure_chain_all_n4(self, verdict):
        rep = _suite("chain-n4")
        names = ["bs <= RC", "RC <= C", "C <= D", "pointwise bs <= RC", "pointwise RC <= C"]
        ok = _all_clean(rep, names) and rep.check("C <= D").instances == 1 << 16
        verdict("measure chain bs <= RC <= C <= D, all n=4 functions", ok, _summary(rep, names))

    def test_certificate_vs_rc_lemma_all_n4(self, verdict):
        rep = _suite("chain-n4")
        name = [c.name for c in rep.checks if c.name.startswith("lemma: C(x) <=")]
        verdict("C(x) <= RC(x)(1 + log|f^-1(1)|), all n=4 inputs", len(name) == 1
                and _all_clean(rep, name), _summary(rep, name))

    def test_hindex_upper_bound(self, verdict):
        name = ["Hi(C) <= 10 Bal log n"]
        a = _suite("hindex-n4")
        b = _suite("hindex-random", count=10_000)
        ok = _all_clean(a, name) and _all_clean(b, name) and b.check(name[0]).instances == 10_000
        verdict("Hi(C) <= 10 Bal log2 n, all n=4 + 10^4 random n=8", ok,
                f"n4 {_summary(a, name)}; n8 {_summary(b, name)}")

    def test_hindex_lower_bound(self, verdict):
        name = ["Hi(bs) >= min(sqrt(Hi(C)/2), (Hi(C)-1)/(20 log n) - 1)"]
        a = _suite("hindex-n4")
        b = _suite("hindex-random", count=10_000)
        ok = _all_clean(a, name) and _all_clean(b, name)
        verdict("Hi(bs) >= min(sqrt(Hi(C)/2), (Hi(C)-1)/(20 log2 n) - 1), same families", ok,
                f"n4 {_summary(a, name)}; n8 {_summary(b, name)}")

    def test_hindex_six_properties(self, verdict):
        a = _suite("hindex-props", trials=10_000)
        b = _suite("hindex-props-n4")
        names = [c.name for c in a.checks]
        ok = (len(names) == 6 and _all_clean(a, names) and _all_clean(b, names)
              and "Hi(g^2) <= max(Hi, Hi^2)" in names)
        verdict("six H-index properties, 10^4 maps at n=8 + C/bs maps at n=4", ok,
                f"n8 {a.violations} violations, n4 {b.violations} violations over {len(names)} checks")

    def test_shattered_sets(self, verdict):
        rep = _suite("shatter", sets=1000, sauer_sets=500)
        names = ["witness verified", "size >= log|S|/log(n+1)", "Sauer-Shelah count"]
        ok = (_all_clean(rep, names) and rep.check("witness verified").instances == 1000
              and rep.check("Sauer-Shelah count").instances == 500)
        verdict("shattered set witness + size guarantee (10^3 sets), Sauer-Shelah (500 sets)", ok,
                _summary(rep, names))


class TestOracles:
    def test_oracle_chain_all_n3(self, verdict):
        rep = _suite("chain-n3")
        names = ["RC formulations agree", "RC <= R", "R <= R0", "R0 <= D", "R0 >= C"]
        verdict("RC routes agree; RC <= R <= R0 <= D; R0 >= C on all n=3 functions",
                _all_clean(rep, names), _summary(rep, names))

    def test_d_vs_r0_bal_and_tree_chain(self, verdict):
        rep = _suite("thm61-n3")
        names = ["D <= 2 R0 Bal", "tree chain correct", "tree chain queries <= 2 R0 (ceil Bal + 1)"]
        verdict("D <= 2 R0 Bal and tree-chain elimination on all n=3 functions",
                _all_clean(rep, names), _summary(rep, names))


class TestAlgorithms:
    def test_majority_elimination(self, verdict):
        trials = 200
        floor = Fraction(2, 3) - 3 * math.sqrt(2 / 9 / trials)
        funcs = [named_function("MAJORITY", 5)] + [random_function(6, seed=1000 + i) for i in range(50)]
        worst, iter_bad, halving_bad = 1.0, 0, 0
        for f in funcs:
            m = MajorityEliminator(f)
            cap = balance_ceil(f) + 1
            for x in f.points():
                good = 0
                for s in range(trials):
                    v, t = m.run(x, s)
                    good += v == f(x)
                    iter_bad += t.stats["iterations"] > cap
                    halving_bad += not halving_ok(t)
                worst = min(worst, good / trials)
        ok = worst >= floor and iter_bad == 0 and halving_bad == 0
        verdict("majority elimination: success >= 2/3 - 3 sigma, iterations <= ceil(Bal)+1, halving",
                ok, f"worst frequency {worst:.3f} (floor {float(floor):.3f}), "
                    f"iteration violations {iter_bad}, halving violations {halving_bad}")

    def test_certificate_probe_all_n4(self, verdict):
        rep = _suite("probe-n4")
        names = ["probe queries <= Hi(C^2)", "Bal(f|S) <= Hi(C^2) + 1"]
        verdict("certificate probe bounds on every input of every n=4 function",
                _all_clean(rep, names), _summary(rep, names))

    def test_hybrid_decision_all_n4(self, verdict):
        rep = _suite("hybrid-n4")
        names = ["hybrid correct", "phase-1 queries <= 2 bs Hi(sqrt C)^2"]
        verdict("hybrid decision exact with phase-1 bound on every n=4 function",
                _all_clean(rep, names), _summary(rep, names))


SCULPT_TARGETS = [
    (name, n) for n in (7, 8, 9) for name in ("OR", "AND", "PARITY", "MAJORITY")
    if not (name == "MAJORITY" and n % 2 == 0)
]


class TestSculpting:
    def test_r0_vs_r_sculptor(self, verdict):
        failures, checked = [], 0
        for name, n in SCULPT_TARGETS:
            f = named_function(name, n)
            explicit = (name, n) in {("PARITY", 9), ("MAJORITY", 9)}
            if not explicit and block_sensitivity(f) <= 6:
                continue
            checked += 1
            res = sculpt_r0_vs_r(f)
            names = {b.name for b in res.verified_bounds}
            needed = any("distinguisher error" in s for s in names) and any("certificate" in s for s in names)
            if not (res.ok and needed and res.recheck(f)):
                failures.append(f"{name}_{n}")
        verdict("R0-vs-R sculptor: distance structure, distinguisher <= 1/3, C >= bs/6", not failures,
                f"{checked} functions, failures {failures or 'none'}")

    def test_gadget_sculptor(self, verdict):
        f = named_function("PARITY", 12)
        g = parse_function("n=2\n10*1\n", "bf")
        res = sculpt_via_gadget(f, g, Fraction(4))
        identity = res.bound("identity f(y) = g(y|B) violations")
        mass = res.bound("conditioning mass on B")
        try:
            sculpt_via_gadget(named_function("OR", 12), g, Fraction(4))
            refused = False
        except SculptRefused:
            refused = True
        ok = identity.holds and mass.holds and res.ok and refused and res.recheck(f, g)
        verdict("gadget sculptor on PARITY_12 with a 2-bit gadget; OR_12 refused", ok,
                f"|P|={res.promise.size}, identity violations {identity.lhs}, min mass {mass.lhs}, "
                f"OR refused {refused}")


class TestGadgets:
    def test_protocol_compiler_accounting(self, verdict):
        _, inst = gadgets.build_double_equality(8, seed=0)
        phi = inst.extension()
        per_query = math.ceil(math.log2(phi.G)) + 1
        rng = random.Random(2024)
        bad_bits = bad_answers = 0
        for s in range(100):
            a1, a2, b1, b2, _ = gadgets.promise_trial(inst, rng)
            run = compile_protocol(phi, gadgets.sampler_as_algorithm(inst, a1, a2, seed=s),
                                   b1 | (b2 << inst.n))
            direct = gadgets.double_equality_value(inst, a1, a2, b1, b2)
            bad_bits += run.bits_exchanged != per_query * run.queries
            bad_answers += run.answer != ("first", "second")[direct]
        verdict("protocol compiler: bits = (ceil log2 G + 1) x queries, answers match",
                bad_bits == 0 and bad_answers == 0,
                f"G={phi.G}, {per_query} bits/query, accounting mismatches {bad_bits}, "
                f"answer mismatches {bad_answers}")

    def test_double_equality_sampler(self, verdict):
        _, inst = gadgets.build_double_equality(8, seed=0)
        verified = gadgets.min_distance(inst.code) == inst.min_distance
        res = gadgets.run_sampler_trials(inst, 10_000, seed=7)
        ok = verified and res["errors"] == 0 and res["mean_queries"] <= 40
        verdict("double-equality sampler: 0 errors over 10^4 trials, mean queries <= 40", ok,
                f"distance {inst.min_distance}/{inst.length} verified {verified}, errors {res['errors']}, "
                f"mean {float(res['mean_queries']):.3f}")

    def test_vector_in_subspace(self, verdict):
        n, b = 16, 8
        expected_bits = math.ceil(math.log2(n)) * b
        correct, total, min_fid, bits_ok = 0, 0, 1.0, True
        for side in ("in-H", "in-H-perp"):
            for s in range(100):
                inst = gadgets.vis_build_instance(n, b, side, seed=s)
                bob, _ = inst.bob_bits()
                v = gadgets.vis_alice_decide(inst, bob)
                correct += v.verdict == side
                total += 1
                min_fid = min(min_fid, gadgets.fidelity(inst))
                bits_ok &= v.bit_queries == expected_bits
        ok = correct >= 0.95 * total and min_fid >= 0.99 and bits_ok
        verdict("vector-in-subspace at n=16, b=8: >= 95% correct, fidelity >= 0.99, log2(n)*b bits",
                ok, f"{correct}/{total} correct, min fidelity {min_fid:.5f}, bit_queries {expected_bits}")
