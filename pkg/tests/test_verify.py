from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

import numpy as np
import pytest

from querysculpt.exact import Sqrt
from querysculpt.measures import rc_at
from querysculpt.tables import certificate_tables
from querysculpt.verify import (EXIT_OK, EXIT_VIOLATION, HINDEX_CHECKS, Check, SuiteReport,
                                hindex_bounds, hindex_properties, list_suites, random_family,
                                random_value_map, verify_suite)


class TestReports:
    def test_check_records_and_merges(self):
        a, b = Check("c"), Check("c")
        a.record(True, 2, "x")
        b.record(False, -1, "y")
        b.record(False, -3, "z")
        a.merge(b)
        assert (a.instances, a.violations, a.worst_slack, a.first_violation) == (3, 2, -3.0, "y")

    def test_exit_codes_and_formats(self):
        rep = SuiteReport("demo", {"k": 1}, [Check("ok", 4, 0), Check("bad", 4, 1, -1.0, "f7")])
        assert rep.exit_code == EXIT_VIOLATION and rep.violations == 1
        assert json.loads(rep.to_json())["violations"] == 1
        rows = list(csv.reader(io.StringIO(rep.to_csv())))
        assert rows[0][0] == "suite" and rows[2][1:4] == ["bad", "4", "1"]
        assert SuiteReport("demo", {}, [Check("ok", 1, 0)]).exit_code == EXIT_OK

    def test_suite_list(self):
        names = set(list_suites())
        assert {"chain-n3", "chain-n4", "hindex-props", "shatter", "probe-n4", "hybrid-n4"} <= names

    def test_unknown_suite(self):
        with pytest.raises(KeyError):
            verify_suite("nope")


class TestHIndexProperties:
    def test_all_hold_on_random_maps(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            g, g_dom = random_value_map(rng, 6)
            props = hindex_properties(g, 6, g_dom)
            assert set(props) == set(HINDEX_CHECKS) and all(props.values())

    def test_irrational_values(self):
        g = [Sqrt(2), Sqrt(3), Sqrt(5), 1, 2]
        assert all(hindex_properties(g, 5).values())

    def test_hindex_bounds_on_named_rows(self):
        T = np.array([[0] + [1] * 15], dtype=np.uint8)
        C = certificate_tables(T, 4)
        (ok1, _), (ok2, _) = hindex_bounds(C[0], C[0], 1, 4)
        assert ok1 and ok2

    def test_random_family_is_seeded(self):
        a, b = random_family(20, 6, seed=1), random_family(20, 6, seed=1)
        assert np.array_equal(a, b) and a.shape == (20, 64)


class TestSuites:
    def test_small_shatter_suite(self):
        rep = verify_suite("shatter", {"sets": 40, "sauer_sets": 20})
        assert rep.exit_code == EXIT_OK
        assert rep.check("witness verified").instances == 40

    def test_jobs_do_not_change_the_report(self):
        one = verify_suite("hindex-random", {"count": 600})
        two = verify_suite("hindex-random", {"count": 600}, jobs=2)
        assert one.to_json() == two.to_json()

    def test_thm61_suite(self):
        rep = verify_suite("thm61-n3")
        assert rep.exit_code == EXIT_OK

    def test_chain_n3_reports_the_failing_strict_link(self):
        rep = verify_suite("chain-n3")
        assert rep.check("RC <= R").violations == 152
        assert rep.check("RC <= 2R (constant-factor form)").violations == 0
        for name in ("RC formulations agree", "R <= R0", "R0 <= D", "R0 >= C"):
            assert rep.check(name).violations == 0
        assert rep.exit_code == EXIT_VIOLATION

    def test_harness_detects_a_faulty_rc_route(self):
        def faulty(f, x):
            v = rc_at(f, x)
            return v + Fraction(1, 7) if x == 5 and v else v

        rep = verify_suite("chain-n3", overrides={"rc_at": faulty})
        assert rep.check("RC formulations agree").violations > 0

    def test_harness_detects_a_faulty_certificate_table(self):
        def faulty(T, n):
            C = certificate_tables(T, n).copy()
            C[:, 0] = 0
            return C

        rep = verify_suite("chain-n4", overrides={"certificate_tables": faulty})
        assert rep.check("pointwise bs <= RC").violations == 0
        assert rep.check("pointwise RC <= C").violations > 0
