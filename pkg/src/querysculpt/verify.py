"""Exhaustive and randomised inequality suites with machine-readable reports.

Each suite walks a family of instances in a fixed order, checks a handful of
named inequalities per instance, and records how many instances were checked,
how many violated the inequality, the smallest slack seen and the first
violating instance.  Families are split into contiguous shards that can run in
separate processes; shard reports merge in index order, so the output does not
depend on the number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import exact
from .core import BooleanFunction, CapError
from .measures import (balance, certificate_table,
                       deterministic_complexity, h_index, rc_at)
from .tables import (all_value_matrix, bal_of_rows, bs_tables, certificate_tables, d_tables,
                     rc_tables, sensitivity_stack)

EXIT_OK, EXIT_VIOLATION, EXIT_CAP = 0, 2, 3


@dataclass
class Check:
    name: str
    instances: int = 0
    violations: int = 0
    worst_slack: float | None = None
    first_violation: str | None = None

    def record(self, ok: bool, slack, where) -> None:
        self.instances += 1
        if slack is not None:
            s = float(slack)
            if self.worst_slack is None or s < self.worst_slack:
                self.worst_slack = s
        if not ok:
            self.violations += 1
            if self.first_violation is None:
                self.first_violation = str(where)

    def merge(self, other: "Check") -> None:
        self.instances += other.instances
        self.violations += other.violations
        if other.worst_slack is not None and (self.worst_slack is None
                                              or other.worst_slack < self.worst_slack):
            self.worst_slack = other.worst_slack
        if self.first_violation is None:
            self.first_violation = other.first_violation

    def to_dict(self) -> dict:
        return {"name": self.name, "instances": self.instances, "violations": self.violations,
                "worst_slack": None if self.worst_slack is None else round(self.worst_slack, 12),
                "first_violation": self.first_violation}


@dataclass
class SuiteReport:
    suite: str
    params: dict
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(c.violations for c in self.checks)

    @property
    def exit_code(self) -> int:
        return EXIT_VIOLATION if self.violations else EXIT_OK

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "params": self.params,
                "checks": [c.to_dict() for c in self.checks],
                "violations": self.violations, "notes": self.notes}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "check", "instances", "violations", "worst_slack", "first_violation"])
        for c in self.checks:
            d = c.to_dict()
            w.writerow([self.suite, c.name, c.instances, c.violations,
                        "" if d["worst_slack"] is None else d["worst_slack"],
                        c.first_violation or ""])
        return buf.getvalue()


def _checks(*names) -> dict[str, Check]:
    return {n: Check(n) for n in names}


def _slack(lhs, rhs) -> float:
    return exact.to_float(rhs) - exact.to_float(lhs)


def _real_cmp(a, b) -> int:
    """Compare two mpmath reals, refusing near-ties."""
    d = a - b
    if abs(d) < mpmath.mpf(10) ** -60:
        raise ArithmeticError("comparison too close to call")
    return 1 if d > 0 else -1


def _le_pow2(count: int, h) -> bool:
    """``count <= 2**h``."""
    return count == 0 or exact.cmp(exact.Log2(count), h) <= 0


def _ge_pow2(count: int, h) -> bool:
    """``count >= 2**h``."""
    return count > 0 and exact.cmp(exact.Log2(count), h) >= 0


def _grouped_counts(values, h) -> tuple[int, int]:
    """(#{v > h}, #{v >= h}) with one exact comparison per distinct value."""
    above = at_least = 0
    counts: dict = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    for v, k in counts.items():
        c = exact.cmp(v, h)
        if c > 0:
            above += k
        if c >= 0:
            at_least += k
    return above, at_least


# -- H-index properties -----------------------------------------------------------------------

def hindex_properties(g, n: int, g_dom=None, where="") -> dict[str, bool]:
    """The six properties for one map ``g`` (``g_dom`` is a pointwise larger map)."""
    h = h_index(g)
    above, at_least = _grouped_counts(g, h)
    out = {
        "range [0,n]": exact.cmp(h, 0) >= 0 and exact.cmp(h, n) <= 0,
        "Hi <= max g": exact.cmp(h, exact.exact_max(*set(g))) <= 0,
        "count above Hi <= 2^Hi": _le_pow2(above, h),
        "count at least Hi >= 2^Hi": _ge_pow2(at_least, h),
    }
    if g_dom is not None:
        out["monotone under domination"] = exact.cmp(h, h_index(g_dom)) <= 0
    sq = h_index([v * v if isinstance(v, (int, Fraction)) else exact.square(v) for v in g])
    out["Hi(g^2) <= max(Hi, Hi^2)"] = exact.cmp(sq, h) <= 0 or exact.le_square(sq, h)
    return out


HINDEX_CHECKS = ("range [0,n]", "Hi <= max g", "count above Hi <= 2^Hi", "count at least Hi >= 2^Hi",
                 "monotone under domination", "Hi(g^2) <= max(Hi, Hi^2)")


def random_value_map(rng: np.random.Generator, n: int) -> tuple[list, list]:
    """A random map and a pointwise larger one; integers or small-denominator rationals."""
    N = 1 << n
    kind = rng.integers(3)
    top = int(rng.integers(1, 2 * n + 2))
    skew = rng.random() ** 3
    base = np.where(rng.random(N) < skew, rng.integers(0, top + 1, N), rng.integers(0, 2, N))
    bump = np.where(rng.random(N) < 0.3, rng.integers(0, 3, N), 0)
    if kind == 0:
        g = [int(v) for v in base]
        gd = [int(v + b) for v, b in zip(base, bump)]
    else:
        den = int(rng.integers(2, 7))
        frac = rng.integers(0, den, N)
        g = [Fraction(int(v) * den + int(f), den) for v, f in zip(base, frac)]
        gd = [v + int(b) for v, b in zip(g, bump)]
    return g, gd


def _shard_hindex_random(lo, hi, params):
    n, seed = params["n"], params["seed"]
    ch = _checks(*HINDEX_CHECKS)
    for i in range(lo, hi):
        rng = np.random.default_rng([seed, i])
        g, gd = random_value_map(rng, n)
        for name, ok in hindex_properties(g, n, gd).items():
            ch[name].record(ok, None, f"map {i}")
    return ch


def _shard_hindex_n4(lo, hi, params):
    ch = _checks(*HINDEX_CHECKS)
    T = all_value_matrix(4)[lo:hi]
    C = certificate_tables(T, 4)
    B = bs_tables(T, 4)
    for r in range(hi - lo):
        c = [int(v) for v in C[r]]
        b = [int(v) for v in B[r]]
        for label, g, gd in (("C", c, None), ("bs", b, c)):
            for name, ok in hindex_properties(g, 4, gd).items():
                ch[name].record(ok, None, f"{label} of function {lo + r}")
    return ch


# -- measure chains on the exhaustive n = 4 family -------------------------------------------------

def family_tables(T: np.ndarray, n: int, overrides: dict | None = None) -> dict:
    overrides = overrides or {}
    sens = sensitivity_stack(T, n)
    return {
        "C": overrides.get("certificate_tables", certificate_tables)(T, n),
        "bs": bs_tables(T, n, sens),
        "RC": rc_tables(T, n, sens) if n <= 5 else None,
        "ones": T.sum(axis=1),
        "minority": bal_of_rows(T),
    }


def _bal_of(minority: int):
    return exact.Log2(2 * int(minority)) if minority else 0


CHAIN_CHECKS = ("bs <= RC", "RC <= C", "C <= D", "pointwise bs <= RC", "pointwise RC <= C",
                "lemma: C(x) <= RC(x)(1 + log|f^-1(1)|)")


def _shard_chain_n4(lo, hi, params, overrides=None):
    ch = _checks(*CHAIN_CHECKS)
    T = all_value_matrix(4)[lo:hi]
    tabs = family_tables(T, 4, overrides)
    D = d_tables(4)[4][lo:hi]
    for r in range(hi - lo):
        fid = lo + r
        c, b, rc = tabs["C"][r], tabs["bs"][r], tabs["RC"][r]
        C, BS, RC = int(c.max()), int(b.max()), max(rc)
        ch["bs <= RC"].record(BS <= RC, RC - BS, fid)
        ch["RC <= C"].record(RC <= C, C - RC, fid)
        ch["C <= D"].record(C <= int(D[r]), int(D[r]) - C, fid)
        pb = min(rc[x] - int(b[x]) for x in range(16))
        pc = min(int(c[x]) - rc[x] for x in range(16))
        ch["pointwise bs <= RC"].record(pb >= 0, pb, fid)
        ch["pointwise RC <= C"].record(pc >= 0, pc, fid)
        ones = int(tabs["ones"][r])
        for x in range(16):
            lhs, q = int(c[x]), rc[x]
            if lhs == 0:
                ok, slack = True, None
            elif ones == 0:
                ok, slack = False, None
            else:
                # C/RC - 1 <= log2 |f^-1(1)|
                t = Fraction(lhs) / q - 1
                ok = exact.cmp(t, exact.Log2(ones)) <= 0
                slack = _slack(t, exact.Log2(ones))
            ch["lemma: C(x) <= RC(x)(1 + log|f^-1(1)|)"].record(ok, slack, f"{fid}@{x}")
    return ch


# -- H-index bounds on whole functions ----------------------------------------------------------

HI_CHECKS = ("Hi(C) <= 10 Bal log n", "Hi(bs) >= min(sqrt(Hi(C)/2), (Hi(C)-1)/(20 log n) - 1)")


def hindex_bounds(c_row, bs_row, minority: int, n: int) -> tuple[tuple[bool, float], tuple[bool, float]]:
    hic = h_index([int(v) for v in c_row])
    hib = h_index([int(v) for v in bs_row])
    bal = _bal_of(minority)
    # 10 * Bal * log2 n, exact when log2 n is an integer
    L = exact.canonical(exact.Log2(n))
    if bal == 0:
        rhs = 0
    elif L[0] == "rat":
        rhs = exact.scale(bal, 10 * L[1])
    else:
        rhs = None
    if rhs is not None:
        ok1 = exact.cmp(hic, rhs) <= 0
        s1 = _slack(hic, rhs)
    else:
        with mpmath.workdps(80):
            r = 10 * exact.to_mp(bal) * mpmath.log(n, 2)
            ok1 = _real_cmp(exact.to_mp(hic), r) <= 0
            s1 = float(r - exact.to_mp(hic))
    # Hi(bs) >= sqrt(Hi(C)/2)  <=>  Hi(C)/2 <= Hi(bs)^2
    first = exact.le_square(exact.scale(hic, Fraction(1, 2)), hib)
    with mpmath.workdps(80):
        hc, hb = exact.to_mp(hic), exact.to_mp(hib)
        second_rhs = (hc - 1) / (20 * mpmath.log(n, 2)) - 1
        s2 = float(hb - min(mpmath.sqrt(hc / 2), second_rhs))
        ok2 = first or hb >= second_rhs
    return (ok1, s1), (ok2, s2)


def _shard_hi_n4(lo, hi, params):
    ch = _checks(*HI_CHECKS)
    T = all_value_matrix(4)[lo:hi]
    C, B, m = certificate_tables(T, 4), bs_tables(T, 4), bal_of_rows(T)
    for r in range(hi - lo):
        (a, sa), (b, sb) = hindex_bounds(C[r], B[r], int(m[r]), 4)
        ch[HI_CHECKS[0]].record(a, sa, f"n4 function {lo + r}")
        ch[HI_CHECKS[1]].record(b, sb, f"n4 function {lo + r}")
    return ch


def random_family(count: int, n: int, seed: int, lo: int = 0, hi: int | None = None) -> np.ndarray:
    """Truth tables of seeded random functions with a spread of value densities.

    Row ``i`` depends only on ``(seed, i)``.
    """
    hi = count if hi is None else hi
    N = 1 << n
    rows = np.zeros((hi - lo, N), dtype=bool)
    for i in range(lo, hi):
        rng = np.random.default_rng([seed, i])
        p = [0.5, 0.2, 0.05, 0.01, 0.002][i % 5]
        row = rng.random(N) < p
        if i % 2:
            row = ~row
        rows[i - lo] = row
    return rows


def _shard_hi_random(lo, hi, params):
    n, seed = params["n"], params["seed"]
    ch = _checks(*HI_CHECKS)
    T = random_family(params["count"], n, seed, lo, hi)
    C, B, m = certificate_tables(T, n), bs_tables(T, n), bal_of_rows(T)
    for r in range(hi - lo):
        (a, sa), (b, sb) = hindex_bounds(C[r], B[r], int(m[r]), n)
        ch[HI_CHECKS[0]].record(a, sa, f"random n{n} function {lo + r}")
        ch[HI_CHECKS[1]].record(b, sb, f"random n{n} function {lo + r}")
    return ch


# -- shattering ----------------------------------------------------------------------------

SHATTER_CHECKS = ("witness verified", "size >= log|S|/log(n+1)", "Sauer-Shelah count")


def random_string_set(rng: random.Random, n: int) -> list[int]:
    size = rng.randint(2, 1 << n)
    return sorted(rng.sample(range(1 << n), size))


def _shard_shatter(lo, hi, params):
    from .shattering import find_shattered_set, max_shattered_size, sauer_shelah_bound

    n, seed = params["n"], params["seed"]
    ch = _checks(*SHATTER_CHECKS)
    for i in range(lo, hi):
        rng = random.Random(seed * 1_000_003 + i)
        S = random_string_set(rng, n)
        w = find_shattered_set(S, n)
        ch["witness verified"].record(w.verify(S), None, f"set {i}")
        # |B| >= log|S| / log(n+1)  <=>  (n+1)^|B| >= |S|
        ok = (n + 1) ** w.size >= len(S)
        ch["size >= log|S|/log(n+1)"].record(ok, w.size - math.log(len(S)) / math.log(n + 1), f"set {i}")
        if i < params["sauer_sets"]:
            d = max_shattered_size(S, n)
            bound = sauer_shelah_bound(n, d)
            ch["Sauer-Shelah count"].record(len(S) <= bound, bound - len(S), f"set {i}")
    return ch


# -- oracle chains at n = 3 ------------------------------------------------------------------

CHAIN3_CHECKS = ("RC formulations agree", "RC <= R", "R <= R0", "R0 <= D", "R0 >= C",
                 "RC <= 2R (constant-factor form)")


def _shard_chain_n3(lo, hi, params, overrides=None):
    from .oracles import brute_force_R, brute_force_R0, brute_force_rc

    overrides = overrides or {}
    rc_fn = overrides.get("rc_at", rc_at)
    ch = _checks(*CHAIN3_CHECKS)
    for v in range(lo, hi):
        f = BooleanFunction.total(3, v)
        rcs = []
        agree = True
        for x in range(8):
            a, b = rc_fn(f, x), brute_force_rc(f, x)
            agree &= a == b
            rcs.append(a)
        ch["RC formulations agree"].record(agree, None, v)
        RC = max(rcs)
        R = brute_force_R(f)
        R0 = brute_force_R0(f)
        D = deterministic_complexity(f)
        C = max(certificate_table(f).values())
        ch["RC <= R"].record(RC <= R, R - RC, v)
        ch["R <= R0"].record(R <= R0, R0 - R, v)
        ch["R0 <= D"].record(R0 <= D, D - R0, v)
        ch["R0 >= C"].record(R0 >= C, R0 - C, v)
        ch["RC <= 2R (constant-factor form)"].record(RC <= 2 * R, 2 * R - RC, v)
    return ch


THM61_CHECKS = ("D <= 2 R0 Bal", "tree chain correct", "tree chain queries <= 2 R0 (ceil Bal + 1)")


def _shard_thm61(lo, hi, params):
    from .algorithms import TreeChainEliminator
    from .measures import balance_ceil

    ch = _checks(*THM61_CHECKS)
    for v in range(lo, hi):
        f = BooleanFunction.total(3, v)
        D = deterministic_complexity(f)
        if f.is_constant:
            ch["D <= 2 R0 Bal"].record(D == 0, 0, v)
            R0 = Fraction(0)
        else:
            elim = TreeChainEliminator(f, params.get("mode", "guaranteed"), params.get("seed", 0))
            R0 = elim.R0
            rhs = exact.scale(balance(f), 2 * R0)
            ch["D <= 2 R0 Bal"].record(exact.cmp(D, rhs) <= 0, _slack(D, rhs), v)
        limit = 2 * R0 * (balance_ceil(f) + 1)
        for x in range(8):
            if f.is_constant:
                out, q = f(x), 0
            else:
                out, t = elim.run(x)
                q = t.total
            ch["tree chain correct"].record(out == f(x), None, f"{v}@{x}")
            ch["tree chain queries <= 2 R0 (ceil Bal + 1)"].record(q <= limit, limit - q, f"{v}@{x}")
    return ch


# -- algorithm sweeps at n = 4 ---------------------------------------------------------------

PROBE_CHECKS = ("probe queries <= Hi(C^2)", "Bal(f|S) <= Hi(C^2) + 1")
HYBRID_CHECKS = ("hybrid correct", "phase-1 queries <= 2 bs Hi(sqrt C)^2")


def _shard_probe(lo, hi, params):
    from .algorithms import CertificateProbe, probe_bounds_ok

    ch = _checks(*PROBE_CHECKS)
    stride = params.get("stride", 1)
    T = all_value_matrix(4)
    C = certificate_tables(T[lo:hi], 4)
    for v in range(lo, hi, stride):
        f = BooleanFunction.total(4, v)
        ct = {x: int(C[v - lo][x]) for x in range(16)}
        probe = CertificateProbe(f, ct)
        for x in range(16):
            r = probe.run(x)
            a, b = probe_bounds_ok(f, r)
            ch[PROBE_CHECKS[0]].record(a, None, f"{v}@{x}")
            ch[PROBE_CHECKS[1]].record(b, None, f"{v}@{x}")
    return ch


def _shard_hybrid(lo, hi, params):
    from .algorithms import HybridDecider, hybrid_phase1_ok

    ch = _checks(*HYBRID_CHECKS)
    stride = params.get("stride", 1)
    T = all_value_matrix(4)
    C = certificate_tables(T[lo:hi], 4)
    B = bs_tables(T[lo:hi], 4)
    for v in range(lo, hi, stride):
        f = BooleanFunction.total(4, v)
        ct = {x: int(C[v - lo][x]) for x in range(16)}
        bs = int(B[v - lo].max())
        dec = HybridDecider(f, ct)
        for x in range(16):
            out, t = dec.run(x)
            ch[HYBRID_CHECKS[0]].record(out == f(x), None, f"{v}@{x}")
            ch[HYBRID_CHECKS[1]].record(hybrid_phase1_ok(f, t, dec.h, bs), None, f"{v}@{x}")
    return ch


# -- registry -----------------------------------------------------------------------------

@dataclass(frozen=True)
class Suite:
    size: object          # int or callable(params) -> int
    shard: object
    defaults: dict
    description: str
    shard_len: int = 4096


SUITES = {
    "chain-n3": Suite(256, _shard_chain_n3, {}, "oracle chain RC <= R <= R0 <= D, R0 >= C on all n=3 functions", 32),
    "thm61-n3": Suite(256, _shard_thm61, {"mode": "guaranteed", "seed": 0},
                      "D <= 2 R0 Bal and the half-certifying tree chain on all n=3 functions", 32),
    "chain-n4": Suite(1 << 16, _shard_chain_n4, {}, "bs <= RC <= C <= D and the certificate lemma on all n=4 functions"),
    "hindex-n4": Suite(1 << 16, _shard_hi_n4, {}, "H-index bounds on all n=4 functions"),
    "hindex-random": Suite(lambda p: p["count"], _shard_hi_random, {"n": 8, "count": 10_000, "seed": 0},
                           "H-index bounds on seeded random functions", 1000),
    "hindex-props": Suite(lambda p: p["trials"], _shard_hindex_random, {"n": 8, "trials": 10_000, "seed": 0},
                          "the six H-index properties on seeded random value maps", 1000),
    "hindex-props-n4": Suite(1 << 16, _shard_hindex_n4, {}, "the six H-index properties on C and bs maps at n=4"),
    "shatter": Suite(lambda p: p["sets"], _shard_shatter, {"n": 8, "sets": 1000, "sauer_sets": 500, "seed": 0},
                     "shattered-set search and the Sauer-Shelah count on random string sets", 100),
    "probe-n4": Suite(1 << 16, _shard_probe, {"stride": 1}, "certificate probing on all n=4 functions"),
    "hybrid-n4": Suite(1 << 16, _shard_hybrid, {"stride": 1}, "hybrid decision on all n=4 functions"),
}


def _run_shard(args):
    name, lo, hi, params = args
    return SUITES[name].shard(lo, hi, params)


def verify_suite(name: str, params: dict | None = None, *, jobs: int = 1,
                 overrides: dict | None = None) -> SuiteReport:
    """Run a named suite.  ``overrides`` swaps measure routines (harness self-tests only)."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    suite = SUITES[name]
    p = dict(suite.defaults)
    p.update(params or {})
    size = suite.size(p) if callable(suite.size) else suite.size
    if name == "hindex-props" and p["n"] > 12:
        raise CapError("hindex-props: n > 12")
    step = suite.shard_len
    bounds = [(lo, min(size, lo + step)) for lo in range(0, size, step)]
    if overrides:
        parts = [suite.shard(lo, hi, p, overrides) for lo, hi in bounds]
    elif jobs > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_shard, [(name, lo, hi, p) for lo, hi in bounds]))
    else:
        parts = [suite.shard(lo, hi, p) for lo, hi in bounds]
    merged: dict[str, Check] = {}
    for part in parts:
        for k, c in part.items():
            if k in merged:
                merged[k].merge(c)
            else:
                merged[k] = c
    report = SuiteReport(name, p, list(merged.values()))
    if name == "chain-n3":
        report.notes.append("RC <= 2R is the constant-factor form; RC <= R is checked as stated")
    return report


def list_suites() -> dict[str, str]:
    return {k: s.description for k, s in SUITES.items()}
