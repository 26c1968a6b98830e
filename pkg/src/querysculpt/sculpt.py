"""Promise constructions with checked query-complexity gaps.

Two builders live here.

``sculpt_r0_vs_r`` finds a promise on which one random query (compare a random
bit with a special input ``x``) decides the function with error at most 1/3,
while any zero-error algorithm still has to reveal a certificate of size at
least ``bs(f)/6``.

``sculpt_via_gadget`` embeds a small partial function ``g`` on ``A`` bits into
``f``: a set of inputs with large fractional block sensitivity shatters an
index set ``B`` with ``|B| = A``; each pattern of ``B`` is represented by one of
those inputs, and wherever ``f`` disagrees with ``g`` the input is replaced by
the support of its hard distribution conditioned on keeping ``B`` fixed.  On
the resulting promise ``f(y) = g(y|_B)`` holds identically.

Also here: extension functions, two-party functions and their marginals, and
the compiler turning a query algorithm for an extended function into a
two-party protocol.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import exact
from .core import (BooleanFunction, CapError, PartialAssignment, Promise, check_cap,
                   fmt_input, full_mask, iter_bits, mask_to_index_set, popcount,
                   restrict_to)
from .measures import (block_sensitivity_at, bs_table, certificate_complexity_at,
                       fractional_block_sensitivity_at, h_index, log2n, rc_table)
from .shattering import NoShatteredSet, find_shattered_set, project

SCULPT_MAX_ARITY = 16
GADGET_MAX_ARITY = 14
PARTIAL_ASSIGNMENT_CAP = 10 ** 6


class SculptRefused(ValueError):
    """The requested construction does not exist for this function."""


@dataclass(frozen=True)
class VerifiedBound:
    """One checked inequality ``lhs <relation> rhs`` with exact values."""

    name: str
    lhs: object
    relation: str
    rhs: object

    @property
    def holds(self) -> bool:
        c = exact.cmp(self.lhs, self.rhs)
        return {"<=": c <= 0, ">=": c >= 0, "==": c == 0}[self.relation]

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": exact.render(self.lhs), "relation": self.relation,
                "rhs": exact.render(self.rhs), "holds": self.holds}


@dataclass
class SculptResult:
    promise: Promise
    case_tag: str
    witness: dict
    verified_bounds: list[VerifiedBound]
    flags: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(b.holds for b in self.verified_bounds)

    def bound(self, name: str) -> VerifiedBound:
        for b in self.verified_bounds:
            if b.name == name:
                return b
        raise KeyError(name)

    def recheck(self, f: BooleanFunction, g: BooleanFunction | None = None) -> bool:
        """Recompute every bound from scratch and compare with the stored values."""
        if self.case_tag == "gadget":
            if g is None:
                raise ValueError("the gadget promise needs g to recheck")
            fresh = _gadget_bounds(f, g, self.promise, self.witness)
        else:
            fresh = _r0r_bounds(f, self.promise, self.witness)
        return (all(b.holds for b in fresh)
                and [(b.name, exact.render(b.lhs), exact.render(b.rhs)) for b in fresh]
                == [(b.name, exact.render(b.lhs), exact.render(b.rhs)) for b in self.verified_bounds])

    def to_dict(self) -> dict:
        return {
            "case_tag": self.case_tag,
            "flags": list(self.flags),
            "promise": {"n": self.promise.n, "size": self.promise.size,
                        "members_hex": self.promise.hex()},
            "witness": self.witness,
            "verified_bounds": [b.to_dict() for b in self.verified_bounds],
            "ok": self.ok,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


# -- one random query versus zero error ------------------------------------------------------

def far_threshold(n: int) -> int:
    return -(-2 * n // 3)


def near_threshold(n: int) -> int:
    return n // 3


def _distances(n: int, x: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64) ^ x
    d = np.zeros(1 << n, dtype=np.int64)
    for j in range(n):
        d += (idx >> j) & 1
    return d


def _members(arr_bool: np.ndarray) -> list[int]:
    return np.flatnonzero(arr_bool).tolist()


def _bs_values(f: BooleanFunction) -> list[int]:
    if f.n <= 10:
        from .tables import bs_tables, value_matrix
        row = bs_tables(value_matrix([f.values], f.n), f.n)[0]
        return [int(v) for v in row]
    t = bs_table(f)
    return [t[x] for x in range(f.size)]


def _assignments(x: int, n: int, size: int):
    """Partial assignments consistent with ``x`` of the given size, masks in combination order."""
    from itertools import combinations
    for pos in combinations(range(n), size):
        m = 0
        for j in pos:
            m |= 1 << j
        yield m


def sculpt_r0_vs_r(f: BooleanFunction) -> SculptResult:
    """Promise with a one-query bounded-error algorithm but large zero-error cost."""
    if not f.is_total:
        raise ValueError("sculpt_r0_vs_r needs a total function")
    if f.is_constant:
        raise ValueError("sculpt_r0_vs_r needs a non-constant function")
    check_cap(f.n, SCULPT_MAX_ARITY, "sculpt_r0_vs_r")
    n = f.n
    bs_vals = _bs_values(f)
    bs = max(bs_vals)
    x = bs_vals.index(bs)
    flip = f(x) == 1
    h = f.negate() if flip else f                     # h(x) = 0 from here on
    sizes = [k for k in range(n + 1) if 6 * k < bs]
    nodes = sum(math.comb(n, k) for k in sizes)
    if nodes > PARTIAL_ASSIGNMENT_CAP:
        raise CapError(f"{nodes} partial assignments exceed the cap {PARTIAL_ASSIGNMENT_CAP}")

    dist = _distances(n, x)
    table = np.array(h.table)
    far = dist >= far_threshold(n)
    s1 = np.flatnonzero(far & (table == 1))
    emptying = None
    for k in sizes:
        for m in _assignments(x, n, k):
            if not ((s1 ^ x) & m == 0).any():
                emptying = m
                break
        if emptying is not None:
            break

    base = {"x": fmt_input(x, n), "value_flip": flip, "bs": bs,
            "far_threshold": far_threshold(n), "near_threshold": near_threshold(n),
            "assignments_checked": nodes if emptying is None else None}
    flags = ["small-bs"] if bs <= 6 else []
    if emptying is None:
        members = [x] + s1.tolist()
        witness = dict(base, p=None, blocks=None)
        case = "case1"
    else:
        _, family = block_sensitivity_at(f, x, witness=True)
        kept = [b for b in family if b & emptying == 0 and popcount(b) <= near_threshold(n)]
        consistent = ((np.arange(1 << n) ^ x) & emptying) == 0
        S = _members(consistent & far)
        witness = dict(base, p=str(PartialAssignment.of(x, emptying, n)),
                       blocks=[list(mask_to_index_set(b)) for b in kept])
        case = "case2"
        members = [x ^ b for b in kept] + S
        if not kept:
            if bs > 6:
                raise AssertionError("no usable blocks although bs > 6")
            return _sensitive_edge_result(f, bs)
        witness["assignments_checked"] = None
    promise = Promise.from_inputs(n, members)
    bounds = _r0r_bounds(f, promise, witness)
    return SculptResult(promise, case, witness, bounds, flags)


def _sensitive_edge_result(f: BooleanFunction, bs: int) -> SculptResult:
    """Two inputs differing in one variable: trivially fine when ``bs <= 6``."""
    n = f.n
    for z in range(f.size):
        for j in range(n):
            if f(z) != f(z ^ (1 << j)):
                promise = Promise.from_inputs(n, [z, z ^ (1 << j)])
                witness = {"x": fmt_input(z, n), "value_flip": False, "bs": bs, "edge_index": j + 1}
                return SculptResult(promise, "small-bs", witness,
                                    _r0r_bounds(f, promise, witness), ["small-bs"])
    raise AssertionError("non-constant function without a sensitive edge")


def distinguisher_error(f: BooleanFunction, P: Promise, x: int, near_value: int) -> Fraction:
    """Worst error of: query a uniform random bit, answer ``near_value`` iff it agrees with ``x``.

    On ``y`` at distance ``d`` from ``x`` this errs with probability ``d/n``
    when ``f(y) = near_value`` and ``1 - d/n`` otherwise.
    """
    n = f.n
    worst = Fraction(0)
    for y in P:
        d = Fraction(popcount(x ^ y), n)
        worst = max(worst, d if f(y) == near_value else 1 - d)
    return worst


def _r0r_bounds(f: BooleanFunction, P: Promise, witness: dict) -> list[VerifiedBound]:
    n = f.n
    x = int(witness["x"], 2)
    bs = witness["bs"]
    fp = restrict_to(f, P.members)
    bounds = []
    if "edge_index" in witness:
        j = witness["edge_index"] - 1
        err = Fraction(sum(1 for y in P if (y >> j & 1) != (x >> j & 1) and f(y) == f(x)))
        bounds.append(VerifiedBound("fixed-query distinguisher error", err, "<=", Fraction(1, 3)))
        bounds.append(VerifiedBound("certificate on the promise at x", certificate_complexity_at(fp, x),
                                    ">=", Fraction(bs, 6)))
        return bounds
    x_val = f(x)
    near_value = x_val if witness.get("p") is None else 1 - x_val
    near_d = [popcount(x ^ y) for y in P if f(y) == near_value]
    far_d = [popcount(x ^ y) for y in P if f(y) != near_value]
    bounds.append(VerifiedBound("near side max distance", max(near_d), "<=", near_threshold(n)))
    bounds.append(VerifiedBound("far side min distance", min(far_d), ">=", far_threshold(n)))
    bounds.append(VerifiedBound("one-query distinguisher error",
                                distinguisher_error(f, P, x, near_value), "<=", Fraction(1, 3)))
    if witness.get("p") is None:
        c = certificate_complexity_at(fp, x)
        bounds.append(VerifiedBound("certificate on the promise at x", c, ">=", Fraction(bs, 6)))
    else:
        c = min(certificate_complexity_at(fp, y) for y in P if f(y) == near_value)
        bounds.append(VerifiedBound("certificate on the promise at the block flips", c,
                                    ">=", Fraction(bs, 6)))
    return bounds


# -- extension functions -------------------------------------------------------------------

@dataclass(frozen=True)
class ExtensionFunction:
    """Injective map from ``A``-bit strings to ``G``-bit strings, stored as a table."""

    A: int
    G: int
    table: tuple[int, ...]

    def __post_init__(self):
        if self.G < self.A:
            raise ValueError("an extension needs G >= A")
        if len(self.table) != 1 << self.A:
            raise ValueError("table must list one image per source string")
        if len(set(self.table)) != len(self.table):
            raise ValueError("extension function is not injective")
        if any(z >> self.G for z in self.table):
            raise ValueError("image wider than G bits")

    def __call__(self, w: int) -> int:
        return self.table[w]

    def inverse(self) -> dict[int, int]:
        return {z: w for w, z in enumerate(self.table)}

    def lift(self, g: BooleanFunction) -> BooleanFunction:
        """``g`` precomposed with the inverse map: a partial function on ``G`` bits."""
        if g.n != self.A:
            raise ValueError("arity mismatch between g and the extension")
        check_cap(self.G, 24, "lift")
        dom = vals = 0
        for w in g.points():
            z = self.table[w]
            dom |= 1 << z
            if g(w):
                vals |= 1 << z
        return BooleanFunction(self.G, dom, vals)


def build_extension_from_shattered(C_set, B, n: int) -> ExtensionFunction:
    """Map each pattern on ``B`` to the lowest input of ``C_set`` showing it.

    ``B`` holds 1-based indices; pattern bit k is the value at the k-th smallest index.
    """
    B = sorted(B)
    pos = tuple(i - 1 for i in B)
    S = np.unique(np.asarray(list(C_set), dtype=np.int64))
    pats = project(S, pos)
    chosen: dict[int, int] = {}
    for z, p in zip(S.tolist(), pats.tolist()):
        chosen.setdefault(p, z)
    if len(chosen) != 1 << len(pos):
        raise ValueError("B is not shattered by the given inputs")
    return ExtensionFunction(len(pos), n, tuple(chosen[w] for w in range(1 << len(pos))))


def pattern_on(y: int, B) -> int:
    """Restriction of ``y`` to the 1-based indices ``B`` (ascending), as an integer pattern."""
    return sum(((y >> (i - 1)) & 1) << k for k, i in enumerate(sorted(B)))


# -- embedding a gadget -------------------------------------------------------------------

def rc_threshold_class(f: BooleanFunction, threshold) -> list[int]:
    """Inputs with ``RC_f(x) >= threshold``, ascending."""
    t = rc_table(f)
    return [x for x in f.points() if exact.cmp(t[x], threshold) >= 0]


@dataclass(frozen=True)
class GadgetParameters:
    """The default parameterisation: class threshold and largest usable gadget arity."""

    hi_rc: object
    hi_scaled: object
    class_size: int
    a_max: int

    def to_dict(self) -> dict:
        return {"hi_rc": exact.render(self.hi_rc), "hi_rc_times_2log_n": exact.render(self.hi_scaled),
                "class_size": self.class_size, "a_max": self.a_max}


def gadget_parameters(f: BooleanFunction) -> GadgetParameters:
    """Largest ``a`` with ``4 a log2 n <= Hi(RC)``, and the class ``RC * 2 log2 n >= Hi(RC * 2 log2 n)``."""
    if f.n < 2:
        raise ValueError("needs n >= 2")
    t = rc_table(f)
    rc = [t[x] for x in f.points()]
    two_log = exact.LogScaled(2, f.n)
    scaled = [exact.scale(v, two_log) for v in rc]
    hi_rc = h_index(rc)
    hi_scaled = h_index(scaled)
    size = sum(1 for v in scaled if exact.cmp(v, hi_scaled) >= 0)
    a = 0
    while exact.cmp(exact.LogScaled(4 * (a + 1), f.n), hi_rc) <= 0:
        a += 1
    return GadgetParameters(hi_rc, hi_scaled, size, a)


def a_max(f: BooleanFunction) -> int:
    return gadget_parameters(f).a_max


def sculpt_via_gadget(f: BooleanFunction, g: BooleanFunction, rc_threshold) -> SculptResult:
    """Promise on which ``f(y) = g(y|_B)`` for a shattered index set ``B``."""
    if not f.is_total:
        raise ValueError("sculpt_via_gadget needs a total function")
    check_cap(f.n, GADGET_MAX_ARITY, "sculpt_via_gadget")
    A = g.n
    if A < 1:
        raise SculptRefused("the gadget needs at least one bit")
    rc_threshold = Fraction(rc_threshold)
    if rc_threshold < 2 * A:
        raise SculptRefused(f"rc_threshold {rc_threshold} is below 2A = {2 * A}")
    C_set = rc_threshold_class(f, rc_threshold)
    if len(C_set) < 1 << A:
        raise SculptRefused(f"only {len(C_set)} inputs have RC >= {rc_threshold}; "
                            f"no index set of size {A} can be shattered")
    try:
        wit = find_shattered_set(C_set, f.n, target_size=A)
    except NoShatteredSet as e:
        raise SculptRefused(str(e)) from None
    B = list(wit.indices)
    phi = build_extension_from_shattered(C_set, B, f.n)
    members = 0
    processed = []
    for w in g.points():
        x = phi(w)
        if pattern_on(x, B) != w:
            raise AssertionError("extension does not restrict back to its pattern")
        if f(x) == g(w):
            members |= 1 << x
            processed.append({"pattern": fmt_input(w, A), "x": fmt_input(x, f.n), "kept": True})
            continue
        cond = conditioned_hard_distribution(f, x, B)
        for y, _ in cond["support"]:
            members |= 1 << y
        processed.append({"pattern": fmt_input(w, A), "x": fmt_input(x, f.n), "kept": False,
                          "rc": exact.render(cond["rc"]), "agree_mass": exact.render(cond["mass"]),
                          "support": [[fmt_input(y, f.n), exact.render(p)] for y, p in cond["support"]]})
    witness = {"B": B, "A": A, "rc_threshold": exact.render(rc_threshold),
               "class_size": len(C_set), "gadget": g.to_string(),
               "extension": [fmt_input(z, f.n) for z in phi.table], "processed": processed}
    promise = Promise(f.n, members)
    return SculptResult(promise, "gadget", witness, _gadget_bounds(f, g, promise, witness))


def conditioned_hard_distribution(f: BooleanFunction, x: int, B) -> dict:
    """Hard distribution at ``x`` conditioned on agreeing with ``x`` on ``B``, renormalised."""
    rc, mu = fractional_block_sensitivity_at(f, x)
    if not mu.exact:
        raise CapError("hard distribution is not exact at this size")
    bmask = sum(1 << (i - 1) for i in B)
    keep = [(y, p) for y, p in mu.support if (y ^ x) & bmask == 0]
    mass = sum((p for _, p in keep), Fraction(0))
    if mass == 0:
        raise AssertionError("empty conditional support")
    support = [(y, p / mass) for y, p in keep]
    return {"rc": rc, "mass": mass, "support": support, "mu": mu}


def _gadget_bounds(f: BooleanFunction, g: BooleanFunction, P: Promise,
                   witness: dict) -> list[VerifiedBound]:
    B = witness["B"]
    threshold = Fraction(witness["rc_threshold"])
    mismatches = sum(1 for y in P if not g.in_domain(pattern_on(y, B)) or g(pattern_on(y, B)) != f(y))
    bounds = [VerifiedBound("identity f(y) = g(y|B) violations", mismatches, "==", 0)]
    bmask = sum(1 << (i - 1) for i in B)
    min_mass, max_off, total_err = Fraction(1), Fraction(0), Fraction(0)
    for item in witness["processed"]:
        if item["kept"]:
            continue
        x = int(item["x"], 2)
        cond = conditioned_hard_distribution(f, x, B)
        min_mass = min(min_mass, cond["mass"])
        total_err = max(total_err, abs(sum(p for _, p in cond["support"]) - 1))
        off = [Fraction(0)] * f.n
        for y, p in cond["support"]:
            for j in iter_bits((y ^ x) & ~bmask):
                off[j] += p
        max_off = max([max_off] + off)
    bounds.append(VerifiedBound("conditioning mass on B", min_mass, ">=", Fraction(1, 2)))
    bounds.append(VerifiedBound("off-B disagreement of the conditioned distribution", max_off,
                                "<=", 2 / threshold))
    bounds.append(VerifiedBound("conditioned masses sum to one (error)", total_err, "==", 0))
    bounds.append(VerifiedBound("gadget arity vs shattered set", len(B), "==", g.n))
    return bounds


# -- two-party functions and protocols ----------------------------------------------------

@dataclass(frozen=True)
class TwoPartyFunction:
    """``F(a, b)`` on Alice's ``N1`` bits and Bob's ``N2`` bits; ``None`` outside the domain."""

    N1: int
    N2: int
    evaluator: Callable[[int, int], int | None]
    name: str = ""

    def __call__(self, a: int, b: int):
        return self.evaluator(a, b)

    def in_domain(self, a: int, b: int) -> bool:
        return self.evaluator(a, b) is not None


MARGINAL_CAP = 22


def marginal_set(F: TwoPartyFunction, alice_inputs=None) -> dict[int, BooleanFunction]:
    """Bob-side slice ``b -> F(a, b)`` for each Alice input with a nonempty slice."""
    if F.N1 > 20 or F.N2 > 24:
        raise CapError("marginal_set: arity cap exceeded")
    if alice_inputs is None:
        if F.N1 + F.N2 > MARGINAL_CAP:
            raise CapError(f"marginal_set: 2^{F.N1 + F.N2} evaluations exceed the cap")
        alice_inputs = range(1 << F.N1)
    out = {}
    for a in alice_inputs:
        dom = vals = 0
        for b in range(1 << F.N2):
            v = F(a, b)
            if v is None:
                continue
            dom |= 1 << b
            if v:
                vals |= 1 << b
        if dom:
            out[a] = BooleanFunction(F.N2, dom, vals)
    return out


@dataclass(frozen=True)
class ProtocolRun:
    answer: object
    queries: int
    bits_exchanged: int
    transcript: tuple[tuple[int, int], ...]


def index_bits(G: int) -> int:
    return max(0, (G - 1).bit_length())


def compile_protocol(phi: ExtensionFunction, alice_algorithm, bob_input: int) -> ProtocolRun:
    """Run ``alice_algorithm(ask)`` where each ``ask(i)`` is one round trip.

    Alice sends a 1-based position in ``1..G`` on ``ceil(log2 G)`` bits; Bob
    replies with that bit of ``phi(bob_input)``.
    """
    z = phi(bob_input)
    log = []

    def ask(i: int) -> int:
        if not 1 <= i <= phi.G:
            raise IndexError(f"query {i} outside 1..{phi.G}")
        bit = (z >> (i - 1)) & 1
        log.append((i, bit))
        return bit

    answer = alice_algorithm(ask)
    return ProtocolRun(answer, len(log), (index_bits(phi.G) + 1) * len(log), tuple(log))


def promise_as_function(f: BooleanFunction, P: Promise) -> BooleanFunction:
    return restrict_to(f, P.members & full_mask(f.n))
