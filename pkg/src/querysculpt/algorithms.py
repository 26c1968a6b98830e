"""Query algorithms that decide ``f(x)`` or shrink the set of candidate inputs.

Every run reads the hidden input through an :class:`InputOracle` and returns a
:class:`QueryTranscript`, so query counts and observed bits can be audited
after the fact.  Algorithms that are prepared once per function and then run
on many inputs (the exhaustive sweeps do this a million times) come as small
classes; the module-level functions are thin wrappers around them.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from . import exact
from .core import (BooleanFunction, PartialAssignment, iter_bits, popcount,
                   restrict_to, variable_masks)
from .measures import (balance_ceil, certificate_table, fractional_packing, h_index,
                       minimal_blocks_of)

ROUNDS_FACTOR = 5


# -- transcripts and oracles ----------------------------------------------------------------

@dataclass
class QueryTranscript:
    """Ordered (index, bit) pairs, 1-based indices, with phase labels."""

    n: int
    queries: list[tuple[int, int]] = field(default_factory=list)
    phase_marks: list[tuple[str, int]] = field(default_factory=list)
    seed: int | None = None
    verdict: object = None
    flags: list[str] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return len(self.queries)

    def mark(self, label: str) -> None:
        self.phase_marks.append((label, len(self.queries)))

    def count_in(self, prefix: str) -> int:
        """Queries made during phases whose label starts with ``prefix``."""
        bounds = self.phase_marks + [("", len(self.queries))]
        return sum(bounds[i + 1][1] - start
                   for i, (label, start) in enumerate(self.phase_marks) if label.startswith(prefix))

    def replay_ok(self, x: int) -> bool:
        return all((x >> (i - 1) & 1) == b for i, b in self.queries)

    def to_dict(self) -> dict:
        return {
            "queries": [[i, b] for i, b in self.queries],
            "total": self.total,
            "phase_marks": [[label, pos] for label, pos in self.phase_marks],
            "seed": self.seed,
            "verdict": self.verdict,
            "flags": list(self.flags),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict()) + "\n"


class InputOracle:
    """Answers queries about a hidden input and logs them.

    Bits already revealed are answered from memory without a new query.
    """

    def __init__(self, x: int, n: int, transcript: QueryTranscript | None = None):
        self.x = x
        self.n = n
        self.t = transcript if transcript is not None else QueryTranscript(n)
        self.mask = 0
        self.bits = 0

    def query(self, j: int) -> int:
        """Bit of variable ``x_{j+1}`` (``j`` 0-based)."""
        if not 0 <= j < self.n:
            raise IndexError(f"query index {j + 1} out of range 1..{self.n}")
        b = self.x >> j & 1
        if not self.mask >> j & 1:
            self.mask |= 1 << j
            self.bits |= b << j
            self.t.queries.append((j + 1, b))
        return b


def _oracle(f: BooleanFunction, x, seed=None) -> InputOracle:
    orc = x if isinstance(x, InputOracle) else InputOracle(x, f.n)
    orc.t.seed = seed
    if not f.in_domain(orc.x):
        orc.t.flags.append("input-outside-domain")
    return orc


def _consistent(points, mask: int, bits: int) -> list[int]:
    return [z for z in points if z & mask == bits]


# -- greedy certificates ----------------------------------------------------------------------

def greedy_cover(a: int, others, n: int) -> list[int]:
    """Indices (0-based, in pick order) on which ``a`` disagrees with every member of ``others``.

    Each step fixes the bit of ``a`` that rules out the most remaining strings,
    lowest index on ties.
    """
    rest = [y for y in others]
    if a in rest:
        raise ValueError("the anchor itself is among the strings to exclude")
    order = []
    while rest:
        best_j, best_c = -1, -1
        for j in range(n):
            c = sum(1 for y in rest if (y ^ a) >> j & 1)
            if c > best_c:
                best_j, best_c = j, c
        order.append(best_j)
        rest = [y for y in rest if not (y ^ a) >> best_j & 1]
    return order


def greedy_certificate(f: BooleanFunction, x: int) -> PartialAssignment:
    """Greedy certificate for ``x``: fix bits until no opposite-value input remains."""
    if f.is_constant:
        raise ValueError("constant function: the empty assignment certifies every input")
    order = greedy_cover(x, list(iter_bits(f.opposite(x))), f.n)
    mask = 0
    for j in order:
        mask |= 1 << j
    return PartialAssignment.of(x, mask, f.n)


# -- distinguishers ----------------------------------------------------------------------------

@dataclass(frozen=True)
class DistinguisherSpec:
    """Sampler telling anchor ``a`` apart from ``f^{-1}(b)`` by fractional hitting weights."""

    n: int
    a: int
    b: int
    weights: tuple[Fraction, ...]
    cost: Fraction

    def __post_init__(self):
        if not any(self.weights):
            raise ValueError("degenerate distinguisher: all weights zero")

    @property
    def cumulative(self) -> list[int]:
        den = math.lcm(*(w.denominator for w in self.weights))
        acc, out = 0, []
        for w in self.weights:
            acc += int(w * den)
            out.append(acc)
        return out

    def rounds(self, factor: int = ROUNDS_FACTOR) -> int:
        return factor * math.ceil(self.cost)


def build_distinguisher(f: BooleanFunction, a: int, b: int) -> DistinguisherSpec:
    Y = f.preimage(b)
    if not Y:
        raise ValueError(f"f^-1({b}) is empty")
    if Y >> a & 1:
        raise ValueError("anchor lies in the set it should be distinguished from")
    blocks = minimal_blocks_of((y ^ a for y in iter_bits(Y)), f.n)
    sol = fractional_packing(blocks, f.n)
    return DistinguisherSpec(f.n, a, b, tuple(sol.hitting), sol.value)


def _sample_run(spec: DistinguisherSpec, orc: InputOracle, rng: random.Random, rounds: int,
                cum=None) -> str:
    picks = rng.choices(range(spec.n), cum_weights=cum or spec.cumulative, k=rounds)
    for j in picks:
        if orc.query(j) != spec.a >> j & 1:
            return "not-a"
    return "is-a"


def run_distinguisher(spec: DistinguisherSpec, oracle, rounds: int | None = None,
                      seed: int | None = 0):
    """Sample indices by weight; answer "not-a" only on an observed disagreement."""
    orc = oracle if isinstance(oracle, InputOracle) else InputOracle(oracle, spec.n)
    orc.t.seed = seed
    rng = random.Random(seed)
    verdict = _sample_run(spec, orc, rng, spec.rounds() if rounds is None else rounds)
    orc.t.verdict = verdict
    return verdict, orc.t


# -- majority elimination ------------------------------------------------------------------

def majority_string(Z, n: int) -> int:
    """Entry-wise majority of the strings in ``Z`` (ties go to 0)."""
    a = 0
    size = len(Z)
    for j in range(n):
        ones = sum(z >> j & 1 for z in Z)
        if 2 * ones > size:
            a |= 1 << j
    return a


def _classes(f: BooleanFunction):
    if f.is_constant:
        raise ValueError("elimination needs both function values present")
    z0, z1 = popcount(f.zeros), popcount(f.ones)
    zval = 0 if z0 <= z1 else 1
    return zval, list(iter_bits(f.preimage(zval)))


class MajorityEliminator:
    """Randomised elimination: shrink the smaller value class by majority anchors."""

    def __init__(self, f: BooleanFunction, rounds_factor: int = ROUNDS_FACTOR):
        self.f = f
        self.zval, self.Z0 = _classes(f)
        self.cap = 2 * balance_ceil(f)
        self.factor = rounds_factor
        self._specs: dict[int, tuple[DistinguisherSpec, list[int]]] = {}

    def distinguisher_for(self, a: int) -> tuple[DistinguisherSpec, list[int]]:
        hit = self._specs.get(a)
        if hit is None:
            f = self.f
            options = []
            for b in (0, 1):
                if f.preimage(b) >> a & 1:
                    continue
                options.append(build_distinguisher(f, a, b))
            spec = min(options, key=lambda s: (s.cost, s.b))
            hit = (spec, spec.cumulative)
            self._specs[a] = hit
        return hit

    def run(self, x, seed: int | None = 0):
        f = self.f
        orc = _oracle(f, x, seed)
        t = orc.t
        rng = random.Random(seed)
        Z = self.Z0
        counters = [0, 0]
        sizes = []
        iterations = 0
        value = None
        while Z:
            iterations += 1
            a = majority_string(Z, f.n)
            spec, cum = self.distinguisher_for(a)
            t.mark(f"iter{iterations}:b={spec.b}")
            rounds = spec.rounds(self.factor)
            while True:
                verdict = _sample_run(spec, orc, rng, rounds, cum)
                if verdict == "not-a":
                    before = len(Z)
                    Z = _consistent(Z, orc.mask, orc.bits)
                    sizes.append((before, len(Z)))
                    break
                counters[spec.b] += 1
                if counters[spec.b] >= self.cap:
                    value = 1 - spec.b
                    break
            if value is not None:
                break
        if value is None:
            value = 1 - self.zval
        t.verdict = value
        t.stats.update(iterations=iterations, z_sizes=sizes, counters=counters)
        return value, t


def majority_eliminate(f: BooleanFunction, oracle, seed: int | None = 0,
                       rounds_factor: int = ROUNDS_FACTOR):
    return MajorityEliminator(f, rounds_factor).run(oracle, seed)


def halving_ok(t: QueryTranscript) -> bool:
    return all(2 * after <= before for before, after in t.stats.get("z_sizes", []))


# -- deterministic elimination -----------------------------------------------------------------

class DeterministicEliminator:
    """Elimination with each distinguisher replaced by a greedy certificate of the anchor."""

    def __init__(self, f: BooleanFunction):
        self.f = f
        self.zval, self.Z0 = _classes(f)
        self._certs: dict[int, tuple[int, list[int]]] = {}

    def certificate_for(self, a: int) -> tuple[int, list[int]]:
        hit = self._certs.get(a)
        if hit is None:
            f = self.f
            options = []
            for b in (0, 1):
                Y = f.preimage(b)
                if Y >> a & 1:
                    continue
                order = greedy_cover(a, list(iter_bits(Y)), f.n)
                options.append((len(order), b, order))
            _, b, order = min(options, key=lambda o: (o[0], o[1]))
            hit = (b, order)
            self._certs[a] = hit
        return hit

    def run(self, x, transcript_phase: str = "elim"):
        f = self.f
        orc = x if isinstance(x, InputOracle) else _oracle(f, x)
        t = orc.t
        Z = _consistent(self.Z0, orc.mask, orc.bits)
        iterations = 0
        sizes, used = [], []
        value = None
        while Z:
            iterations += 1
            a = majority_string(Z, f.n)
            b, order = self.certificate_for(a)
            used.append(len(order))
            t.mark(f"{transcript_phase}{iterations}:b={b}")
            disagreed = False
            for j in order:
                if orc.query(j) != a >> j & 1:
                    disagreed = True
                    break
            if not disagreed:
                value = 1 - b
                break
            before = len(Z)
            Z = _consistent(Z, orc.mask, orc.bits)
            sizes.append((before, len(Z)))
        if value is None:
            value = 1 - self.zval
        t.verdict = value
        t.stats.update(iterations=iterations, z_sizes=sizes, certificate_sizes=used)
        return value, t


def deterministic_eliminate(f: BooleanFunction, oracle):
    return DeterministicEliminator(f).run(oracle)


# -- certificate enumeration ---------------------------------------------------------------------

def _cube(vm: list[int], full: int, mask: int, bits: int) -> int:
    c = full
    for j in iter_bits(mask):
        c &= vm[j] if bits >> j & 1 else full & ~vm[j]
    return c


@lru_cache(maxsize=64)
def _ordered_cubes(n: int, k: int) -> tuple[tuple[int, int, int], ...]:
    """(mask, bits, subcube bitmap) for assignments of size <= k, in certificate order."""
    vm = variable_masks(n)
    full = (1 << (1 << n)) - 1
    out = []
    for s in range(min(k, n) + 1):
        for idx in combinations(range(n), s):
            mask = sum(1 << j for j in idx)
            for pat in range(1 << s):
                bits = sum(((pat >> (s - 1 - r)) & 1) << j for r, j in enumerate(idx))
                out.append((mask, bits, _cube(vm, full, mask, bits)))
    return tuple(out)


def small_certificates(f: BooleanFunction, value: int, k: int) -> list[tuple[int, int]]:
    """All ``value``-certificates of size <= k as (mask, bits).

    Order: size, then index set lexicographically, then bits ascending.  A
    certificate must be extended by at least one domain input.
    """
    bad = f.preimage(1 - value)
    return [(m, b) for m, b, cube in _ordered_cubes(f.n, k)
            if cube & bad == 0 and cube & f.domain]


# -- certificate probing -------------------------------------------------------------------------

@dataclass
class ProbeResult:
    S: int                      # surviving domain bitmap
    transcript: QueryTranscript
    K: object                   # Hi(C_f^2)
    k: int

    @property
    def queries(self) -> int:
        return self.transcript.total


class CertificateProbe:
    """Reduce to an unbalanced residual promise by querying small 0-certificates."""

    def __init__(self, f: BooleanFunction, c_table: dict[int, int] | None = None):
        if not f.is_total:
            raise ValueError("certificate probing is stated for total functions")
        self.f = f
        ct = c_table or certificate_table(f)
        self.K = h_index([ct[x] * ct[x] for x in f.points()])
        self.k = exact.floor_sqrt(self.K)
        self.certs = small_certificates(f, 0, self.k)
        self.vm = variable_masks(f.n)
        self.full = (1 << (1 << f.n)) - 1

    def run(self, x) -> ProbeResult:
        f = self.f
        orc = _oracle(f, x)
        t = orc.t
        t.mark("probe")
        for _ in range(self.k):
            S = _cube(self.vm, self.full, orc.mask, orc.bits) & f.domain
            if S & f.values == 0 or S & f.values == S:
                break
            pick = next(((m, b) for m, b in self.certs
                         if (b ^ orc.bits) & orc.mask & m == 0), None)
            if pick is None:
                break
            for j in iter_bits(pick[0]):
                orc.query(j)
        S = _cube(self.vm, self.full, orc.mask, orc.bits) & f.domain
        t.verdict = format(S, "x")
        return ProbeResult(S, t, self.K, self.k)


def certificate_probe_reduce(f: BooleanFunction, oracle):
    """(residual promise bitmap S, transcript); see :class:`CertificateProbe`."""
    r = CertificateProbe(f).run(oracle)
    return r.S, r.transcript


def probe_bounds_ok(f: BooleanFunction, r: ProbeResult) -> tuple[bool, bool]:
    """(queries <= Hi(C^2), Bal(f|_S) <= Hi(C^2) + 1), exactly."""
    zeros, ones = popcount(r.S & ~f.values), popcount(r.S & f.values)
    return _probe_check(r.queries, min(zeros, ones), r.K)


@lru_cache(maxsize=4096)
def _probe_check(queries: int, minority: int, K) -> tuple[bool, bool]:
    bal = exact.Log2(2 * minority) if minority else 0
    return exact.cmp(queries, K) <= 0, exact.cmp(bal, exact.plus_int(K, 1)) <= 0


# -- hybrid algorithm ----------------------------------------------------------------------------

class HybridDecider:
    """Small certificates first, then deterministic elimination on a tiny residue."""

    def __init__(self, f: BooleanFunction, c_table: dict[int, int] | None = None):
        if not f.is_total:
            raise ValueError("the hybrid algorithm is stated for total functions")
        self.f = f
        ct = c_table or certificate_table(f)
        self.h = h_index([exact.Sqrt(ct[x]) for x in f.points()])
        self.L = exact.floor_square(self.h)
        self.certs = {v: small_certificates(f, v, self.L) for v in (0, 1)}
        self.vm = variable_masks(f.n)
        self.full = (1 << (1 << f.n)) - 1
        self._elim: dict[int, DeterministicEliminator] = {}

    def run(self, x):
        f = self.f
        orc = _oracle(f, x)
        t = orc.t
        for v in (0, 1):
            t.mark(f"phase1:{v}")
            while True:
                pick = next(((m, b) for m, b in self.certs[v]
                             if (b ^ orc.bits) & orc.mask & m == 0), None)
                if pick is None:
                    break
                for j in iter_bits(pick[0]):
                    orc.query(j)
                if orc.x & pick[0] == pick[1]:
                    t.verdict = v
                    t.stats["phase"] = 1
                    return v, t
        S = _cube(self.vm, self.full, orc.mask, orc.bits) & f.domain
        if S & f.values == 0 or S & f.values == S:
            value = 1 if S & f.values else 0
            t.verdict = value
            t.stats["phase"] = 1
            return value, t
        t.stats["phase"] = 2
        t.stats["residual_size"] = popcount(S)
        # every survivor has C > L >= ... so at most 2^h of them
        assert exact.cmp(exact.Log2(popcount(S)), self.h) <= 0, "residual larger than 2^Hi(sqrt C)"
        t.mark("phase2")
        g = restrict_to(f, S)
        elim = self._elim.get(S)
        if elim is None:
            elim = self._elim[S] = DeterministicEliminator(g)
        value, _ = elim.run(orc, "phase2:")
        return value, t


def hybrid_decision(f: BooleanFunction, oracle):
    return HybridDecider(f).run(oracle)


def hybrid_phase1_ok(f: BooleanFunction, t: QueryTranscript, h, bs: int) -> bool:
    """phase-1 queries <= 2 * bs(f) * h**2, exactly."""
    return _phase1_check(t.count_in("phase1"), bs, h)


@lru_cache(maxsize=4096)
def _phase1_check(q: int, bs: int, h) -> bool:
    if q == 0:
        return True
    if bs == 0:
        return False
    return exact.le_square(Fraction(q, 2 * bs), h)


# -- half-certifying trees ---------------------------------------------------------------------

def truncate(tree, depth: int):
    """Cut ``tree`` at ``depth``; cut branches become ``None`` (no answer)."""
    if isinstance(tree, int):
        return tree
    if depth == 0:
        return None
    j, t0, t1 = tree
    return (j, truncate(t0, depth - 1), truncate(t1, depth - 1))


def run_tree(tree, orc: InputOracle):
    """Walk a (possibly truncated) tree; returns the leaf value or ``None``."""
    while isinstance(tree, tuple):
        j, t0, t1 = tree
        tree = t1 if orc.query(j) else t0
    return tree


def tree_outcome(tree, z: int):
    while isinstance(tree, tuple):
        j, t0, t1 = tree
        tree = t1 if z >> j & 1 else t0
    return tree


def certified_count(tree, Z) -> int:
    return sum(1 for z in Z if tree_outcome(tree, z) is not None)


def find_half_certifying_tree(f: BooleanFunction, Z, q: int, mode: str = "guaranteed",
                              seed: int | None = 0, support=None):
    """A depth-<=q tree that reaches an answer on at least half of ``Z``, or ``None``.

    ``guaranteed`` samples trees from an optimal zero-error mixture (n <= 3);
    ``heuristic`` grows a tree greedily and may fail.
    """
    Z = list(Z)
    if not Z:
        return 0
    if mode == "guaranteed":
        if support is None:
            from .oracles import brute_force_R0

            _, support = brute_force_R0(f, support=True)
        trees = [truncate(t, q) for t, _ in support]
        rng = random.Random(seed)
        weights = [float(p) for _, p in support]
        for _ in range(4 * len(trees)):
            t = rng.choices(trees, weights=weights)[0]
            if 2 * certified_count(t, Z) >= len(Z):
                return t
        for t in trees:
            if 2 * certified_count(t, Z) >= len(Z):
                return t
        return None
    if mode == "heuristic":
        t = _greedy_tree(f, Z, q)
        return t if 2 * certified_count(t, Z) >= len(Z) else None
    raise ValueError(f"unknown mode {mode!r}")


def _greedy_tree(f: BooleanFunction, Z, q: int, mask: int = 0, bits: int = 0):
    pts = _consistent(f.points(), mask, bits)
    vals = {f(p) for p in pts}
    if len(vals) <= 1:
        return vals.pop() if vals else 0
    if q == 0:
        return None
    Zs = _consistent(Z, mask, bits)
    best = None
    for j in range(f.n):
        if mask >> j & 1:
            continue
        b = 1 << j
        score = 0
        for side in (0, b):
            sub = _consistent(pts, mask | b, bits | side)
            if len({f(p) for p in sub}) <= 1:
                score += len(_consistent(Zs, mask | b, bits | side))
        if best is None or score > best[0]:
            best = (score, j)
    j = best[1]
    b = 1 << j
    return (j, _greedy_tree(f, Z, q - 1, mask | b, bits),
            _greedy_tree(f, Z, q - 1, mask | b, bits | b))


class TreeChainEliminator:
    """Decide ``f`` by repeatedly running half-certifying trees on the smaller class."""

    def __init__(self, f: BooleanFunction, mode: str = "guaranteed", seed: int | None = 0):
        from .oracles import brute_force_R0

        self.f = f
        self.zval, self.Z0 = _classes(f)
        self.R0, self.support = brute_force_R0(f, support=True)
        self.q = math.floor(2 * self.R0)
        self.mode = mode
        self.seed = seed
        self._trees: dict[tuple[int, ...], object] = {}

    def tree_for(self, Z) -> object:
        key = tuple(Z)
        if key not in self._trees:
            t = find_half_certifying_tree(self.f, Z, self.q, self.mode, self.seed, self.support)
            if t is None:
                raise RuntimeError("no half-certifying tree found")
            self._trees[key] = t
        return self._trees[key]

    def run(self, x):
        f = self.f
        orc = _oracle(f, x)
        t = orc.t
        Z = self.Z0
        rounds = 0
        sizes = []
        while Z:
            rounds += 1
            t.mark(f"tree{rounds}")
            out = run_tree(self.tree_for(Z), orc)
            if out is not None:
                t.verdict = out
                t.stats.update(iterations=rounds, z_sizes=sizes)
                return out, t
            before = len(Z)
            Z = _consistent(Z, orc.mask, orc.bits)
            sizes.append((before, len(Z)))
        value = 1 - self.zval
        t.verdict = value
        t.stats.update(iterations=rounds, z_sizes=sizes)
        return value, t


def tree_chain_decide(f: BooleanFunction, oracle, mode: str = "guaranteed"):
    return TreeChainEliminator(f, mode).run(oracle)
