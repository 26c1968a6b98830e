"""Two hard gadgets: double equality over a random code, and vector in subspace.

Double equality.  Alice holds ``(a1, a2)``, Bob holds ``(code(b1), code(b2))``
and exactly one of ``a1 = b1``, ``a2 = b2`` holds.  Knowing Alice's side, the
zero-error sampler compares random positions of Bob's two codewords with
``code(a1)`` and ``code(a2)``: a disagreement in one word proves the other pair
is the equal one.  A code of relative distance ``delta`` makes each sample
conclusive with probability at least ``delta``.

Vector in subspace.  Bob holds a unit vector ``v``, Alice an ``n/2``-dimensional
subspace ``H``, and ``v`` lies in ``H`` or in its orthogonal complement.  Bob's
string lists, for every prefix of the ``log2 n``-bit index, the probability that
the next index bit is 0 (a tree of ``n - 1`` conditionals) plus ``n`` sign bits.
Loading one tree level per query builds the state with amplitudes ``v``;
Alice then measures with the projector onto ``H``.  The simulator here does
that linear algebra classically and counts one query per level.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import CapError
from .sculpt import ExtensionFunction, TwoPartyFunction

CODE_RATE_INVERSE = 3
DISTANCE_FRACTION = Fraction(1, 10)
MAX_RESAMPLES = 100
DE_MAX_N = 10


class PromiseViolation(ValueError):
    """The input breaks the gadget's promise; the sampler refuses to answer."""


class CodeSearchFailed(RuntimeError):
    pass


def _popcount_array(a: np.ndarray) -> np.ndarray:
    a = a.astype(np.uint64)
    out = np.zeros(a.shape, dtype=np.int64)
    while a.any():
        out += (a & np.uint64(1)).astype(np.int64)
        a = a >> np.uint64(1)
    return out


def min_distance(codewords) -> int:
    """Smallest pairwise Hamming distance, by an exhaustive pair scan."""
    c = np.asarray(codewords, dtype=np.uint64)
    best = None
    for i in range(len(c) - 1):
        d = int(_popcount_array(c[i + 1:] ^ c[i]).min())
        best = d if best is None else min(best, d)
    return best if best is not None else 0


@dataclass(frozen=True)
class DoubleEqualityInstance:
    n: int
    code: tuple[int, ...]          # codeword of each n-bit string, 3n bits
    seed: int
    min_distance: int
    attempts: int

    @property
    def length(self) -> int:
        return CODE_RATE_INVERSE * self.n

    @property
    def delta(self) -> Fraction:
        return Fraction(self.min_distance, self.length)

    def bob_string(self, b1: int, b2: int) -> int:
        """Bob's ``6n``-bit input: ``code(b1)`` on positions 1..3n, ``code(b2)`` after."""
        return self.code[b1] | (self.code[b2] << self.length)

    def extension(self) -> ExtensionFunction:
        """``(b1, b2) -> (code(b1), code(b2))`` as an extension from 2n to 6n bits."""
        n = self.n
        table = tuple(self.bob_string(w & ((1 << n) - 1), w >> n) for w in range(1 << (2 * n)))
        return ExtensionFunction(2 * n, 6 * n, table)

    def to_dict(self) -> dict:
        width = -(-self.length // 4)
        return {"n": self.n, "seed": self.seed, "length": self.length,
                "min_distance": self.min_distance, "attempts": self.attempts,
                "code_hex": [format(c, f"0{width}x") for c in self.code]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def double_equality_value(inst: DoubleEqualityInstance, a1: int, a2: int, b1: int, b2: int):
    """0 ("first") when only the first pair is equal, 1 ("second") when only the second is."""
    e1, e2 = a1 == b1, a2 == b2
    if e1 == e2:
        return None
    return 0 if e1 else 1


def build_double_equality(n: int, seed: int = 0,
                          distance_fraction: Fraction = DISTANCE_FRACTION):
    """Random code of length ``3n`` with verified minimum distance, and the two-party function."""
    if not 2 <= n <= DE_MAX_N:
        raise CapError(f"double equality needs 2 <= n <= {DE_MAX_N}")
    length = CODE_RATE_INVERSE * n
    target = math.ceil(distance_fraction * length)
    rng = np.random.default_rng(seed)
    for attempt in range(1, MAX_RESAMPLES + 1):
        words = rng.integers(0, 1 << length, size=1 << n, dtype=np.uint64)
        if len(np.unique(words)) < len(words):
            continue
        d = min_distance(words)
        if d >= target:
            inst = DoubleEqualityInstance(n, tuple(int(w) for w in words), seed, d, attempt)
            break
    else:
        raise CodeSearchFailed(f"no code with distance >= {target} in {MAX_RESAMPLES} tries (seed {seed})")

    decode = {c: i for i, c in enumerate(inst.code)}
    mask_n, mask_l = (1 << n) - 1, (1 << length) - 1

    def evaluator(a: int, bob: int):
        b1, b2 = decode.get(bob & mask_l), decode.get(bob >> length)
        if b1 is None or b2 is None:
            return None
        return double_equality_value(inst, a & mask_n, a >> n, b1, b2)

    return TwoPartyFunction(2 * n, 6 * n, evaluator, name=f"double-equality-{n}"), inst


class BobOracle:
    """Position-level access to Bob's string (1-based), counting reads."""

    def __init__(self, bits: int, width: int):
        self.bits, self.width, self.count = bits, width, 0

    def __call__(self, i: int) -> int:
        if not 1 <= i <= self.width:
            raise IndexError(f"position {i} outside 1..{self.width}")
        self.count += 1
        return (self.bits >> (i - 1)) & 1


def marginal_r0_sampler(inst: DoubleEqualityInstance, a1: int, a2: int, bob, seed: int | None = 0,
                        confirm: bool = False) -> tuple[str, int]:
    """Zero-error decision of which pair is equal, from Alice's side.

    Positions of the two words are visited in independent random orders,
    alternating between the words.  ``confirm=True`` additionally reads the
    rest of the supposedly equal word, which also catches inputs where neither
    pair is equal, at the price of ``3n`` extra reads.
    """
    L = inst.length
    rng = random.Random(seed)
    orders = [rng.sample(range(L), L), rng.sample(range(L), L)]
    refs = (inst.code[a1], inst.code[a2])
    queries = 0
    for t in range(L):
        for w in (0, 1):
            j = orders[w][t]
            queries += 1
            if bob(w * L + j + 1) != (refs[w] >> j) & 1:
                answer = "second" if w == 0 else "first"
                if confirm:
                    other = 1 - w
                    for jj in orders[other]:
                        queries += 1
                        if bob(other * L + jj + 1) != (refs[other] >> jj) & 1:
                            raise PromiseViolation("neither pair is equal")
                return answer, queries
    raise PromiseViolation("both pairs are equal")


def sampler_as_algorithm(inst: DoubleEqualityInstance, a1: int, a2: int, seed: int | None = 0):
    """The sampler as a query algorithm over ``ask(i)``, for the protocol compiler."""
    def algorithm(ask):
        return marginal_r0_sampler(inst, a1, a2, ask, seed)[0]
    return algorithm


def promise_trial(inst: DoubleEqualityInstance, rng: random.Random):
    """A random promise-respecting input: ``(a1, a2, b1, b2, expected answer)``."""
    N = 1 << inst.n
    a1, a2 = rng.randrange(N), rng.randrange(N)
    other = lambda a: (a + rng.randrange(1, N)) % N
    if rng.random() < 0.5:
        return a1, a2, a1, other(a2), "first"
    return a1, a2, other(a1), a2, "second"


def run_sampler_trials(inst: DoubleEqualityInstance, trials: int, seed: int = 0) -> dict:
    rng = random.Random(seed)
    errors = total = worst = 0
    for t in range(trials):
        a1, a2, b1, b2, expect = promise_trial(inst, rng)
        bob = BobOracle(inst.bob_string(b1, b2), 2 * inst.length)
        ans, q = marginal_r0_sampler(inst, a1, a2, bob, seed=rng.getrandbits(64))
        if q != bob.count:
            raise AssertionError("query count mismatch")
        errors += ans != expect
        total += q
        worst = max(worst, q)
    return {"trials": trials, "errors": errors, "mean_queries": Fraction(total, trials),
            "max_queries": worst, "delta": inst.delta,
            "expected_bound": 2 / inst.delta if inst.delta else None}


# -- vector in subspace --------------------------------------------------------------------

def _levels(n: int) -> int:
    k = n.bit_length() - 1
    if n < 2 or 1 << k != n:
        raise ValueError("n must be a power of two")
    return k


@dataclass(frozen=True)
class VisInstance:
    """A vector-in-subspace instance with Bob's partial-sum encoding.

    ``H_int`` holds ``n/2`` basis vectors (columns) with entries ``k * 2**-b``;
    ``tree`` lists conditionals level by level (root first), each the integer
    ``k`` standing for ``k / (2**b - 1)``; ``signs`` has 1 for negative entries.
    With ``b = None`` everything is kept in floating point (no rounding).
    """

    n: int
    b: int | None
    side: str
    seed: int | None
    H_int: np.ndarray
    v_exact: np.ndarray
    v_int: np.ndarray | None
    tree: tuple
    signs: tuple[int, ...]

    @property
    def levels(self) -> int:
        return _levels(self.n)

    @property
    def H(self) -> np.ndarray:
        return self.H_int if self.b is None else self.H_int / float(1 << self.b)

    @property
    def encoding_size(self) -> tuple[int, int]:
        return len(self.tree), len(self.signs)

    def probability(self, k) -> float:
        return float(k) if self.b is None else k / ((1 << self.b) - 1)

    def bob_bits(self) -> tuple[int, int]:
        """Bob's string as an integer and its width: b bits per conditional, then the signs."""
        if self.b is None:
            raise ValueError("the unrounded encoding has no bit string")
        bits, pos = 0, 0
        for k in self.tree:
            bits |= int(k) << pos
            pos += self.b
        for s in self.signs:
            bits |= s << pos
            pos += 1
        return bits, pos

    def to_dict(self) -> dict:
        out = {"n": self.n, "b": self.b, "side": self.side, "seed": self.seed,
               "tree": [int(k) if self.b is not None else float(k) for k in self.tree],
               "signs": list(self.signs)}
        if self.b is not None:
            out["H"] = [[int(v) for v in row] for row in self.H_int]
            out["v"] = [int(v) for v in self.v_int]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def encode_vector(v: np.ndarray, b: int | None):
    """Conditional-probability tree (MSB of the index first) and sign bits of ``v``."""
    n = len(v)
    L = _levels(n)
    p = np.asarray(v, dtype=float) ** 2
    p = p / p.sum()
    tree = []
    for level in range(L):
        width = n >> level                      # subtree size at this level
        for node in range(1 << level):
            block = p[node * width:(node + 1) * width]
            tot = block.sum()
            cond = block[: width // 2].sum() / tot if tot > 0 else 1.0
            if b is None:
                tree.append(float(cond))
            else:
                scale = (1 << b) - 1
                tree.append(int(round(cond * scale)))
    signs = tuple(int(x < 0) for x in v)
    return tuple(tree), signs


def _discretise(a: np.ndarray, b: int) -> np.ndarray:
    return np.rint(a * (1 << b)).astype(np.int64)


def vis_instance_from(H: np.ndarray, v: np.ndarray, b: int | None, side: str,
                      seed: int | None = None) -> VisInstance:
    n = len(v)
    _levels(n)
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    tree, signs = encode_vector(v, b)
    if b is None:
        return VisInstance(n, None, side, seed, np.asarray(H, dtype=float), v, None, tree, signs)
    return VisInstance(n, b, side, seed, _discretise(np.asarray(H), b), v, _discretise(v, b),
                       tree, signs)


def vis_build_instance(n: int, b: int | None = 8, side: str = "in-H", seed: int = 0,
                       retries: int = 20) -> VisInstance:
    """Seeded random instance: ``H`` from a random rotation, ``v`` uniform in ``H`` or its complement."""
    _levels(n)
    if not 4 <= n <= 64:
        raise CapError("vis_build_instance needs 4 <= n <= 64")
    if b is not None and not 1 <= b <= 16:
        raise CapError("precision must be 1..16 bits")
    if side not in ("in-H", "in-H-perp"):
        raise ValueError("side must be in-H or in-H-perp")
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    H, Hp = Q[:, : n // 2], Q[:, n // 2:]
    for _ in range(retries):
        basis = H if side == "in-H" else Hp
        v = basis @ rng.standard_normal(n // 2)
        if b is None or _discretise(v / np.linalg.norm(v), b).any():
            return vis_instance_from(H, v, b, side, seed)
    raise RuntimeError("could not sample a non-degenerate vector")


def decode_magnitudes(tree, n: int, prob) -> np.ndarray:
    """``|v_i|`` from the conditional tree (``prob`` maps stored entries to probabilities)."""
    L = _levels(n)
    amp = np.ones(1, dtype=float)
    offset = 0
    for level in range(L):
        conds = np.array([prob(k) for k in tree[offset: offset + (1 << level)]])
        offset += 1 << level
        nxt = np.empty(2 * len(amp))
        nxt[0::2] = amp * np.sqrt(np.clip(conds, 0.0, 1.0))
        nxt[1::2] = amp * np.sqrt(np.clip(1.0 - conds, 0.0, 1.0))
        amp = nxt
    return amp


def reconstruct_state(inst: VisInstance, read=None) -> np.ndarray:
    """State built level by level from Bob's conditionals, signed at the leaves."""
    tree, signs = inst.tree, inst.signs
    if read is not None:
        tree, signs = read_encoding(inst, read)
    mags = decode_magnitudes(tree, inst.n, inst.probability)
    state = np.where(np.array(signs) == 1, -mags, mags)
    return state / np.linalg.norm(state)


def read_encoding(inst: VisInstance, read):
    """Read the whole encoding bit by bit through ``read(i)`` (1-based positions)."""
    b = inst.b
    tree = []
    pos = 1
    for _ in range(inst.n - 1):
        k = 0
        for t in range(b):
            k |= read(pos) << t
            pos += 1
        tree.append(k)
    signs = []
    for _ in range(inst.n):
        signs.append(read(pos))
        pos += 1
    return tuple(tree), tuple(signs)


def fidelity(inst: VisInstance) -> float:
    """Squared overlap of the reconstructed state with the unrounded ``v``."""
    return float(np.dot(reconstruct_state(inst), inst.v_exact) ** 2)


@dataclass(frozen=True)
class VisVerdict:
    verdict: str
    probability_queries: int
    bit_queries: int
    projection_mass: float
    classical_bit_reads: int
    constant: Fraction            # bit_queries / ceil(log2 n)**2

    def astuple(self):
        return self.verdict, self.probability_queries, self.bit_queries


def vis_alice_decide(inst: VisInstance, bob=None) -> VisVerdict:
    """Build the state, project onto Alice's subspace, answer in-H iff the mass is at least 1/2."""
    reads = 0
    if bob is not None and inst.b is not None:
        counter = BobOracle(bob, inst.bob_bits()[1]) if isinstance(bob, int) else bob
        state = reconstruct_state(inst, counter)
        reads = getattr(counter, "count", 0)
    else:
        state = reconstruct_state(inst)
    basis, _ = np.linalg.qr(inst.H)
    mass = float(np.sum((basis.T @ state) ** 2))
    L = inst.levels
    pq = L
    bq = pq * (inst.b or 0)
    return VisVerdict("in-H" if mass >= 0.5 else "in-H-perp", pq, bq, mass, reads,
                      Fraction(bq, L * L))
