"""Brute-force ground truth at tiny arity.

Decision trees are nested tuples: a leaf is the int ``0`` or ``1`` and an
internal node is ``(j, t0, t1)`` querying variable ``x_{j+1}``.  Along any path
a variable is queried at most once, so on ``k`` free variables there are
``T(k) = 2 + k * T(k-1)**2`` trees.

Randomized query complexity is the value of a zero-sum game between a mixture
of trees and a distribution over inputs.  Both games are solved exactly in
rationals.  The LP for ``R`` keeps the input distribution as variables and adds
the best-responding tree as a new constraint until none is violated (row
generation).  The LP for ``R0`` keeps tree weights as variables and prices new
zero-error trees against the dual input weights (column generation).  Best
responses come from an exact dynamic program over subcubes, so the final
answer is the same as solving the LP over every tree at once; the full
enumeration is kept for cross-checks at n <= 2 and for counting.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .core import BooleanFunction, CapError, iter_bits
from .lp import solve_packing

ORACLE_CAP = 3
TWO_THIRDS = Fraction(2, 3)


# -- trees ----------------------------------------------------------------------

def tree_count(k: int, depth: int | None = None) -> int:
    """Number of trees on ``k`` free variables with depth at most ``depth``."""
    if depth is None:
        depth = k
    if k == 0 or depth == 0:
        return 2
    return 2 + k * tree_count(k - 1, depth - 1) ** 2


def enumerate_trees(n: int, depth: int | None = None, free: tuple[int, ...] | None = None):
    """Canonical order: leaves 0, 1; then query index ascending, 0-subtree outermost."""
    if free is None:
        free = tuple(range(n))
    if depth is None:
        depth = len(free)
    yield 0
    yield 1
    if depth == 0:
        return
    for j in free:
        rest = tuple(v for v in free if v != j)
        subs = list(enumerate_trees(n, depth - 1, rest))
        for t0 in subs:
            for t1 in subs:
                yield (j, t0, t1)


def evaluate(tree, x: int) -> tuple[int, int]:
    """(output, number of queries) of ``tree`` on input ``x``."""
    cost = 0
    while not isinstance(tree, int):
        j, t0, t1 = tree
        cost += 1
        tree = t1 if x >> j & 1 else t0
    return tree, cost


def tree_queries(tree, x: int) -> list[int]:
    out = []
    while not isinstance(tree, int):
        j, t0, t1 = tree
        out.append(j)
        tree = t1 if x >> j & 1 else t0
    return out


def tree_depth(tree) -> int:
    if isinstance(tree, int):
        return 0
    return 1 + max(tree_depth(tree[1]), tree_depth(tree[2]))


def is_zero_error(tree, f: BooleanFunction) -> bool:
    return all(evaluate(tree, x)[0] == f(x) for x in f.points())


@dataclass(frozen=True)
class TreeEnsemble:
    n: int
    depth: int
    trees: tuple

    @classmethod
    def build(cls, n: int, depth: int | None = None) -> "TreeEnsemble":
        if n > ORACLE_CAP:
            raise CapError(f"tree enumeration beyond n={ORACLE_CAP}")
        depth = n if depth is None else depth
        return cls(n, depth, tuple(enumerate_trees(n, depth)))

    @property
    def count(self) -> int:
        return len(self.trees)


# -- exact best responses over subcubes ----------------------------------------------

def _sub_points(f: BooleanFunction, mask: int, bits: int) -> list[int]:
    return [x for x in f.points() if x & mask == bits]


def best_tree_accuracy(f: BooleanFunction, weights: dict[int, Fraction], depth: int):
    """Depth-limited tree maximising ``sum_x w_x [tree(x) == f(x)]``: (score, tree)."""
    n = f.n
    memo = {}

    def go(mask, bits, d):
        key = (mask, bits, d)
        if key in memo:
            return memo[key]
        pts = _sub_points(f, mask, bits)
        w1 = sum((weights.get(x, 0) for x in pts if f(x)), Fraction(0))
        w0 = sum((weights.get(x, 0) for x in pts if not f(x)), Fraction(0))
        best = (w0, 0) if w0 >= w1 else (w1, 1)
        if d > 0 and pts:
            for j in range(n):
                if mask >> j & 1:
                    continue
                b = 1 << j
                s0, t0 = go(mask | b, bits, d - 1)
                s1, t1 = go(mask | b, bits | b, d - 1)
                if s0 + s1 > best[0]:
                    best = (s0 + s1, (j, t0, t1))
        memo[key] = best
        return best

    return go(0, 0, depth)


def best_zero_error_tree(f: BooleanFunction, weights: dict[int, Fraction]):
    """Zero-error tree minimising ``sum_x w_x cost(x)``: (score, tree)."""
    n = f.n
    memo = {}

    def go(mask, bits):
        key = (mask, bits)
        if key in memo:
            return memo[key]
        pts = _sub_points(f, mask, bits)
        vals = {f(x) for x in pts}
        if len(vals) <= 1:
            res = (Fraction(0), vals.pop() if vals else 0)
        else:
            here = sum((weights.get(x, 0) for x in pts), Fraction(0))
            res = None
            for j in range(n):
                if mask >> j & 1:
                    continue
                b = 1 << j
                s0, t0 = go(mask | b, bits)
                s1, t1 = go(mask | b, bits | b)
                cand = here + s0 + s1
                if res is None or cand < res[0]:
                    res = (cand, (j, t0, t1))
        memo[key] = res
        return res

    return go(0, 0)


# -- games ----------------------------------------------------------------------------

@dataclass(frozen=True)
class GameSolution:
    value: Fraction
    input_dist: dict[int, Fraction]
    tree_dist: tuple[tuple[object, Fraction], ...]
    rounds: int


def _check(f: BooleanFunction):
    if f.n > ORACLE_CAP:
        raise CapError(f"brute-force oracles need n <= {ORACLE_CAP}, got {f.n}")


def bounded_error_game(f: BooleanFunction, q: int) -> GameSolution:
    """Best worst-case success probability of a mixture of depth-<=q trees."""
    _check(f)
    pts = f.points()
    rows = [0, 1]
    rounds = 0
    while True:
        rounds += 1
        A = [[1 if evaluate(t, x)[0] == f(x) else 0 for x in pts] for t in rows]
        res = solve_packing(A, [1] * len(rows), [1] * len(pts))
        p = {x: v for x, v in zip(pts, res.x)}
        score, tree = best_tree_accuracy(f, p, q)
        if score <= 1:
            break
        rows.append(tree)
    total = res.value
    value = 1 / total
    dist = {x: v / total for x, v in p.items() if v}
    ysum = sum(res.y)
    trees = tuple((t, y / ysum) for t, y in zip(rows, res.y) if y)
    return GameSolution(value, dist, trees, rounds)


def brute_force_R(f: BooleanFunction, q: int | None = None):
    """With ``q``: the exact game value at depth ``q``.  Without: min q with value >= 2/3."""
    _check(f)
    if q is not None:
        return bounded_error_game(f, q).value
    for depth in range(f.n + 1):
        if bounded_error_game(f, depth).value >= TWO_THIRDS:
            return depth
    raise AssertionError("a full-depth deterministic tree always succeeds")


def zero_error_game(f: BooleanFunction) -> GameSolution:
    """Minimax expected cost of a mixture of zero-error trees (column generation)."""
    _check(f)
    pts = f.points()
    if f.is_constant:
        return GameSolution(Fraction(0), {}, ((f(pts[0]), Fraction(1)),), 0)
    uniform = {x: Fraction(1) for x in pts}
    cols = [best_zero_error_tree(f, uniform)[1]]
    rounds = 0
    while True:
        rounds += 1
        A = [[evaluate(t, x)[1] for t in cols] for x in pts]
        res = solve_packing(A, [1] * len(pts), [1] * len(cols))
        y = {x: v for x, v in zip(pts, res.y)}
        score, tree = best_zero_error_tree(f, y)
        if score >= 1:
            break
        cols.append(tree)
    total = res.value
    trees = tuple((t, v / total) for t, v in zip(cols, res.x) if v)
    ysum = sum(y.values())
    dist = {x: v / ysum for x, v in y.items() if v}
    return GameSolution(1 / total, dist, trees, rounds)


def brute_force_R0(f: BooleanFunction, *, support: bool = False):
    g = zero_error_game(f)
    return (g.value, g.tree_dist) if support else g.value


def game_value_full(f: BooleanFunction, q: int) -> Fraction:
    """Bounded-error game value with every depth-<=q tree as a constraint (n <= 2)."""
    if f.n > 2:
        raise CapError("full enumeration LP only at n <= 2")
    pts = f.points()
    trees = list(enumerate_trees(f.n, q))
    A = [[1 if evaluate(t, x)[0] == f(x) else 0 for x in pts] for t in trees]
    res = solve_packing(A, [1] * len(trees), [1] * len(pts))
    return 1 / res.value


def zero_error_value_full(f: BooleanFunction) -> Fraction:
    """Zero-error game with every zero-error tree as a column (n <= 2)."""
    if f.n > 2:
        raise CapError("full enumeration LP only at n <= 2")
    if f.is_constant:
        return Fraction(0)
    pts = f.points()
    trees = [t for t in enumerate_trees(f.n) if is_zero_error(t, f)]
    A = [[evaluate(t, x)[1] for t in trees] for x in pts]
    res = solve_packing(A, [1] * len(pts), [1] * len(trees))
    return 1 / res.value


# -- RC from the packing side over all sensitive blocks ----------------------------------------

def sensitive_blocks(f: BooleanFunction, x: int) -> tuple[int, ...]:
    return tuple(sorted(y ^ x for y in iter_bits(f.opposite(x))))


def _solve_square(M, rhs):
    """Exact Gaussian elimination; None if singular."""
    k = len(M)
    a = [list(map(Fraction, row)) + [Fraction(r)] for row, r in zip(M, rhs)]
    for c in range(k):
        piv = next((r for r in range(c, k) if a[r][c] != 0), None)
        if piv is None:
            return None
        a[c], a[piv] = a[piv], a[c]
        pv = a[c][c]
        a[c] = [v / pv for v in a[c]]
        for r in range(k):
            if r != c and a[r][c]:
                fac = a[r][c]
                a[r] = [v - fac * w for v, w in zip(a[r], a[c])]
    return [a[r][k] for r in range(k)]


@lru_cache(maxsize=4096)
def _packing_by_vertices(blocks: tuple[int, ...], n: int) -> Fraction:
    m = len(blocks)
    # constraints as (coefficients, rhs): load rows then nonnegativity rows
    cons = [([1 if b >> j & 1 else 0 for b in blocks], 1) for j in range(n)]
    cons += [([1 if k == i else 0 for k in range(m)], 0) for i in range(m)]
    best = Fraction(0)
    for tight in combinations(range(len(cons)), m):
        sol = _solve_square([cons[t][0] for t in tight], [cons[t][1] for t in tight])
        if sol is None or any(v < 0 for v in sol):
            continue
        if all(sum(c * v for c, v in zip(cons[j][0], sol)) <= 1 for j in range(n)):
            best = max(best, sum(sol))
    return best


def _packing_by_highs(blocks: tuple[int, ...], n: int) -> Fraction:
    import numpy as np
    from scipy.optimize import linprog

    A = np.array([[1.0 if b >> j & 1 else 0.0 for b in blocks] for j in range(n)])
    prim = linprog(-np.ones(len(blocks)), A_ub=A, b_ub=np.ones(n), bounds=(0, None), method="highs")
    dual = linprog(np.ones(n), A_ub=-A.T, b_ub=-np.ones(len(blocks)), bounds=(0, None), method="highs")
    if prim.status or dual.status:
        raise ArithmeticError("HiGHS failed on the packing LP")
    # rationalise both sides and certify optimality exactly
    u = [Fraction(float(v)).limit_denominator(1 << 12) for v in prim.x]
    w = [Fraction(float(v)).limit_denominator(1 << 12) for v in dual.x]
    ok = (all(v >= 0 for v in u + w)
          and all(sum(u[k] for k, b in enumerate(blocks) if b >> j & 1) <= 1 for j in range(n))
          and all(sum(w[j] for j in iter_bits(b)) >= 1 for b in blocks)
          and sum(u) == sum(w))
    if not ok:
        raise ArithmeticError("could not certify the HiGHS packing solution exactly")
    return sum(u)


def brute_force_rc(f: BooleanFunction, x: int) -> Fraction:
    """Fractional packing number of all sensitive blocks of ``x``, from the packing side."""
    blocks = sensitive_blocks(f, x)
    if not blocks:
        return Fraction(0)
    if f.n <= ORACLE_CAP:
        return _packing_by_vertices(blocks, f.n)
    if f.n <= 8:
        return _packing_by_highs(blocks, f.n)
    raise CapError("brute_force_rc needs n <= 8")
