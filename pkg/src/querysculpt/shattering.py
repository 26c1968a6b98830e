"""Index sets shattered by a collection of strings.

``A`` is shattered by ``S`` when the projections of ``S`` onto ``A`` realise all
``2**|A|`` patterns.  Every subset of a shattered set is shattered, so a
depth-first search that only extends shattered sets (indices ascending) still
reaches every shattered set, and finds the lexicographically first one of any
size.  A set of size ``ceil(log|S| / log(n+1))`` always exists.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import CapError, fmt_input

NODE_BUDGET = 10 ** 7


class ShatterBudgetExceeded(RuntimeError):
    """The search gave up before finding or ruling out a witness."""


class NoShatteredSet(LookupError):
    """The search finished and no shattered set of the requested size exists."""


class GuaranteeViolated(AssertionError):
    """The search failed below the size that always exists (an internal bug)."""


def guaranteed_size(size: int, n: int) -> int:
    """Least integer ``a`` with ``(n+1)**a >= size``, i.e. ``ceil(log size / log(n+1))``."""
    if size < 1:
        raise ValueError("empty collection")
    a = 0
    while (n + 1) ** a < size:
        a += 1
    return a


def project(S: np.ndarray, positions: tuple[int, ...]) -> np.ndarray:
    """Pattern of each string on ``positions`` (0-based); pattern bit k = position k."""
    out = np.zeros(S.shape, dtype=np.int64)
    for k, p in enumerate(positions):
        out |= ((S >> p) & 1) << k
    return out


def is_shattered(S, positions) -> bool:
    S = np.asarray(list(S), dtype=np.int64)
    positions = tuple(positions)
    if len(positions) > 62 or (1 << len(positions)) > len(S):
        return False
    return len(np.unique(project(S, positions))) == 1 << len(positions)


@dataclass(frozen=True)
class ShatterWitness:
    n: int
    indices: tuple[int, ...]                 # 1-based
    projection_table: tuple[tuple[int, int], ...]  # (pattern, member realising it)

    @property
    def size(self) -> int:
        return len(self.indices)

    def verify(self, S) -> bool:
        members = set(int(s) for s in S)
        pos = [i - 1 for i in self.indices]
        seen = set()
        for pat, y in self.projection_table:
            if y not in members:
                return False
            if sum(((y >> p) & 1) << k for k, p in enumerate(pos)) != pat:
                return False
            seen.add(pat)
        return seen == set(range(1 << len(pos)))

    def to_dict(self) -> dict:
        k = len(self.indices)
        return {
            "n": self.n,
            "indices": list(self.indices),
            "projection_table": {fmt_input(p, k) if k else "": fmt_input(y, self.n)
                                 for p, y in self.projection_table},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _witness(S: np.ndarray, n: int, positions: tuple[int, ...]) -> ShatterWitness:
    pats = project(S, positions)
    table = {}
    for s, p in zip(S.tolist(), pats.tolist()):
        table.setdefault(p, s)
    return ShatterWitness(n, tuple(p + 1 for p in positions), tuple(sorted(table.items())))


def find_shattered_set(S, n: int, target_size: int | None = None,
                       node_budget: int = NODE_BUDGET) -> ShatterWitness:
    """First shattered index set (lexicographic DFS) of the requested size.

    Without ``target_size`` the guaranteed size is used.
    """
    S = np.unique(np.asarray(list(S), dtype=np.int64))
    if len(S) == 0:
        raise ValueError("S must be nonempty")
    if n < 1:
        raise ValueError("need n >= 1")
    g = guaranteed_size(len(S), n)
    k = g if target_size is None else target_size
    if k == 0:
        return _witness(S, n, ())
    if (1 << k) > len(S) or k > n:
        raise NoShatteredSet(f"no set of size {k} can be shattered by {len(S)} strings")
    nodes = 0

    def dfs(chosen: tuple[int, ...], pats: np.ndarray):
        nonlocal nodes
        if len(chosen) == k:
            return chosen
        start = chosen[-1] + 1 if chosen else 0
        for p in range(start, n - (k - len(chosen)) + 1):
            nodes += 1
            if nodes > node_budget:
                raise ShatterBudgetExceeded(f"node budget {node_budget} exhausted")
            q = pats | (((S >> p) & 1) << len(chosen))
            if len(np.unique(q)) == 1 << (len(chosen) + 1):
                found = dfs(chosen + (p,), q)
                if found is not None:
                    return found
        return None

    try:
        found = dfs((), np.zeros(len(S), dtype=np.int64))
    except ShatterBudgetExceeded:
        if k <= g:
            raise GuaranteeViolated(f"budget exhausted below the guaranteed size {g}") from None
        raise
    if found is None:
        if k <= g:
            raise GuaranteeViolated(f"no shattered set of size {k} <= guarantee {g}")
        raise NoShatteredSet(f"no shattered set of size {k}")
    return _witness(S, n, found)


def max_shattered_size(S, n: int) -> int:
    """Exact size of the largest shattered set (level-wise, subset-closed pruning)."""
    if n > 16:
        raise CapError("max_shattered_size: n > 16")
    S = np.unique(np.asarray(list(S), dtype=np.int64))
    if len(S) > 1 << 14:
        raise CapError("max_shattered_size: |S| > 2^14")
    level = {()}
    d = 0
    while level:
        nxt = set()
        for A in sorted(level):
            start = A[-1] + 1 if A else 0
            for p in range(start, n):
                B = A + (p,)
                if (1 << len(B)) > len(S):
                    continue
                # every subset of a shattered set is shattered
                if any(B[:i] + B[i + 1:] not in level for i in range(len(B) - 1)):
                    continue
                if is_shattered(S, B):
                    nxt.add(B)
        if nxt:
            d += 1
        level = nxt
    return d


def sauer_shelah_bound(n: int, d: int) -> int:
    return sum(math.comb(n, i) for i in range(d + 1))


def shattered_subsets_ok(S, witness: ShatterWitness) -> bool:
    """Spot check of downward closure: all subsets of the witness are shattered."""
    pos = [i - 1 for i in witness.indices]
    return all(is_shattered(S, c) for r in range(len(pos) + 1) for c in combinations(pos, r))
