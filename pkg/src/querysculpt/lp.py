"""Exact rational simplex for small packing LPs.

Solves ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0``, so the slack basis
is feasible from the start and no phase one is needed.  All arithmetic is in
``Fraction``; Bland's rule guarantees termination.  Besides the primal optimum
the solver returns the dual solution read off the slack columns of the final
objective row, which lets callers certify optimality independently.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class Unbounded(ArithmeticError):
    """The LP objective is unbounded above."""


@dataclass
class LPResult:
    value: Fraction
    x: list[Fraction]
    y: list[Fraction]
    pivots: int


def solve_packing(A: Sequence[Sequence], b: Sequence, c: Sequence) -> LPResult:
    """Maximise ``c.x`` subject to ``A x <= b``, ``x >= 0`` (needs ``b >= 0``)."""
    m = len(A)
    nvar = len(c)
    if any(len(row) != nvar for row in A) or len(b) != m:
        raise ValueError("inconsistent LP dimensions")
    bb = [Fraction(v) for v in b]
    if any(v < 0 for v in bb):
        raise ValueError("right-hand side must be nonnegative")
    width = nvar + m
    # rows: coefficients over structural + slack columns, rhs last
    rows = []
    for i, row in enumerate(A):
        r = [Fraction(v) for v in row] + [ZERO] * m + [bb[i]]
        r[nvar + i] = ONE
        rows.append(r)
    # objective row holds reduced costs -c (minimise -z form), value last
    obj = [-Fraction(v) for v in c] + [ZERO] * m + [ZERO]
    basis = [nvar + i for i in range(m)]
    pivots = 0
    while True:
        enter = next((j for j in range(width) if obj[j] < 0), None)
        if enter is None:
            break
        leave = None
        best = None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = rows[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            raise Unbounded("objective unbounded")
        prow = rows[leave]
        piv = prow[enter]
        if piv != 1:
            prow = [v / piv for v in prow]
            rows[leave] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for i in range(m):
            if i != leave:
                fac = rows[i][enter]
                if fac:
                    r = rows[i]
                    for j in nz:
                        r[j] -= fac * prow[j]
        fac = obj[enter]
        for j in nz:
            obj[j] -= fac * prow[j]
        basis[leave] = enter
        pivots += 1
    x = [ZERO] * nvar
    for i, j in enumerate(basis):
        if j < nvar:
            x[j] = rows[i][-1]
    y = [obj[nvar + i] for i in range(m)]
    return LPResult(obj[-1], x, y, pivots)


def check_packing_certificate(A, b, c, x, y) -> Fraction:
    """Verify primal/dual feasibility and equal objectives; return the value.

    Raises ``AssertionError`` on any violation, so a returned value is certified
    optimal by weak duality.
    """
    m, nvar = len(A), len(c)
    for j in range(nvar):
        assert x[j] >= 0, "negative primal"
    for i in range(m):
        assert y[i] >= 0, "negative dual"
        assert sum(Fraction(A[i][j]) * x[j] for j in range(nvar)) <= b[i], "primal infeasible"
    for j in range(nvar):
        assert sum(Fraction(A[i][j]) * y[i] for i in range(m)) >= c[j], "dual infeasible"
    pv = sum(Fraction(c[j]) * x[j] for j in range(nvar))
    dv = sum(Fraction(b[i]) * y[i] for i in range(m))
    assert pv == dv, f"duality gap {pv} != {dv}"
    return pv
