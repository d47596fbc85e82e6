"""Exact primal simplex over the rationals.

Solves ``max c.x  s.t.  A x <= b, x >= 0`` in dictionary form (rows are the
basic variables, columns the nonbasic ones).  The entering variable has the
most negative reduced cost; after a long run of degenerate pivots the solver
switches for good to Bland's rule, which cannot cycle.  Ties in the ratio
test go to the lowest label.  When
``b`` has negative entries an auxiliary variable ``x0`` is added to every row
and driven out first (the textbook two-phase scheme in dictionary form).

The tableau is kept fraction-free: every row is first scaled to integers and
pivots use the integer-preserving (Bareiss/Edmonds) update, so all entries are
Python ints over one shared positive denominator ``D``.  Row scaling changes
neither ratios nor signs, hence not the pivot sequence.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_AUX = -1  # label of the phase-one variable; lowest label so Bland prefers it
_STALL = 50  # consecutive degenerate pivots before switching to Bland's rule


@dataclass
class LPResult:
    status: str
    x: Optional[list[Fraction]] = None
    value: Optional[Fraction] = None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _exact(v):
    return v if isinstance(v, (int, Fraction)) else Fraction(v)


def _scale(values: Sequence) -> tuple[list[int], int]:
    """Integer multiples of ``values`` by the lcm of their denominators."""
    s = lcm(*(v.denominator for v in values if type(v) is not int))
    return [v * s if type(v) is int else v.numerator * (s // v.denominator) for v in values], s


class Dictionary:
    """Integer dictionary ``x_B + (T/D) x_N = rhs/D`` with objective row ``z - (d/D) x_N``.

    ``zrow`` holds ``-d`` numerators and ``zrhs`` the objective value
    numerator, both over ``D * zscale``.
    """

    def __init__(self, rows: list[list[int]], rhs: list[int], basic, nonbasic):
        self.rows = rows
        self.rhs = rhs
        self.basic = basic
        self.nonbasic = nonbasic
        self.D = 1
        self.zrow = [0] * len(nonbasic)
        self.zrhs = 0
        self.zscale = 1
        self.pivots = 0

    def pivot(self, r: int, k: int) -> None:
        prow = self.rows[r]
        a = prow[k]
        D = self.D
        prhs = self.rhs[r]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[k]
            if f:
                new = [(x * a - f * y) // D for x, y in zip(row, prow)]
                self.rhs[i] = (self.rhs[i] * a - f * prhs) // D
            else:
                new = [x * a // D for x in row]
                self.rhs[i] = self.rhs[i] * a // D
            new[k] = -f
            self.rows[i] = new
        f = self.zrow[k]
        if f:
            self.zrow = [(x * a - f * y) // D for x, y in zip(self.zrow, prow)]
            self.zrhs = (self.zrhs * a - f * prhs) // D
        else:
            self.zrow = [x * a // D for x in self.zrow]
            self.zrhs = self.zrhs * a // D
        self.zrow[k] = -f
        prow = list(prow)
        prow[k] = D
        self.rows[r] = prow
        self.D = a
        if a < 0:
            self._negate()
        self.basic[r], self.nonbasic[k] = self.nonbasic[k], self.basic[r]
        self.pivots += 1

    def _negate(self) -> None:
        self.rows = [[-x for x in row] for row in self.rows]
        self.rhs = [-x for x in self.rhs]
        self.zrow = [-x for x in self.zrow]
        self.zrhs = -self.zrhs
        self.D = -self.D

    def entering(self) -> Optional[int]:
        best = None
        for k, zk in enumerate(self.zrow):
            if zk < 0 and (best is None or self.nonbasic[k] < self.nonbasic[best]):
                best = k
        return best

    def leaving(self, k: int) -> Optional[int]:
        best = None
        for r, row in enumerate(self.rows):
            a = row[k]
            if a <= 0:
                continue
            if best is None:
                best = r
                continue
            lhs = self.rhs[r] * self.rows[best][k]
            rhs = self.rhs[best] * a
            if lhs < rhs or (lhs == rhs and self.basic[r] < self.basic[best]):
                best = r
        return best

    def steepest(self) -> Optional[int]:
        best = None
        for k, zk in enumerate(self.zrow):
            if zk < 0 and (best is None or zk < self.zrow[best]):
                best = k
        return best

    def optimize(self) -> str:
        # Dantzig's rule until a long degenerate stall, then Bland's rule,
        # which cannot cycle; cycling needs an endless degenerate run.
        stall = 0
        while True:
            k = self.entering() if stall >= _STALL else self.steepest()
            if k is None:
                return OPTIMAL
            r = self.leaving(k)
            if r is None:
                return UNBOUNDED
            if stall < _STALL:
                stall = stall + 1 if self.rhs[r] == 0 else 0
            self.pivot(r, k)

    def set_objective(self, c: Sequence[int], scale: int) -> None:
        """Install ``max c.x`` (integer ``c``, true objective ``c/scale``)."""
        n = len(c)
        D = self.D
        self.zscale = scale
        self.zrow = [-c[v] * D if 0 <= v < n else 0 for v in self.nonbasic]
        self.zrhs = 0
        for r, b in enumerate(self.basic):
            if 0 <= b < n and c[b]:
                cb = c[b]
                self.zrhs += cb * self.rhs[r]
                self.zrow = [z + cb * x for z, x in zip(self.zrow, self.rows[r])]

    def objective(self) -> Fraction:
        return Fraction(self.zrhs, self.D * self.zscale)

    def values(self, n: int) -> list[Fraction]:
        x = [Fraction(0)] * n
        for r, b in enumerate(self.basic):
            if 0 <= b < n:
                x[b] = Fraction(self.rhs[r], self.D)
        return x


def maximize(c: Sequence, A: Sequence[Sequence], b: Sequence) -> LPResult:
    """Maximize ``c.x`` subject to ``A x <= b`` and ``x >= 0``, exactly."""
    c = [_exact(v) for v in c]
    n = len(c)
    m = len(A)
    if len(b) != m:
        raise ValueError("right-hand side length does not match the constraint count")
    b = [_exact(v) for v in b]
    rows, rhs, scales = [], [], []
    for r, bv in zip(A, b):
        if len(r) != n:
            raise ValueError(f"constraint row has {len(r)} coefficients, expected {n}")
        scaled, s = _scale([_exact(v) for v in r] + [bv])
        rows.append(scaled[:-1])
        rhs.append(scaled[-1])
        scales.append(s)
    cz, cscale = _scale(c)

    basic = list(range(n, n + m))
    nonbasic = list(range(n))

    if any(v < 0 for v in rhs):
        for row, s in zip(rows, scales):
            row.append(-s)
        dic = Dictionary(rows, rhs, basic, nonbasic + [_AUX])
        k_aux = n
        dic.zrow = [0] * n + [1]  # maximize -x0
        worst = min(range(m), key=lambda r: (b[r], basic[r]))
        dic.pivot(worst, k_aux)
        status = dic.optimize()
        assert status == OPTIMAL  # the auxiliary objective is bounded by 0
        if dic.zrhs < 0:
            return LPResult(INFEASIBLE, pivots=dic.pivots)
        if _AUX in dic.basic:
            r = dic.basic.index(_AUX)
            k = next((k for k, a in enumerate(dic.rows[r]) if a != 0), None)
            if k is None:
                # x0 = 0 identically in this row; the row carries no constraint
                del dic.rows[r], dic.rhs[r], dic.basic[r]
            else:
                dic.pivot(r, k)
        if _AUX in dic.nonbasic:
            k = dic.nonbasic.index(_AUX)
            for row in dic.rows:
                del row[k]
            del dic.nonbasic[k]
            del dic.zrow[k]
    else:
        dic = Dictionary(rows, rhs, basic, nonbasic)

    dic.set_objective(cz, cscale)
    status = dic.optimize()
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, pivots=dic.pivots)
    return LPResult(OPTIMAL, dic.values(n), dic.objective(), dic.pivots)
