"""Configuration LP, integrality and endowment gaps, all in exact arithmetic."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .equilibrium import (
    Allocation,
    Instance,
    all_allocations,
    is_maximal,
    welfare,
)
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, maximize
from .valuations import (
    MAX_CHECK_ITEMS,
    Endowed,
    Perturbed,
    SizeError,
    full,
    is_subadditive,
    items_of,
    rational,
    submasks,
)

MAX_LP_ITEMS = 14
MAX_ENUM_ALLOCATIONS = 10**6
MAX_INTEGRAL_STATES = 10**7


def _require_lp_size(inst: Instance) -> None:
    if inst.m > MAX_LP_ITEMS:
        raise SizeError(f"configuration LP is limited to m <= {MAX_LP_ITEMS}, got {inst.m}")


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class FractionalSolution:
    weights: dict  # (player, bundle) -> positive Fraction
    value: Fraction

    def objective(self, inst: Instance) -> Fraction:
        return sum((w * inst[i].eval(s) for (i, s), w in self.weights.items()), Fraction(0))

    def is_feasible(self, n: int, m: int) -> bool:
        if any(w < 0 for w in self.weights.values()):
            return False
        items = [Fraction(0)] * m
        bidders = [Fraction(0)] * n
        for (i, s), w in self.weights.items():
            bidders[i] += w
            for j in items_of(s):
                items[j] += w
        return all(x <= 1 for x in items) and all(x <= 1 for x in bidders)

    def to_dict(self) -> dict:
        return {
            "value": _fmt(self.value),
            "weights": [{"player": i, "bundle": items_of(s), "weight": _fmt(w)}
                        for (i, s), w in sorted(self.weights.items())],
        }


def _reducible(keys, s: int) -> bool:
    """True when dropping some item of ``s`` leaves its key unchanged."""
    k = keys[s]
    rest = s
    while rest:
        low = rest & -rest
        if keys[s ^ low] == k:
            return True
        rest ^= low
    return False


def _columns(inst: Instance, key=None):
    """Nonempty bundles per player that no strict sub-bundle can stand in for.

    ``key(i)`` maps a bundle to whatever the column contributes (its value by
    default).  If removing an item leaves that unchanged, moving the weight
    to the smaller bundle keeps feasibility and the objective, so such
    columns, and zero-contribution ones, never matter.
    """
    cols = []
    for i, v in enumerate(inst.valuations):
        f = key(i) if key else v.eval
        keys = [f(s) for s in range(1 << inst.m)]
        for s in range(1, 1 << inst.m):
            if not _reducible(keys, s):
                cols.append((i, s))
    return cols


def _packing_rows(cols, n: int, m: int):
    """Item rows then bidder rows of the configuration LP, over ``cols``."""
    rows = []
    for j in range(m):
        rows.append([1 if (s >> j) & 1 else 0 for _, s in cols])
    for i in range(n):
        rows.append([1 if ci == i else 0 for ci, _ in cols])
    return rows


def solve_config_lp(inst: Instance) -> FractionalSolution:
    """Maximum fractional welfare over the configuration LP (exact simplex)."""
    _require_lp_size(inst)
    cols = _columns(inst)
    if not cols:
        return FractionalSolution({}, Fraction(0))
    c = [inst[i].eval(s) for i, s in cols]
    A = _packing_rows(cols, inst.n, inst.m)
    res = maximize(c, A, [1] * len(A))
    assert res.status == OPTIMAL, res.status
    weights = {col: w for col, w in zip(cols, res.x) if w != 0}
    return FractionalSolution(weights, res.value)


def integral_opt(inst: Instance) -> tuple[Fraction, Allocation]:
    """Best integral welfare, by exhaustive dynamic programming over item subsets.

    ``best_i(R)`` is the best welfare of players ``0..i`` using items of ``R``;
    every split of every ``R`` is examined, so partial allocations are
    covered as well.
    """
    n, m = inst.n, inst.m
    if n * 3 ** m > MAX_INTEGRAL_STATES:
        raise SizeError(f"integral optimum enumeration too large for n={n}, m={m}")
    top = full(m)
    prev = [Fraction(0)] * (1 << m)
    choice = []
    for v in inst.valuations:
        cur = [Fraction(0)] * (1 << m)
        pick = [0] * (1 << m)
        for r in range(1 << m):
            best, arg = None, 0
            for t in submasks(r):
                val = v.eval(t) + prev[r & ~t]
                if best is None or val > best:
                    best, arg = val, t
            cur[r] = best
            pick[r] = arg
        choice.append(pick)
        prev = cur
    bundles = [0] * n
    r = top
    for i in range(n - 1, -1, -1):
        bundles[i] = choice[i][r]
        r &= ~bundles[i]
    return prev[top], Allocation.from_bundles(bundles, m)


def psi(inst: Instance, alloc: Allocation, x: FractionalSolution) -> Fraction:
    """Fractional mass weighted by the value of each bundle's overlap with the allocation."""
    bundles = alloc.bundles
    return sum((w * inst[i].eval(s & bundles[i]) for (i, s), w in x.weights.items()),
               Fraction(0))


def endowed_instance(inst: Instance, alloc: Allocation, alpha) -> Instance:
    return Instance(tuple(Endowed(v, s, alpha) for v, s in zip(inst.valuations, alloc.bundles)),
                    label=f"{inst.label} endowed", check=False)


def is_supported_lp(inst: Instance, alloc: Allocation, alpha) -> bool:
    """True iff the allocation is an optimal solution of the endowed instance's LP."""
    _require_lp_size(inst)
    e = endowed_instance(inst, alloc, alpha)
    return solve_config_lp(e).value == welfare(e, alloc)


def min_supporting_alpha(inst: Instance, alloc: Allocation, floor=1,
                         verify: bool = True) -> Optional[Fraction]:
    """Smallest alpha >= ``floor`` supporting the allocation, or None if none does.

    Supporting alpha is characterized by ``alpha * g(x) >= f(x)`` for every
    LP-feasible ``x``, with ``f = sum x (v(S) - v(S & A_i))`` and
    ``g = W(A) - sum x v(S & A_i)``.  The supremum of ``f/g`` is found with
    the Charnes-Cooper substitution ``y = t x``, ``t = 1/g``; an unbounded
    transformed LP means ``g`` reaches 0 while ``f`` stays positive, so no
    alpha works.  The supremum is always attained once finite, since the
    supporting set is closed.  With ``verify`` the answer is re-checked
    through the endowed LP and through explicit prices.
    """
    _require_lp_size(inst)
    floor = rational(floor)
    bundles = alloc.bundles
    w = welfare(inst, alloc)

    def key(i):
        t, own = inst[i].table, bundles[i]
        return lambda s: (t[s] - t[s & own], t[s & own])

    cols = _columns(inst, key)
    f = [inst[i].eval(s) - inst[i].eval(s & bundles[i]) for i, s in cols]
    a = [inst[i].eval(s & bundles[i]) for i, s in cols]

    if w == 0:
        # g vanishes identically; supportable iff no column has positive f
        return floor if not any(f) else None

    # t = (1 + a.y) / W is positive, so eliminating it leaves rows
    # (W A_r - a) y <= 1 with a slack-feasible start.
    on, off = [w - x for x in a], [-x for x in a]
    A = [[p if c else q for c, p, q in zip(row, on, off)]
         for row in _packing_rows(cols, inst.n, inst.m)]
    res = maximize(f, A, [1] * len(A))
    if res.status == UNBOUNDED:
        return None
    assert res.status == OPTIMAL, res.status
    alpha = max(floor, res.value)
    if verify:
        if not is_supported_lp(inst, alloc, alpha):
            raise AssertionError(f"alpha {alpha} failed the endowed LP check for {alloc}")
        if find_supporting_prices(inst, alloc, alpha) is None:
            raise AssertionError(f"alpha {alpha} admits no supporting prices for {alloc}")
    return alpha


def find_supporting_prices(inst: Instance, alloc: Allocation,
                           alpha) -> Optional[tuple[Fraction, ...]]:
    """A feasible price vector for the endowed equilibrium conditions, or None.

    Unallocated items are priced 0.  For each player and each bundle of
    allocated items ``T`` we require ``profit(S_i) >= profit(T u U)`` where
    ``U`` is the unallocated set; since adding unallocated items never
    lowers the endowed value, this covers every bundle.
    """
    _require_lp_size(inst)
    alpha = rational(alpha)
    m = inst.m
    free = alloc.unallocated
    priced = [j for j in range(m) if not (free >> j) & 1]
    pos = {j: k for k, j in enumerate(priced)}
    allocated = full(m) & ~free
    constraints: dict[tuple, Fraction] = {}
    for v, s in zip(inst.valuations, alloc.bundles):
        e = Endowed(v, s, alpha)
        base = e.eval(s)
        for t in submasks(allocated):
            rhs = base - e.eval(t | free)
            coef = [0] * len(priced)
            for j in items_of(s & ~t):
                coef[pos[j]] = 1
            for j in items_of(t & ~s):
                coef[pos[j]] = -1
            key = tuple(coef)
            if not any(key):
                if rhs < 0:
                    return None
                continue
            if key not in constraints or rhs < constraints[key]:
                constraints[key] = rhs
    p = [Fraction(0)] * m
    if constraints and priced:
        keys = sorted(constraints)
        res = maximize([0] * len(priced), [list(k) for k in keys], [constraints[k] for k in keys])
        if res.status == INFEASIBLE:
            return None
        for j, val in zip(priced, res.x):
            p[j] = val
    return tuple(p)


# ---------------------------------------------------------------- gap reports


@dataclass
class AllocationGap:
    allocation: Allocation
    welfare: Fraction
    psi: Fraction
    maximal: bool
    alpha: Optional[Fraction]  # None: no alpha supports it
    attained: Optional[bool] = None


@dataclass
class GapReport:
    lp_value: Fraction
    integral_opt: Fraction
    integrality_gap: Fraction
    endowment_gap: Optional[Fraction]  # None: unbounded (nothing is supportable)
    best_allocation: Optional[Allocation]
    allocations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "lp_value": _fmt(self.lp_value),
            "integral_opt": _fmt(self.integral_opt),
            "integrality_gap": _fmt(self.integrality_gap),
            "endowment_gap": None if self.endowment_gap is None else _fmt(self.endowment_gap),
            "best_allocation": None if self.best_allocation is None
            else list(self.best_allocation.owners),
            "allocations": [
                {"allocation": list(g.allocation.owners), "welfare": _fmt(g.welfare),
                 "psi": _fmt(g.psi), "maximal": g.maximal,
                 "alpha": None if g.alpha is None else _fmt(g.alpha),
                 "attained": g.attained}
                for g in self.allocations
            ],
        }

    def table(self) -> str:
        lines = [f"LP value {self.lp_value}   integral OPT {self.integral_opt}   "
                 f"integrality gap {self.integrality_gap}",
                 f"endowment gap {'unbounded' if self.endowment_gap is None else self.endowment_gap}"
                 f"   at {self.best_allocation}",
                 f"{'allocation':<28}{'welfare':>10}{'psi':>10}{'min alpha':>14}"]
        for g in self.allocations:
            a = "unsupportable" if g.alpha is None else str(g.alpha)
            lines.append(f"{str(g.allocation):<28}{str(g.welfare):>10}{str(g.psi):>10}{a:>14}")
        return "\n".join(lines)


def integrality_gap(lp_value: Fraction, opt: Fraction) -> Fraction:
    return Fraction(1) if opt == 0 else lp_value / opt


def endowment_gap_instance(inst: Instance, floor=1, include_unsupportable: bool = False,
                           verify: bool = False) -> GapReport:
    """Minimum supporting alpha over every allocation, with integrality data.

    Non-maximal allocations are recorded as unsupportable without an LP solve;
    pass ``include_unsupportable`` to keep them in the per-allocation list.
    """
    _require_lp_size(inst)
    n, m = inst.n, inst.m
    if (n + 1) ** m > MAX_ENUM_ALLOCATIONS:
        raise SizeError(f"{(n + 1) ** m} allocations exceed the enumeration cap")
    x = solve_config_lp(inst)
    opt, _ = integral_opt(inst)
    rows = []
    best, best_alloc = None, None
    for alloc in all_allocations(n, m):
        maximal = is_maximal(inst, alloc)
        alpha = min_supporting_alpha(inst, alloc, floor, verify=verify) if maximal else None
        if alpha is None and not include_unsupportable:
            continue
        attained = None
        if alpha is not None:
            attained = is_supported_lp(inst, alloc, alpha)
            if best is None or alpha < best:
                best, best_alloc = alpha, alloc
        rows.append(AllocationGap(alloc, welfare(inst, alloc), psi(inst, alloc, x),
                                  maximal, alpha, attained))
    return GapReport(x.value, opt, integrality_gap(x.value, opt), best, best_alloc, rows)


# ---------------------------------------------------------------- two-player rounding


@dataclass(frozen=True)
class RoundingResult:
    expected_welfare: Fraction
    best: Allocation
    bound: Fraction
    swapped: bool


def round_two_player_subadditive(inst: Instance, x: FractionalSolution) -> RoundingResult:
    """Derandomized rounding: player 1 draws ``S`` with probability ``x_{1,S}``, player 2 gets ``M - S``.

    Player 1 is whichever player has the larger fractional value.  Leftover
    probability mass gives player 1 nothing.  The exact expectation is
    checked against ``(1/2 + 1/(2m)) * sum x v``.
    """
    if inst.n != 2:
        raise ValueError(f"rounding needs exactly two players, got {inst.n}")
    if inst.m <= MAX_CHECK_ITEMS:
        for i, v in enumerate(inst.valuations):
            if not is_subadditive(v):
                raise ValueError(f"player {i} is not subadditive")
    if not x.is_feasible(2, inst.m):
        raise ValueError("fractional solution violates the LP constraints")
    m = inst.m
    top = full(m)
    share = [sum((w * inst[i].eval(s) for (i, s), w in x.weights.items() if i == p), Fraction(0))
             for p in (0, 1)]
    first = 0 if share[0] >= share[1] else 1
    second = 1 - first
    v1, v2 = inst[first], inst[second]
    support = [(s, w) for (i, s), w in x.weights.items() if i == first]
    rest = 1 - sum((w for _, w in support), Fraction(0))
    if rest > 0:
        support.append((0, rest))
    expected = Fraction(0)
    best_val, best_s = None, 0
    for s, w in sorted(support):
        val = v1.eval(s) + v2.eval(top & ~s)
        expected += w * val
        if best_val is None or val > best_val:
            best_val, best_s = val, s
    bundles = [0, 0]
    bundles[first], bundles[second] = best_s, top & ~best_s
    total = share[0] + share[1]
    bound = (Fraction(1, 2) + Fraction(1, 2 * m)) * total if m else total
    if expected < bound:
        raise AssertionError(f"rounding expectation {expected} below the bound {bound}")
    return RoundingResult(expected, Allocation.from_bundles(bundles, m), bound, first == 1)


# ---------------------------------------------------------------- perturbation


@dataclass(frozen=True)
class PerturbationReport:
    y: Fraction
    delta: Fraction
    eps: Fraction
    x_formula: Fraction
    x_gap: Fraction
    endowment_gap: Optional[Fraction]
    lower_bound: Fraction  # 1 / (2 - x)
    instance: Instance

    @property
    def ok(self) -> bool:
        gap_ok = self.endowment_gap is None or (
            self.endowment_gap > self.x_gap and self.endowment_gap >= self.lower_bound)
        return self.x_gap == self.x_formula and gap_ok

    def to_dict(self) -> dict:
        return {
            "y": _fmt(self.y), "delta": _fmt(self.delta), "eps": _fmt(self.eps),
            "x_formula": _fmt(self.x_formula), "x_gap": _fmt(self.x_gap),
            "endowment_gap": None if self.endowment_gap is None else _fmt(self.endowment_gap),
            "lower_bound": _fmt(self.lower_bound), "ok": self.ok,
        }


def perturb_instance(inst: Instance, eps) -> Instance:
    return Instance(tuple(Perturbed(v, eps) for v in inst.valuations),
                    label=f"{inst.label} perturbed")


def perturbation_gap_check(inst: Instance, delta) -> PerturbationReport:
    """Add ``|S| * eps`` to both players with ``eps = delta * LP / m`` and measure both gaps."""
    delta = rational(delta)
    if inst.n != 2:
        raise ValueError("perturbation check needs exactly two players")
    if delta <= 0:
        raise ValueError("delta must be positive")
    for i, v in enumerate(inst.valuations):
        if not is_subadditive(v):
            raise ValueError(f"player {i} is not subadditive")
    lp0 = solve_config_lp(inst).value
    opt0, _ = integral_opt(inst)
    if opt0 == 0 or lp0 == opt0:
        raise ValueError("instance has no integrality gap to amplify")
    y = lp0 / opt0
    eps = delta * lp0 / inst.m
    pert = perturb_instance(inst, eps)
    report = endowment_gap_instance(pert)
    x_formula = y * (1 + delta) / (1 + delta * y)
    return PerturbationReport(y, delta, eps, x_formula, report.integrality_gap,
                              report.endowment_gap, 1 / (2 - report.integrality_gap), pert)
