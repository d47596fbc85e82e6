"""Allocations, prices and alpha-endowed equilibrium checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

from .valuations import (
    MAX_CHECK_ITEMS,
    Endowed,
    InvalidBundle,
    Valuation,
    ValuationError,
    full,
    is_monotone,
    is_normalized,
    items_of,
    rational,
)

UNALLOCATED = -1


@dataclass(frozen=True)
class Instance:
    valuations: tuple[Valuation, ...]
    label: str = ""
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "valuations", tuple(self.valuations))
        if not self.valuations:
            raise ValuationError("an instance needs at least one player")
        ms = {v.m for v in self.valuations}
        if len(ms) != 1:
            raise ValuationError(f"players disagree on the item count: {sorted(ms)}")
        if self.check and self.m <= MAX_CHECK_ITEMS:
            for i, v in enumerate(self.valuations):
                if not is_normalized(v):
                    raise ValuationError(f"player {i}: valuation is not normalized")
                if not is_monotone(v):
                    raise ValuationError(f"player {i}: valuation is not monotone")

    @property
    def m(self) -> int:
        return self.valuations[0].m

    @property
    def n(self) -> int:
        return len(self.valuations)

    def __getitem__(self, i) -> Valuation:
        return self.valuations[i]


@dataclass(frozen=True)
class Allocation:
    """Per-item owner list; ``-1`` marks an unallocated item."""

    owners: tuple[int, ...]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "owners", tuple(int(o) for o in self.owners))
        for j, o in enumerate(self.owners):
            if not (o == UNALLOCATED or 0 <= o < self.n):
                raise ValueError(f"item {j} has owner {o}, expected -1 or 0..{self.n - 1}")

    @classmethod
    def from_bundles(cls, bundles: Sequence[int], m: int) -> "Allocation":
        owners = [UNALLOCATED] * m
        for i, s in enumerate(bundles):
            if s >> m:
                raise InvalidBundle(f"bundle {s:#b} uses items outside 0..{m - 1}")
            for j in items_of(s):
                if owners[j] != UNALLOCATED:
                    raise ValueError(f"item {j} assigned to players {owners[j]} and {i}")
                owners[j] = i
        return cls(tuple(owners), len(bundles))

    @classmethod
    def empty(cls, n: int, m: int) -> "Allocation":
        return cls((UNALLOCATED,) * m, n)

    @property
    def m(self) -> int:
        return len(self.owners)

    @property
    def bundles(self) -> tuple[int, ...]:
        out = [0] * self.n
        for j, o in enumerate(self.owners):
            if o != UNALLOCATED:
                out[o] |= 1 << j
        return tuple(out)

    @property
    def unallocated(self) -> int:
        return sum(1 << j for j, o in enumerate(self.owners) if o == UNALLOCATED)

    def is_full(self) -> bool:
        return UNALLOCATED not in self.owners

    def move(self, item: int, to: int) -> "Allocation":
        owners = list(self.owners)
        owners[item] = to
        return Allocation(tuple(owners), self.n)

    def __str__(self):
        return "(" + ", ".join("{" + ",".join(map(str, items_of(s))) + "}" for s in self.bundles) + ")"


def _check_fits(inst: Instance, alloc: Allocation) -> None:
    if alloc.m != inst.m or alloc.n != inst.n:
        raise ValueError(f"allocation is {alloc.n}x{alloc.m}, instance is {inst.n}x{inst.m}")


def as_prices(prices: Sequence, m: int) -> tuple[Fraction, ...]:
    p = tuple(rational(x) for x in prices)
    if len(p) != m:
        raise ValueError(f"expected {m} prices, got {len(p)}")
    if any(x < 0 for x in p):
        raise ValueError("prices must be nonnegative")
    return p


def price_sums(prices: Sequence[Fraction], m: int) -> list[Fraction]:
    """``out[T] = sum of prices of T`` for every bundle, by low-bit recursion."""
    out = [Fraction(0)] * (1 << m)
    for t in range(1, 1 << m):
        low = t & -t
        out[t] = out[t ^ low] + prices[low.bit_length() - 1]
    return out


def profit(v: Valuation, t: int, prices: Sequence) -> Fraction:
    return v.eval(t) - sum((rational(prices[j]) for j in items_of(t)), Fraction(0))


def _profits(v: Valuation, psum: list[Fraction]) -> list[Fraction]:
    return [v.eval(t) - psum[t] for t in range(len(psum))]


def demand_set(v: Valuation, prices: Sequence) -> list[int]:
    """Every profit-maximizing bundle, ascending by bitmask."""
    p = as_prices(prices, v.m)
    prof = _profits(v, price_sums(p, v.m))
    best = max(prof)
    return [t for t, x in enumerate(prof) if x == best]


def welfare(inst: Instance, alloc: Allocation) -> Fraction:
    _check_fits(inst, alloc)
    return sum((v.eval(s) for v, s in zip(inst.valuations, alloc.bundles)), Fraction(0))


@dataclass(frozen=True)
class Certificate:
    allocation: Allocation
    prices: tuple[Fraction, ...]
    alpha: Fraction
    valid: bool
    witness: Optional[dict] = None

    def __bool__(self):
        return self.valid

    def to_dict(self) -> dict:
        w = None
        if self.witness is not None:
            w = dict(self.witness)
            if "bundle" in w:
                w["bundle"] = items_of(w["bundle"])
            for key in ("gain", "price"):
                if key in w:
                    w[key] = _fmt(w[key])
        return {
            "verdict": "valid" if self.valid else "invalid",
            "allocation": list(self.allocation.owners),
            "prices": [_fmt(p) for p in self.prices],
            "alpha": _fmt(self.alpha),
            "witness": w,
        }


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def verify_endowed_equilibrium(inst: Instance, alloc: Allocation, prices: Sequence,
                               alpha) -> Certificate:
    """Check both equilibrium conditions for the endowed instance, exactly.

    Ties never invalidate: a player only objects to a bundle with strictly
    higher endowed profit.  On failure the witness is either the first
    unallocated item with a positive price or, for the first unhappy player,
    the smallest (by bitmask) profit-maximizing bundle.
    """
    _check_fits(inst, alloc)
    alpha = rational(alpha)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    p = as_prices(prices, inst.m)
    for j, o in enumerate(alloc.owners):
        if o == UNALLOCATED and p[j] != 0:
            return Certificate(alloc, p, alpha, False,
                               {"kind": "priced_unallocated", "item": j, "price": p[j]})
    psum = price_sums(p, inst.m)
    for i, (v, s) in enumerate(zip(inst.valuations, alloc.bundles)):
        prof = _profits(Endowed(v, s, alpha), psum)
        best = max(prof)
        if prof[s] < best:
            t = prof.index(best)
            return Certificate(alloc, p, alpha, False,
                               {"kind": "deviation", "player": i, "bundle": t,
                                "gain": best - prof[s]})
    return Certificate(alloc, p, alpha, True)


# ---------------------------------------------------------------- maximality


@dataclass(frozen=True)
class MarginalProfile:
    q: tuple[Fraction, ...]
    zero: int  # bundle of items with q_j == 0


def marginal_profile(inst: Instance, alloc: Allocation) -> MarginalProfile:
    _check_fits(inst, alloc)
    bundles = alloc.bundles
    q = []
    for j, o in enumerate(alloc.owners):
        if o == UNALLOCATED:
            q.append(Fraction(0))
        else:
            s = bundles[o]
            q.append(inst[o].marginal(1 << j, s & ~(1 << j)))
    zero = sum(1 << j for j, x in enumerate(q) if x == 0)
    return MarginalProfile(tuple(q), zero)


def is_maximal(inst: Instance, alloc: Allocation) -> bool:
    z = marginal_profile(inst, alloc).zero
    return all(v.eval(s | z) == v.eval(s) for v, s in zip(inst.valuations, alloc.bundles))


@dataclass(frozen=True)
class Support:
    prices: tuple[Fraction, ...]
    alpha: Fraction


def support_construct(inst: Instance, alloc: Allocation) -> Optional[Support]:
    """Prices and alpha supporting a maximal allocation, or None if not maximal.

    Items with positive marginal contribution cost ``2 * OPTbar`` where
    ``OPTbar = n * max_i v_i(M)``; the rest are free; ``alpha = 20 m OPTbar /
    min q_j``.  When no item has positive contribution, zero prices work for
    any alpha and 2 is returned.
    """
    if not is_maximal(inst, alloc):
        return None
    prof = marginal_profile(inst, alloc)
    positive = [x for x in prof.q if x > 0]
    m = inst.m
    if not positive:
        return Support((Fraction(0),) * m, Fraction(2))
    opt_bar = inst.n * max(v.eval(full(m)) for v in inst.valuations)
    prices = tuple(Fraction(0) if (prof.zero >> j) & 1 else 2 * opt_bar for j in range(m))
    alpha = Fraction(20 * m) * opt_bar / min(positive)
    return Support(prices, alpha)


def greedy_maximal(inst: Instance) -> Allocation:
    """Each player in turn takes every remaining item, then sheds zero-marginal items.

    Items are shed one at a time in ascending index order, rescanning until
    every kept item has positive marginal value; leftovers stay unallocated.
    """
    m = inst.m
    remaining = full(m)
    bundles = []
    for v in inst.valuations:
        s = remaining
        changed = True
        while changed:
            changed = False
            for j in items_of(s):
                if v.eval(s) == v.eval(s & ~(1 << j)):
                    s &= ~(1 << j)
                    changed = True
        bundles.append(s)
        remaining &= ~s
    return Allocation.from_bundles(bundles, m)


def all_allocations(n: int, m: int, partial: bool = True):
    """Every allocation of m items to n players (optionally leaving items out)."""
    choices = range(-1 if partial else 0, n)
    for owners in product(choices, repeat=m):
        yield Allocation(owners, n)
