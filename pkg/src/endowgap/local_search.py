"""Single-item-move local search and the marginal-price support at alpha = 2."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .equilibrium import (
    UNALLOCATED,
    Allocation,
    Certificate,
    Instance,
    all_allocations,
    verify_endowed_equilibrium,
)
from .valuations import MAX_CHECK_ITEMS, Check, is_submodular, rational


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class Move:
    item: int
    source: int
    target: int
    delta: Fraction

    def to_dict(self) -> dict:
        return {"item": self.item, "from": self.source, "to": self.target,
                "delta": f"{self.delta.numerator}/{self.delta.denominator}"}


@dataclass
class LocalSearchTrace:
    initial: Allocation
    final: Optional[Allocation] = None
    moves: list[Move] = field(default_factory=list)

    @property
    def move_count(self) -> int:
        return len(self.moves)

    def jsonl(self) -> str:
        return "".join(json.dumps(mv.to_dict(), sort_keys=True) + "\n" for mv in self.moves)


def _move_gain(inst: Instance, bundles, j: int, i: int, k: int) -> Fraction:
    bit = 1 << j
    vi, vk = inst[i], inst[k]
    return (vi.eval(bundles[i] & ~bit) + vk.eval(bundles[k] | bit)
            - vi.eval(bundles[i]) - vk.eval(bundles[k]))


def _first_improvement(inst: Instance, alloc: Allocation):
    bundles = alloc.bundles
    for j, i in enumerate(alloc.owners):
        for k in range(inst.n):
            if k == i:
                continue
            gain = _move_gain(inst, bundles, j, i, k)
            if gain > 0:
                return j, i, k, gain
    return None


def is_local_optimum(inst: Instance, alloc: Allocation) -> Check:
    """Full allocation with no strictly improving single-item reallocation.

    The witness is the first unallocated item, or the first improving move
    ``(item, from, to)`` in (item, destination) order.
    """
    for j, o in enumerate(alloc.owners):
        if o == UNALLOCATED:
            return Check(False, {"unallocated": j})
    hit = _first_improvement(inst, alloc)
    if hit is None:
        return Check(True)
    j, i, k, gain = hit
    return Check(False, {"item": j, "from": i, "to": k, "gain": gain})


def complete(inst: Instance, alloc: Allocation) -> Allocation:
    """Give each unallocated item to the player valuing it most on its own (lowest index on ties)."""
    owners = list(alloc.owners)
    for j, o in enumerate(owners):
        if o == UNALLOCATED:
            vals = [v.eval(1 << j) for v in inst.valuations]
            owners[j] = vals.index(max(vals))
    return Allocation(tuple(owners), alloc.n)


def local_search(inst: Instance, initial: Allocation) -> tuple[Allocation, LocalSearchTrace]:
    cur = complete(inst, initial)
    trace = LocalSearchTrace(initial)
    while True:
        hit = _first_improvement(inst, cur)
        if hit is None:
            break
        j, i, k, gain = hit
        cur = cur.move(j, k)
        trace.moves.append(Move(j, i, k, gain))
    trace.final = cur
    return cur, trace


def _require_full(alloc: Allocation) -> None:
    if not alloc.is_full():
        raise PreconditionError("every item must be allocated")


def marginal_prices(inst: Instance, alloc: Allocation) -> tuple[Fraction, ...]:
    """Each item priced at its owner's marginal value for it."""
    _require_full(alloc)
    bundles = alloc.bundles
    return tuple(inst[o].marginal(1 << j, bundles[o] & ~(1 << j))
                 for j, o in enumerate(alloc.owners))


def second_highest_marginal_prices(inst: Instance, alloc: Allocation) -> tuple[Fraction, ...]:
    """Each item priced at the largest marginal value any non-owner has for it."""
    _require_full(alloc)
    bundles = alloc.bundles
    out = []
    for j, o in enumerate(alloc.owners):
        others = [inst[k].marginal(1 << j, bundles[k]) for k in range(inst.n) if k != o]
        out.append(max(others, default=Fraction(0)))
    return tuple(out)


def support_local_optimum(inst: Instance, alloc: Allocation, alpha=2) -> Certificate:
    """Certificate for a local optimum of submodular players, priced by marginals.

    Raises PreconditionError when alpha < 2, the allocation is not a local
    optimum, or (for m <= 16) some valuation is not submodular.  An invalid
    certificate under the preconditions means a bug, so it raises too.
    """
    alpha = rational(alpha)
    if alpha < 2:
        raise PreconditionError(f"alpha must be at least 2, got {alpha}")
    lo = is_local_optimum(inst, alloc)
    if not lo:
        raise PreconditionError(f"not a local optimum: {lo.witness}")
    if inst.m <= MAX_CHECK_ITEMS:
        for i, v in enumerate(inst.valuations):
            sub = is_submodular(v)
            if not sub:
                raise PreconditionError(f"player {i} is not submodular: {sub.witness}")
    cert = verify_endowed_equilibrium(inst, alloc, marginal_prices(inst, alloc), alpha)
    if not cert:
        raise AssertionError(f"marginal prices failed at a local optimum: {cert.witness}")
    return cert


def local_optima(inst: Instance):
    """Every full allocation that is a local optimum (exhaustive)."""
    return [a for a in all_allocations(inst.n, inst.m, partial=False) if is_local_optimum(inst, a)]

