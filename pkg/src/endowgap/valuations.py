"""Combinatorial valuations over bitmask bundles.

A bundle is a plain ``int`` whose bit ``j`` is set when item ``j`` belongs to
it.  Every valuation is an immutable set function ``v: 2^M -> Q`` evaluated
exactly with :class:`fractions.Fraction`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterable, Sequence

MAX_ITEMS = 24
MAX_CHECK_ITEMS = 16
# the cached table is only built for valuations this small
MAX_TABLE_ITEMS = 16


class InvalidBundle(ValueError):
    pass


class SizeError(ValueError):
    pass


class ValuationError(ValueError):
    """Raised when a valuation's data violates its class invariants."""


def rational(x: Any) -> Fraction:
    """Coerce ``x`` to a Fraction, refusing floats (they are never exact)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool) or isinstance(x, float):
        raise TypeError(f"refusing inexact value {x!r}; pass int, str or Fraction")
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def bundle(*items: int) -> int:
    mask = 0
    for j in items:
        if j < 0:
            raise InvalidBundle(f"negative item index {j}")
        mask |= 1 << j
    return mask


def bundle_of(items: Iterable[int]) -> int:
    return bundle(*items)


def items_of(mask: int) -> list[int]:
    out = []
    j = 0
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return out


def full(m: int) -> int:
    return (1 << m) - 1


def submasks(mask: int):
    """Yield every submask of ``mask`` (including 0 and ``mask``), descending."""
    s = mask
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & mask


def check_bundle(mask: int, m: int) -> None:
    if mask < 0 or mask >> m:
        raise InvalidBundle(f"bundle {mask:#b} uses items outside 0..{m - 1}")


class Valuation:
    """Base class. Subclasses implement ``_value`` and ``payload``."""

    kind = "abstract"

    def __init__(self, m: int):
        if not 0 <= m <= MAX_ITEMS:
            raise SizeError(f"item count {m} outside 0..{MAX_ITEMS}")
        self.m = m

    def _value(self, mask: int) -> Fraction:
        raise NotImplementedError

    def eval(self, mask: int) -> Fraction:
        check_bundle(mask, self.m)
        if self.m <= MAX_TABLE_ITEMS:
            return self.table[mask]
        return self._value(mask)

    __call__ = eval

    def marginal(self, x: int, y: int) -> Fraction:
        """``v(X | Y) = v(X u Y) - v(Y)``."""
        return self.eval(x | y) - self.eval(y)

    @cached_property
    def table(self) -> tuple[Fraction, ...]:
        if self.m > MAX_TABLE_ITEMS:
            raise SizeError(f"refusing to tabulate 2^{self.m} bundles")
        return tuple(self._value(s) for s in range(1 << self.m))

    def payload(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(m={self.m})"


class Explicit(Valuation):
    kind = "explicit"

    def __init__(self, m: int, values: Sequence, validate: bool = True):
        super().__init__(m)
        if len(values) != 1 << m:
            raise ValuationError(f"explicit table needs {1 << m} entries, got {len(values)}")
        self._values = tuple(rational(v) for v in values)
        self.validated = validate
        if validate:
            if self._values[0] != 0:
                raise ValuationError("not normalized: v(empty) != 0")
            bad = _monotone_witness(self._values, m)
            if bad is not None:
                s, j = bad
                raise ValuationError(f"not monotone: adding item {j} to {items_of(s)} lowers the value")

    def _value(self, mask):
        return self._values[mask]

    def payload(self):
        d = {"table": {str(s): _fmt(v) for s, v in enumerate(self._values)}}
        if not self.validated:
            d["validate"] = False
        return d


class Additive(Valuation):
    kind = "additive"

    def __init__(self, values: Sequence):
        super().__init__(len(values))
        self.values = tuple(rational(v) for v in values)
        if any(v < 0 for v in self.values):
            raise ValuationError("negative item value")

    def _value(self, mask):
        return sum((self.values[j] for j in items_of(mask)), Fraction(0))

    def payload(self):
        return {"values": [_fmt(v) for v in self.values]}


class BudgetAdditive(Valuation):
    kind = "budget_additive"

    def __init__(self, values: Sequence, budget):
        super().__init__(len(values))
        self.values = tuple(rational(v) for v in values)
        self.budget = rational(budget)
        if any(v < 0 for v in self.values) or self.budget < 0:
            raise ValuationError("negative value or budget")

    def _value(self, mask):
        return min(self.budget, sum((self.values[j] for j in items_of(mask)), Fraction(0)))

    def payload(self):
        return {"values": [_fmt(v) for v in self.values], "budget": _fmt(self.budget)}


class UnitDemand(Valuation):
    kind = "unit_demand"

    def __init__(self, values: Sequence):
        super().__init__(len(values))
        self.values = tuple(rational(v) for v in values)
        if any(v < 0 for v in self.values):
            raise ValuationError("negative item value")

    def _value(self, mask):
        return max((self.values[j] for j in items_of(mask)), default=Fraction(0))

    def payload(self):
        return {"values": [_fmt(v) for v in self.values]}


class XOS(Valuation):
    """Pointwise maximum of additive clauses (each a length-m weight vector)."""

    kind = "xos"

    def __init__(self, m: int, clauses: Sequence[Sequence]):
        super().__init__(m)
        self.clauses = tuple(tuple(rational(w) for w in c) for c in clauses)
        for c in self.clauses:
            if len(c) != m:
                raise ValuationError(f"clause has {len(c)} weights, expected {m}")
            if any(w < 0 for w in c):
                raise ValuationError("negative clause weight")

    def _value(self, mask):
        its = items_of(mask)
        return max((sum((c[j] for j in its), Fraction(0)) for c in self.clauses),
                   default=Fraction(0))

    def payload(self):
        return {"clauses": [[_fmt(w) for w in c] for c in self.clauses]}


class GraphCut(Valuation):
    """Total weight of the edges touching the bundle (vertices are items)."""

    kind = "graph_cut"

    def __init__(self, m: int, edges: Iterable[tuple[int, int, Any]]):
        super().__init__(m)
        es = []
        for u, v, w in edges:
            w = rational(w)
            if w < 0:
                raise ValuationError(f"negative edge weight on ({u}, {v})")
            if not (0 <= u < m and 0 <= v < m) or u == v:
                raise ValuationError(f"bad edge ({u}, {v})")
            es.append((min(u, v), max(u, v), w))
        self.edges = tuple(sorted(es))

    def _value(self, mask):
        return sum((w for u, v, w in self.edges if (mask >> u) & 1 or (mask >> v) & 1),
                   Fraction(0))

    def payload(self):
        return {"edges": [[u, v, _fmt(w)] for u, v, w in self.edges]}


class Endowed(Valuation):
    """``v^{S,alpha}(T) = v(T) + (alpha - 1) * v(S & T)``."""

    kind = "endowed"

    def __init__(self, inner: Valuation, endowment: int, alpha):
        super().__init__(inner.m)
        check_bundle(endowment, inner.m)
        alpha = rational(alpha)
        if alpha < 0:
            raise ValueError(f"alpha must be nonnegative, got {alpha}")
        self.inner = inner
        self.endowment = endowment
        self.alpha = alpha

    def _value(self, mask):
        return self.inner.eval(mask) + (self.alpha - 1) * self.inner.eval(self.endowment & mask)

    def payload(self):
        return {"inner": to_dict(self.inner), "endowment": items_of(self.endowment),
                "alpha": _fmt(self.alpha)}


class Perturbed(Valuation):
    """``v(S) = inner(S) + |S| * eps``."""

    kind = "perturbed"

    def __init__(self, inner: Valuation, eps):
        super().__init__(inner.m)
        self.inner = inner
        self.eps = rational(eps)
        if self.eps < 0:
            raise ValuationError("negative perturbation")

    def _value(self, mask):
        return self.inner.eval(mask) + mask.bit_count() * self.eps

    def payload(self):
        return {"inner": to_dict(self.inner), "eps": _fmt(self.eps)}


def endow(v: Valuation, endowment: int, alpha) -> Endowed:
    return Endowed(v, endowment, alpha)


def marginal(v: Valuation, x: int, y: int) -> Fraction:
    return v.marginal(x, y)


# ---------------------------------------------------------------- checkers


@dataclass(frozen=True)
class Check:
    """Outcome of a structural check; falsy when a witness was found."""

    ok: bool
    witness: Any = None

    def __bool__(self):
        return self.ok


def _require_checkable(v: Valuation) -> tuple[Fraction, ...]:
    if v.m > MAX_CHECK_ITEMS:
        raise SizeError(f"exhaustive checks are limited to m <= {MAX_CHECK_ITEMS}, got {v.m}")
    return v.table


def _monotone_witness(t, m):
    for s in range(1 << m):
        for j in range(m):
            if not (s >> j) & 1 and t[s | (1 << j)] < t[s]:
                return s, j
    return None


def is_normalized(v: Valuation) -> Check:
    val = v.eval(0)
    return Check(val == 0, None if val == 0 else {"value_of_empty": val})


def is_monotone(v: Valuation) -> Check:
    """Single-item additions never decrease the value (equivalent to monotone)."""
    t = _require_checkable(v)
    bad = _monotone_witness(t, v.m)
    if bad is None:
        return Check(True)
    s, j = bad
    return Check(False, {"bundle": s, "item": j})


def is_submodular(v: Valuation) -> Check:
    """Diminishing returns: ``v(j|S) >= v(j|S+k)`` for all S and j, k outside S."""
    t = _require_checkable(v)
    m = v.m
    for s in range(1 << m):
        ts = t[s]
        for j in range(m):
            bj = 1 << j
            if s & bj:
                continue
            mj = t[s | bj] - ts
            for k in range(m):
                bk = 1 << k
                if k == j or s & bk:
                    continue
                if t[s | bj | bk] - t[s | bk] > mj:
                    return Check(False, {"bundle": s, "item": j, "added": k})
    return Check(True)


def is_subadditive(v: Valuation) -> Check:
    """``v(S) + v(T) >= v(S | T)`` over all pairs of bundles.

    Small tables are checked over every pair; larger monotone ones over
    disjoint pairs only, which is equivalent under monotonicity.
    """
    t = _require_checkable(v)
    m = v.m
    top = full(m)
    if m <= 8:
        for s in range(1 << m):
            for u in range(s, 1 << m):
                if t[s] + t[u] < t[s | u]:
                    return Check(False, {"pair": (s, u)})
        return Check(True)
    if not is_monotone(v):
        raise ValuationError("disjoint-pair subadditivity check needs a monotone valuation")
    for s in range(1 << m):
        for u in submasks(top & ~s):
            if u < s:
                continue
            if t[s] + t[u] < t[s | u]:
                return Check(False, {"pair": (s, u)})
    return Check(True)


# ---------------------------------------------------------------- JSON


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def to_dict(v: Valuation) -> dict:
    return {"class": v.kind, "payload": v.payload()}


def from_dict(d: dict, m: int) -> Valuation:
    """Inverse of ``to_dict``; ``m`` comes from the enclosing instance."""
    if not isinstance(d, dict):
        raise ValuationError(f"player entry must be an object, got {type(d).__name__}")
    kind = d.get("class")
    p = d.get("payload")
    if not isinstance(p, dict):
        raise ValuationError(f"{kind} valuation needs a payload object")
    try:
        if kind == "explicit":
            table = p["table"]
            values = [table[str(s)] for s in range(1 << m)]
            return Explicit(m, values, validate=p.get("validate", True))
        if kind == "additive":
            v = Additive(p["values"])
        elif kind == "budget_additive":
            v = BudgetAdditive(p["values"], p["budget"])
        elif kind == "unit_demand":
            v = UnitDemand(p["values"])
        elif kind == "xos":
            v = XOS(m, p["clauses"])
        elif kind == "graph_cut":
            v = GraphCut(m, [tuple(e) for e in p["edges"]])
        elif kind == "endowed":
            v = Endowed(from_dict(p["inner"], m), bundle_of(p["endowment"]), p["alpha"])
        elif kind == "perturbed":
            v = Perturbed(from_dict(p["inner"], m), p["eps"])
        else:
            raise ValuationError(f"unknown valuation class {kind!r}")
    except KeyError as e:
        raise ValuationError(f"{kind} valuation is missing field {e}") from None
    if v.m != m:
        raise ValuationError(f"{kind} valuation has {v.m} items, instance has {m}")
    return v
