"""Named instances and seeded random generators."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Mapping, Optional

from .equilibrium import Instance
from .valuations import (
    XOS,
    Additive,
    BudgetAdditive,
    Explicit,
    GraphCut,
    Perturbed,
    UnitDemand,
    Valuation,
    bundle_of,
    is_monotone,
    is_normalized,
    is_subadditive,
    is_submodular,
    rational,
)

FV_ITEMS = "abcd"


def gen_feige_vondrak() -> Instance:
    """Two submodular players on items a, b, c, d (indices 0..3)."""
    third = Fraction(1, 3)
    pairs = {
        "ab": (2, 4 * third), "cd": (2, 4 * third),
        "ac": (4 * third, 2), "bd": (4 * third, 2),
        "ad": (5 * third, 5 * third), "bc": (5 * third, 5 * third),
    }
    tables = ([Fraction(0)] * 16, [Fraction(0)] * 16)
    for s in range(1, 16):
        size = s.bit_count()
        for p in (0, 1):
            if size == 1:
                tables[p][s] = Fraction(1)
            elif size >= 3:
                tables[p][s] = Fraction(2)
    for name, vals in pairs.items():
        s = bundle_of(FV_ITEMS.index(c) for c in name)
        for p in (0, 1):
            tables[p][s] = Fraction(vals[p])
    return Instance((Explicit(4, tables[0]), Explicit(4, tables[1])), label="feige-vondrak")


def fv_bundle(name: str) -> int:
    return bundle_of(FV_ITEMS.index(c) for c in name)


def gen_xos_three_items(alpha) -> Instance:
    """Two identical XOS players on three items that no allocation supports at ``alpha``."""
    alpha = rational(alpha)
    if alpha <= 1:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    pair = Fraction(1, 2) + 1 / (24 * alpha ** 2)
    clauses = []
    for j in range(3):
        c = [Fraction(0)] * 3
        c[j] = Fraction(1)
        clauses.append(c)
    for j, k in combinations(range(3), 2):
        c = [Fraction(0)] * 3
        c[j] = c[k] = pair
        clauses.append(c)
    clauses.append([Fraction(1, 2), Fraction(1, 2), 1 / (3 * alpha)])
    v = XOS(3, clauses)
    return Instance((v, XOS(3, clauses)), label=f"xos-three-items alpha={alpha}")


def gen_budget_additive(epsilon=Fraction(1, 100)) -> Instance:
    """Players a1, a2, b1, b2 on items x1, x2, y1, y2, c (indices 0..4)."""
    eps = rational(epsilon)
    if not 0 < eps < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
    a1 = BudgetAdditive([1, 1, 0, 0, 0], 1)
    a2 = BudgetAdditive([0, 0, 1, 1, 0], 1)
    b1 = BudgetAdditive([1, 1, 0, 0, 2], 2 + eps)
    b2 = BudgetAdditive([0, 0, 1, 1, 2], 2 + eps)
    return Instance((a1, a2, b1, b2), label=f"budget-additive eps={eps}")


def tightness_layout(k: int) -> dict:
    """Item indices of the tightness instance: x_1..x_k, y_1..y_k, then c."""
    return {"X": list(range(k)), "Y": list(range(k, 2 * k)), "c": 2 * k}


def gen_local_opt_tightness(k: int, eps=None) -> Instance:
    """Players a1, a2, b1, b2 on 2k+1 items; eps defaults to 1/k^2."""
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    eps = Fraction(1, k * k) if eps is None else rational(eps)
    if not 0 < eps < Fraction(1, k):
        raise ValueError("eps must lie in (0, 1/k)")
    m = 2 * k + 1
    unit = Fraction(1, k)
    x_vals = [unit] * k + [Fraction(0)] * k + [Fraction(0)]
    y_vals = [Fraction(0)] * k + [unit] * k + [Fraction(0)]
    a1 = UnitDemand(x_vals)
    a2 = UnitDemand(y_vals)
    b1 = Perturbed(BudgetAdditive(x_vals[:-1] + [Fraction(1)], 1), eps)
    b2 = Perturbed(BudgetAdditive(y_vals[:-1] + [Fraction(1)], 1), eps)
    assert b1.m == m
    return Instance((a1, a2, b1, b2), label=f"local-opt-tightness k={k}")


def gen_unit_demand_identical(n: int) -> Instance:
    if n < 1:
        raise ValueError("n must be positive")
    return Instance(tuple(UnitDemand([1] * n) for _ in range(n)),
                    label=f"unit-demand-identical n={n}")


def gen_maxcut_reduction(m: int, edges) -> Instance:
    """Two identical graph-cut players; items are the vertices."""
    if m > 16:
        raise ValueError("at most 16 vertices")
    edges = list(edges)
    return Instance((GraphCut(m, edges), GraphCut(m, edges)), label="maxcut-reduction")


def _odd_graph_table(k: int, labels: Mapping[int, Fraction]) -> list[Fraction]:
    m = 2 * k + 1
    table = []
    for s in range(1 << m):
        size = s.bit_count()
        if size <= k:
            table.append(Fraction(size))
        elif size == k + 1:
            table.append(k + Fraction(1, 2) + labels.get(s, Fraction(0)))
        else:
            table.append(Fraction(k + 1))
    return table


def _check_labels(k: int, labels, upper: Fraction, closed: bool = False) -> dict:
    m = 2 * k + 1
    out = {}
    for s, c in dict(labels).items():
        s = s if isinstance(s, int) else bundle_of(s)
        c = rational(c)
        if s >> m or s.bit_count() != k + 1:
            raise ValueError(f"label key {s:#b} is not a {k + 1}-subset of {m} items")
        if c < 0 or c > upper or (c == upper and not closed):
            raise ValueError(f"label {c} outside [0, {upper}{']' if closed else ')'}")
        out[s] = c
    return out


def gen_odd_graph_family(k: int, labels: Optional[Mapping] = None) -> Instance:
    """Two identical players whose (k+1)-bundle values carry odd-graph vertex labels.

    ``labels`` maps (k+1)-subsets (bitmask or item iterable) to values in
    [0, 1/2); missing subsets get label 0.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if 2 * k + 1 > 15:
        raise ValueError("at most 15 items")
    labs = _check_labels(k, labels or {}, Fraction(1, 2))
    table = _odd_graph_table(k, labs)
    m = 2 * k + 1
    return Instance((Explicit(m, table), Explicit(m, table)), label=f"odd-graph k={k}")


def gen_odd_graph_comm_family(k: int, labels_a: Optional[Mapping] = None,
                              labels_b: Optional[Mapping] = None) -> Instance:
    """Two-map variant: size-k bundles read the label of their complement.

    Values are ``|S|`` up to size k-1, ``k - 1/2 + c(M-S)`` at size k,
    ``k - 1/4 + c(S)`` at size k+1 and ``k`` above; labels lie in [0, 1/4].
    """
    if k < 1 or 2 * k + 1 > 15:
        raise ValueError("need 1 <= k and 2k+1 <= 15")
    m = 2 * k + 1
    top = (1 << m) - 1
    tables = []
    for labels in (labels_a, labels_b):
        labs = _check_labels(k, labels or {}, Fraction(1, 4), closed=True)
        table = []
        for s in range(1 << m):
            size = s.bit_count()
            if size <= k - 1:
                table.append(Fraction(size))
            elif size == k:
                table.append(k - 1 + Fraction(1, 2) + labs.get(top & ~s, Fraction(0)))
            elif size == k + 1:
                table.append(k - 1 + Fraction(3, 4) + labs.get(s, Fraction(0)))
            else:
                table.append(Fraction(k))
        tables.append(Explicit(m, table))
    return Instance(tuple(tables), label=f"odd-graph-comm k={k}")


def odd_graph_neighbors(k: int, s: int) -> list[int]:
    """Vertices adjacent to the (k+1)-subset ``s``: those meeting it in exactly one item."""
    m = 2 * k + 1
    top = (1 << m) - 1
    comp = top & ~s
    return [comp | (1 << j) for j in range(m) if (s >> j) & 1]


def gen_example_opt_not_supported(eps=Fraction(1, 2)) -> Instance:
    """Three items; values depend on bundle size only.

    Pairs are worth 1 to player 0 and ``eps`` to player 1; the grand bundle
    is worth the same as a pair and a single item half a pair.
    """
    eps = rational(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    p0 = BudgetAdditive([Fraction(1, 2)] * 3, 1)
    p1 = BudgetAdditive([eps / 2] * 3, eps)
    return Instance((p0, p1), label="example-opt-not-supported")


# ---------------------------------------------------------------- random


class GenerationError(RuntimeError):
    pass


MAX_RANDOM_ITEMS = 8
RETRIES = 50


def _validated(make: Callable[[random.Random], Valuation], rng: random.Random,
               check: Callable[[Valuation], object]) -> Valuation:
    for _ in range(RETRIES):
        v = make(rng)
        if is_normalized(v) and is_monotone(v) and check(v):
            return v
    raise GenerationError("random valuation failed validation repeatedly")


def random_coverage(rng: random.Random, m: int, universe: int = 8, max_weight: int = 6) -> Explicit:
    """``v(S)`` = total weight of universe elements covered by the items of ``S``."""
    weights = [rng.randint(1, max_weight) for _ in range(universe)]
    covers = [sum(1 << u for u in range(universe) if rng.random() < 0.35) for _ in range(m)]
    table = []
    for s in range(1 << m):
        cov = 0
        for j in range(m):
            if (s >> j) & 1:
                cov |= covers[j]
        table.append(Fraction(sum(w for u, w in enumerate(weights) if (cov >> u) & 1)))
    return Explicit(m, table)


def random_subadditive(rng: random.Random, m: int) -> Explicit:
    """A clipped XOS function, sometimes plus a size-step term; not always XOS itself."""
    clauses = [[Fraction(rng.randint(0, 6)) for _ in range(m)] for _ in range(rng.randint(1, 4))]
    xos = XOS(m, clauses)
    cap = Fraction(rng.randint(3, 12))
    step = rng.choice([0, 0, 1, 2])
    width = rng.randint(2, 3)
    table = []
    for s in range(1 << m):
        val = min(cap, xos.eval(s))
        if step:
            val += step * -(-s.bit_count() // width)
        table.append(val)
    return Explicit(m, table)


def gen_random_submodular(seed, n: int, m: int) -> Instance:
    if m > MAX_RANDOM_ITEMS:
        raise ValueError(f"random instances are limited to m <= {MAX_RANDOM_ITEMS}")
    rng = random.Random(seed)
    vals = tuple(_validated(lambda r: random_coverage(r, m), rng, is_submodular) for _ in range(n))
    return Instance(vals, label=f"random-submodular seed={seed} n={n} m={m}")


def gen_random_subadditive(seed, n: int, m: int) -> Instance:
    if m > MAX_RANDOM_ITEMS:
        raise ValueError(f"random instances are limited to m <= {MAX_RANDOM_ITEMS}")
    rng = random.Random(seed)
    vals = tuple(_validated(lambda r: random_subadditive(r, m), rng, is_subadditive)
                 for _ in range(n))
    return Instance(vals, label=f"random-subadditive seed={seed} n={n} m={m}")


def gen_random_additive(seed, n: int, m: int) -> Instance:
    rng = random.Random(seed)
    return Instance(tuple(Additive([rng.randint(0, 5) for _ in range(m)]) for _ in range(n)),
                    label=f"random-additive seed={seed}")


def random_graph(seed, vertices: int, p: float = 0.5, max_weight: int = 9):
    rng = random.Random(seed)
    return [(u, v, rng.randint(1, max_weight))
            for u, v in combinations(range(vertices), 2) if rng.random() < p]


# ---------------------------------------------------------------- named specs


@dataclass(frozen=True)
class InstanceSpec:
    name: str
    params: dict = field(default_factory=dict)

    def resolve(self) -> Instance:
        try:
            make = GENERATORS[self.name]
        except KeyError:
            raise ValueError(f"unknown generator {self.name!r}; "
                             f"choose from {', '.join(sorted(GENERATORS))}") from None
        return make(**self.params)


def _random_graph_instance(seed=0, vertices=6, p="1/2"):
    return gen_maxcut_reduction(int(vertices), random_graph(int(seed), int(vertices),
                                                            float(Fraction(p))))


GENERATORS: dict[str, Callable[..., Instance]] = {
    "feige-vondrak": lambda: gen_feige_vondrak(),
    "xos-three-items": lambda alpha="2": gen_xos_three_items(rational(alpha)),
    "budget-additive": lambda epsilon="1/100": gen_budget_additive(rational(epsilon)),
    "local-opt-tightness": lambda k="2": gen_local_opt_tightness(int(k)),
    "unit-demand-identical": lambda n="3": gen_unit_demand_identical(int(n)),
    "example-opt-not-supported": lambda eps="1/2": gen_example_opt_not_supported(rational(eps)),
    "odd-graph": lambda k="1": gen_odd_graph_family(int(k)),
    "maxcut-random": _random_graph_instance,
    "random-submodular": lambda seed="0", n="2", m="4": gen_random_submodular(int(seed), int(n), int(m)),
    "random-subadditive": lambda seed="0", n="2", m="4": gen_random_subadditive(int(seed), int(n), int(m)),
}
