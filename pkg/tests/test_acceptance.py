"""Acceptance criteria 1-11, one test (or small group) per criterion.

Each check records a pass/fail line that the conftest prints at the end of
the run.  Sub-claims that turned out to be false as stated are asserted
literally and marked ``xfail(strict=True)``; see the decisions ledger.
"""
import random
import time
from fractions import Fraction as F

import pytest

from conftest import record
from oracles import brute_force_opt, is_equilibrium, tables

from endowgap.equilibrium import (
    Allocation,
    all_allocations,
    greedy_maximal,
    is_maximal,
    support_construct,
    verify_endowed_equilibrium,
    welfare,
)
from endowgap.instances import (
    fv_bundle,
    gen_budget_additive,
    gen_feige_vondrak,
    gen_local_opt_tightness,
    gen_maxcut_reduction,
    gen_random_subadditive,
    gen_random_submodular,
    gen_unit_demand_identical,
    gen_xos_three_items,
    random_graph,
    tightness_layout,
)
from endowgap.local_search import is_local_optimum, local_search, marginal_prices
from endowgap.lp import (
    endowment_gap_instance,
    find_supporting_prices,
    integral_opt,
    integrality_gap,
    is_supported_lp,
    min_supporting_alpha,
    perturbation_gap_check,
    round_two_player_subadditive,
    solve_config_lp,
)
from endowgap.valuations import bundle_of


def fv_alloc(a, b):
    return Allocation.from_bundles([fv_bundle(a) if a else 0, fv_bundle(b) if b else 0], 4)


def random_instance(seed, max_n, max_m, min_n=1):
    rng = random.Random(seed)
    n = rng.randint(min_n, max_n)
    m = rng.randint(1, max_m)
    gen = gen_random_submodular if seed % 2 == 0 else gen_random_subadditive
    return gen(seed, n, m)


def check(criterion, ok, detail):
    record(criterion, ok, detail)
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


# ---------------------------------------------------------------- 1


def test_criterion_01_feige_vondrak():
    start = time.perf_counter()
    inst = gen_feige_vondrak()
    opt, _ = integral_opt(inst)
    lp = solve_config_lp(inst).value
    results = {
        "OPT = 10/3": opt == F(10, 3) and brute_force_opt(tables(inst), 4) == opt,
        "LP = 4": lp == 4,
        "integrality gap = 6/5": integrality_gap(lp, opt) == F(6, 5),
        "alpha({ab},{cd}) = 3/2": min_supporting_alpha(inst, fv_alloc("ab", "cd")) == F(3, 2),
        "({abc},{d}) unsupportable": min_supporting_alpha(inst, fv_alloc("abc", "d")) is None,
        "({ad},{bc}) needs alpha >= 3/2": min_supporting_alpha(inst, fv_alloc("ad", "bc")) >= F(3, 2),
        "({abcd},{}) unsupported below 2": not any(
            is_supported_lp(inst, fv_alloc("abcd", ""), a) for a in (1, F(3, 2), F(19, 10))),
    }
    elapsed = time.perf_counter() - start
    results["runtime < 5 s"] = elapsed < 5
    for name, ok in results.items():
        check(1, ok, name)
    assert all(results.values()), results


@pytest.mark.xfail(strict=True, reason="the exhibited prices leave Bob preferring {c}; see ledger")
def test_criterion_01_exhibited_prices():
    inst = gen_feige_vondrak()
    cert = verify_endowed_equilibrium(inst, fv_alloc("ab", "cd"), [1, 1, F(2, 3), F(2, 3)], F(3, 2))
    check(1, bool(cert), f"prices (1,1,2/3,2/3) valid at 3/2 (witness {cert.witness})")
    assert cert


@pytest.mark.xfail(strict=True, reason="({abcd},{}) is not maximal, so no alpha supports it; see ledger")
def test_criterion_01_grand_bundle_alpha():
    alpha = min_supporting_alpha(gen_feige_vondrak(), fv_alloc("abcd", ""))
    check(1, alpha == 2, f"alpha({{abcd}},{{}}) = 2 (solver: {alpha})")
    assert alpha == 2


def test_criterion_01_supported_at_three_halves_by_other_prices():
    # the 3/2 bound is attained, just not with the exhibited prices
    inst = gen_feige_vondrak()
    alloc = fv_alloc("ab", "cd")
    p = find_supporting_prices(inst, alloc, F(3, 2))
    assert p is not None
    assert verify_endowed_equilibrium(inst, alloc, p, F(3, 2))
    assert is_equilibrium(tables(inst), alloc.owners, p, F(3, 2))


# ---------------------------------------------------------------- 2


def test_criterion_02_main_theorem_sweep():
    start = time.perf_counter()
    optima = failures = 0
    for seed in range(200):
        inst = random_instance(2 * seed, 3, 6)  # even seeds give coverage instances
        lp = solve_config_lp(inst).value
        seen = set()
        for init in all_allocations(inst.n, inst.m):
            final, _ = local_search(inst, init)
            if final in seen:
                continue
            seen.add(final)
            optima += 1
            ok = (verify_endowed_equilibrium(inst, final, marginal_prices(inst, final), 2).valid
                  and 2 * welfare(inst, final) >= lp)
            failures += not ok
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 120
    check(2, ok, f"{optima} distinct local optima, {failures} counterexamples, {elapsed:.1f} s")
    assert ok


# ---------------------------------------------------------------- 3


def test_criterion_03_xos_nonexistence():
    start = time.perf_counter()
    details = []
    ok = True
    for alpha in (F(3, 2), F(2), F(5)):
        rep = endowment_gap_instance(gen_xos_three_items(alpha))
        gap = rep.endowment_gap
        ok &= gap is None or gap > alpha
        details.append(f"alpha={alpha}: gap {gap}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 10
    check(3, ok, ", ".join(details) + f" ({elapsed:.1f} s)")
    assert ok


# ---------------------------------------------------------------- 4


def _budget_additive_gap():
    inst = gen_budget_additive(F(1, 100))
    best = None
    for alloc in all_allocations(inst.n, inst.m):
        alpha = min_supporting_alpha(inst, alloc, verify=False)
        if alpha is not None and (best is None or alpha < best[0]):
            best = (alpha, alloc)
    return inst, best


@pytest.mark.xfail(strict=True, reason="exact gap is 3/(2+eps) = 100/67 < 600/401; see ledger")
def test_criterion_04_budget_additive_bound():
    start = time.perf_counter()
    _, (gap, alloc) = _budget_additive_gap()
    elapsed = time.perf_counter() - start
    ok = gap >= F(600, 401) and elapsed < 30
    check(4, ok, f"gap {gap} at {alloc} vs bound 600/401 ({elapsed:.1f} s)")
    assert ok


def test_criterion_04_exact_gap_is_three_over_two_plus_eps():
    eps = F(1, 100)
    inst, (gap, alloc) = _budget_additive_gap()
    assert gap == 3 / (2 + eps)
    p = find_supporting_prices(inst, alloc, gap)
    assert is_equilibrium(tables(inst), alloc.owners, p, gap)
    assert find_supporting_prices(inst, alloc, gap - F(1, 10**6)) is None


# ---------------------------------------------------------------- 5


def _tightness(k):
    inst = gen_local_opt_tightness(k)
    lay = tightness_layout(k)
    X, Y, c = lay["X"], lay["Y"], lay["c"]
    m = 2 * k + 1
    local = Allocation.from_bundles([1 << X[0], 0, bundle_of(X[1:] + [c]), bundle_of(Y)], m)
    alt = Allocation.from_bundles([1 << X[0], 1 << Y[0], bundle_of(X[1:] + [c]), bundle_of(Y[1:])], m)
    eps = F(1, k * k)
    prices = [eps] * k + [F(1, k) + eps] + [F(1, 2 * k) + eps] * (k - 1) + [F(1, k) + eps]
    return inst, local, alt, prices, eps


def test_criterion_05_tightness_bound():
    start = time.perf_counter()
    ok = True
    for k in (2, 3, 4):
        inst, local, alt, _, eps = _tightness(k)
        assert inst.m == 2 * k + 1
        lo = bool(is_local_optimum(inst, local))
        alpha = min_supporting_alpha(inst, local)
        bound = (2 + eps) / (1 + k * eps + F(1, k) + eps)
        alt_alpha = min_supporting_alpha(inst, alt)
        good = lo and alpha >= bound and alt_alpha <= F(3, 2) + eps
        ok &= good
        check(5, good, f"k={k}: local optimum alpha {alpha} >= {bound}; "
                       f"alternative supported from {alt_alpha} <= {F(3, 2) + eps}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30
    assert ok, elapsed


@pytest.mark.parametrize("k", [
    2,
    pytest.param(3, marks=pytest.mark.xfail(strict=True, reason="b1 prefers X over X-x1+c; see ledger")),
    pytest.param(4, marks=pytest.mark.xfail(strict=True, reason="b1 prefers X over X-x1+c; see ledger")),
])
def test_criterion_05_exhibited_prices(k):
    inst, _, alt, prices, eps = _tightness(k)
    cert = verify_endowed_equilibrium(inst, alt, prices, F(3, 2) + eps)
    check(5, bool(cert), f"k={k}: exhibited prices valid at 3/2+eps (witness {cert.witness})")
    assert cert


# ---------------------------------------------------------------- 6


def test_criterion_06_maximality_characterization():
    start = time.perf_counter()
    failures = checked = 0
    for seed in range(100):
        inst = random_instance(1000 + seed, 3, 5)
        for alloc in all_allocations(inst.n, inst.m):
            checked += 1
            if is_maximal(inst, alloc):
                sup = support_construct(inst, alloc)
                failures += not verify_endowed_equilibrium(inst, alloc, sup.prices, sup.alpha)
            else:
                failures += min_supporting_alpha(inst, alloc, verify=False) is not None
        g = greedy_maximal(inst)
        sup = support_construct(inst, g)
        failures += not (is_maximal(inst, g) and sup is not None
                         and verify_endowed_equilibrium(inst, g, sup.prices, sup.alpha)
                         and min_supporting_alpha(inst, g) is not None)
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 120
    check(6, ok, f"{checked} allocations, {failures} failures, {elapsed:.1f} s")
    assert ok


# ---------------------------------------------------------------- 7


def test_criterion_07_alpha_at_most_one():
    start = time.perf_counter()
    alphas = (F(1, 4), F(1, 2), F(3, 4), F(1))
    feasible = bad = 0
    for seed in range(100):
        inst = random_instance(2000 + seed, 3, 4)
        opt, _ = integral_opt(inst)
        for alloc in all_allocations(inst.n, inst.m):
            optimal = welfare(inst, alloc) == opt
            for a in alphas:
                if find_supporting_prices(inst, alloc, a) is not None:
                    feasible += 1
                    bad += not optimal
    ud = gen_unit_demand_identical(3)
    ud_supported = [(str(alloc), a) for alloc in all_allocations(3, 3) for a in (F(9, 10), F(0))
                    if find_supporting_prices(ud, alloc, a) is not None]
    elapsed = time.perf_counter() - start
    ok = bad == 0 and feasible > 0 and not ud_supported and elapsed < 60
    check(7, ok, f"{feasible} feasible triples, {bad} not welfare-maximizing; unit-demand(3) "
                 f"supported at 9/10 or 0: {len(ud_supported)}; {elapsed:.1f} s")
    assert ok


# ---------------------------------------------------------------- 8


def test_criterion_08_two_player_rounding():
    start = time.perf_counter()
    failures = 0
    for seed in range(100):
        rng = random.Random(3000 + seed)
        m = rng.randint(1, 6)
        inst = gen_random_subadditive(3000 + seed, 2, m)
        x = solve_config_lp(inst)
        res = round_two_player_subadditive(inst, x)
        failures += res.expected_welfare < (F(1, 2) + F(1, 2 * m)) * x.value
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 120
    check(8, ok, f"100 instances, {failures} failures, {elapsed:.1f} s")
    assert ok


# ---------------------------------------------------------------- 9


def test_criterion_09_perturbation():
    start = time.perf_counter()
    rep = perturbation_gap_check(gen_feige_vondrak(), F(1, 10))
    elapsed = time.perf_counter() - start
    ok = (rep.y == F(6, 5) and rep.x_gap == F(33, 28) == rep.x_formula
          and rep.endowment_gap is not None and rep.endowment_gap > F(33, 28) and elapsed < 60)
    check(9, ok, f"integrality gap {rep.x_gap}, endowment gap {rep.endowment_gap}, {elapsed:.1f} s")
    assert ok


# ---------------------------------------------------------------- 10


def _cut(edges, side):
    return sum(w for u, v, w in edges if ((side >> u) & 1) != ((side >> v) & 1))


def test_criterion_10_pls_reduction():
    start = time.perf_counter()
    mismatches = 0
    for seed in range(50):
        rng = random.Random(4000 + seed)
        nv = rng.randint(2, 7)
        edges = random_graph(4000 + seed, nv)
        inst = gen_maxcut_reduction(nv, edges)
        total = sum(w for _, _, w in edges)
        auction = set()
        cuts = set()
        for side in range(1 << nv):
            alloc = Allocation.from_bundles([side, ((1 << nv) - 1) & ~side], nv)
            mismatches += welfare(inst, alloc) != total + _cut(edges, side)
            if is_local_optimum(inst, alloc):
                auction.add(side)
            if all(_cut(edges, side ^ (1 << j)) <= _cut(edges, side) for j in range(nv)):
                cuts.add(side)
        mismatches += auction != cuts
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 60
    check(10, ok, f"50 graphs, {mismatches} mismatches, {elapsed:.1f} s")
    assert ok


# ---------------------------------------------------------------- 11


def test_criterion_11_cross_route_consistency():
    alphas = (F(0), F(1, 2), F(1), F(5, 4), F(3, 2), F(2), F(3))
    disagreements = supported = 0
    for seed in range(100):
        rng = random.Random(5000 + seed)
        inst = random_instance(5000 + seed, 3, 5)
        if rng.random() < 0.5:
            alloc, _ = local_search(inst, Allocation.empty(inst.n, inst.m))
        else:
            alloc = Allocation(tuple(rng.randint(-1, inst.n - 1) for _ in range(inst.m)), inst.n)
        alpha = rng.choice(alphas)
        lp_route = is_supported_lp(inst, alloc, alpha)
        p = find_supporting_prices(inst, alloc, alpha)
        agree = lp_route == (p is not None)
        if p is not None:
            supported += 1
            agree &= bool(verify_endowed_equilibrium(inst, alloc, p, alpha))
            agree &= is_equilibrium(tables(inst), alloc.owners, p, alpha)
        disagreements += not agree
    ok = disagreements == 0
    check(11, ok, f"100 triples ({supported} supported), {disagreements} disagreements")
    assert ok
