import random
from fractions import Fraction as F

import pytest

from oracles import basic_feasible_solutions, brute_force_opt, config_lp, lp_value_by_vertices, tables

from endowgap.equilibrium import (
    Allocation,
    Instance,
    all_allocations,
    is_maximal,
    verify_endowed_equilibrium,
    welfare,
)
from endowgap.instances import (
    fv_bundle,
    gen_example_opt_not_supported,
    gen_feige_vondrak,
    gen_random_subadditive,
    gen_random_submodular,
    gen_xos_three_items,
)
from endowgap.local_search import local_optima
from endowgap.lp import (
    FractionalSolution,
    endowment_gap_instance,
    find_supporting_prices,
    integral_opt,
    integrality_gap,
    is_supported_lp,
    min_supporting_alpha,
    perturbation_gap_check,
    psi,
    round_two_player_subadditive,
    solve_config_lp,
)
from endowgap.valuations import Additive, SizeError, full


def fv(a, b):
    return Allocation.from_bundles([fv_bundle(a) if a else 0, fv_bundle(b) if b else 0], 4)


FV_HALF = FractionalSolution(
    {(0, fv_bundle("ab")): F(1, 2), (0, fv_bundle("cd")): F(1, 2),
     (1, fv_bundle("ac")): F(1, 2), (1, fv_bundle("bd")): F(1, 2)}, F(4))


def small_instance(seed, max_n, max_m, min_n=1):
    rng = random.Random(seed)
    gen = gen_random_submodular if seed % 2 == 0 else gen_random_subadditive
    return gen(seed, rng.randint(min_n, max_n), rng.randint(1, max_m))


def test_feige_vondrak_lp_and_opt():
    inst = gen_feige_vondrak()
    x = solve_config_lp(inst)
    assert x.value == 4 and x.objective(inst) == 4 and x.is_feasible(2, 4)
    assert FV_HALF.is_feasible(2, 4) and FV_HALF.objective(inst) == 4
    opt, alloc = integral_opt(inst)
    assert opt == F(10, 3) and welfare(inst, alloc) == opt


def test_single_additive_player():
    inst = Instance((Additive([1, 2, 3]),))
    assert solve_config_lp(inst).value == 6
    assert integral_opt(inst)[0] == 6


def test_zero_instance():
    inst = Instance((Additive([0, 0]), Additive([0, 0])))
    assert solve_config_lp(inst).value == 0
    assert integral_opt(inst)[0] == 0


def test_lp_matches_vertex_oracle():
    for seed in range(15):
        inst = small_instance(seed, 2, 3)
        vals = tables(inst)
        x = solve_config_lp(inst)
        assert x.is_feasible(inst.n, inst.m)
        assert x.objective(inst) == x.value
        assert x.value == lp_value_by_vertices(vals, inst.m)
    xos = gen_xos_three_items(2)
    assert solve_config_lp(xos).value == lp_value_by_vertices(tables(xos), 3)


def test_integral_opt_matches_enumeration():
    for seed in range(40):
        inst = small_instance(seed, 3, 5)
        opt, alloc = integral_opt(inst)
        assert opt == brute_force_opt(tables(inst), inst.m)
        assert welfare(inst, alloc) == opt
        assert solve_config_lp(inst).value >= opt


def test_psi_examples():
    inst = gen_feige_vondrak()
    assert psi(inst, fv("ab", "cd"), FV_HALF) == 2
    assert psi(inst, fv("ad", "bc"), FV_HALF) == 2
    assert psi(inst, Allocation.empty(2, 4), FV_HALF) == 0


def test_feige_vondrak_support():
    inst = gen_feige_vondrak()
    assert is_supported_lp(inst, fv("ab", "cd"), F(3, 2))
    assert not is_supported_lp(inst, fv("ab", "cd"), F(7, 5))
    assert not is_supported_lp(inst, fv("abcd", ""), F(3, 2))
    assert min_supporting_alpha(inst, fv("ab", "cd")) == F(3, 2)
    p = find_supporting_prices(inst, fv("ab", "cd"), F(3, 2))
    assert verify_endowed_equilibrium(inst, fv("ab", "cd"), p, F(3, 2))
    assert find_supporting_prices(inst, fv("ab", "cd"), F(7, 5)) is None


def test_opt_not_supported_grand_bundle():
    inst = gen_example_opt_not_supported()
    grand = Allocation.from_bundles([full(3), 0], 3)
    assert min_supporting_alpha(inst, grand) is None
    for alpha in (1, 2, 10, 1000):
        assert not is_supported_lp(inst, grand, alpha)
        assert find_supporting_prices(inst, grand, alpha) is None


def test_walrasian_instance_has_gap_one():
    inst = Instance((Additive([3, 1, 2]), Additive([1, 2, 2])))
    rep = endowment_gap_instance(inst)
    assert rep.integrality_gap == 1 and rep.endowment_gap == 1
    assert min_supporting_alpha(inst, Allocation((0, 1, 0), 2)) == 1


def test_gap_reports():
    fvr = endowment_gap_instance(gen_feige_vondrak())
    assert fvr.integrality_gap == F(6, 5) and fvr.endowment_gap == F(3, 2)
    assert welfare(gen_feige_vondrak(), fvr.best_allocation) == F(10, 3)
    d = fvr.to_dict()
    assert d["endowment_gap"] == "3/2" and d["integrality_gap"] == "6/5"
    assert "3/2" in fvr.table()
    assert endowment_gap_instance(gen_xos_three_items(2)).endowment_gap > 2


def test_claim_inequality_at_vertices():
    # alpha W(A) >= sum x v + (alpha - 1) psi at every LP vertex, tight somewhere when alpha > 1
    for seed in range(12):
        inst = small_instance(seed, 2, 3, min_n=2)
        vals = tables(inst)
        cols, A, b = config_lp(vals, inst.m)
        vertices = list(basic_feasible_solutions(A, b))
        for alloc in all_allocations(inst.n, inst.m):
            alpha = min_supporting_alpha(inst, alloc)
            if alpha is None:
                continue
            bundles = alloc.bundles
            w = welfare(inst, alloc)
            slack = []
            for x in vertices:
                lpval = sum(xi * vals[i][s] for xi, (i, s) in zip(x, cols))
                ps = sum(xi * vals[i][s & bundles[i]] for xi, (i, s) in zip(x, cols))
                slack.append(alpha * w - lpval - (alpha - 1) * ps)
            assert min(slack) >= 0
            if alpha > 1:
                assert min(slack) == 0


def test_lp_properties_on_random_instances():
    for seed in range(40):
        inst = small_instance(seed, 3, 4)
        lpv = solve_config_lp(inst).value
        opt, _ = integral_opt(inst)
        best = None
        for alloc in all_allocations(inst.n, inst.m):
            alpha = min_supporting_alpha(inst, alloc)
            assert (alpha is None) == (not is_maximal(inst, alloc))
            if alpha is None:
                continue
            best = alpha if best is None else min(best, alpha)
            assert is_supported_lp(inst, alloc, alpha)
            assert is_supported_lp(inst, alloc, alpha + F(1, 3))
            assert alpha * welfare(inst, alloc) >= lpv
            if alpha > 1:
                assert not is_supported_lp(inst, alloc, alpha - F(1, 100))
                assert find_supporting_prices(inst, alloc, alpha - F(1, 100)) is None
        assert best is not None and best >= integrality_gap(lpv, opt)
        walrasian = any(find_supporting_prices(inst, a, 1) is not None
                        for a in all_allocations(inst.n, inst.m) if welfare(inst, a) == opt)
        assert walrasian == (lpv == opt)


def test_supporting_prices_at_local_optima():
    for seed in range(0, 30, 2):
        inst = gen_random_submodular(seed, 2, 4)
        for o in local_optima(inst):
            p = find_supporting_prices(inst, o, 2)
            assert p is not None and verify_endowed_equilibrium(inst, o, p, 2)


def test_rounding_examples():
    inst = gen_feige_vondrak()
    r = round_two_player_subadditive(inst, FV_HALF)
    assert r.expected_welfare == F(10, 3) and r.bound == F(5, 2)
    integral = FractionalSolution({(0, fv_bundle("ab")): F(1), (1, fv_bundle("cd")): F(1)}, F(10, 3))
    assert round_two_player_subadditive(inst, integral).expected_welfare == F(10, 3)
    with pytest.raises(ValueError):
        round_two_player_subadditive(Instance((Additive([1]),)), FractionalSolution({}, F(0)))


def test_perturbation_examples():
    rep = perturbation_gap_check(gen_feige_vondrak(), F(1, 10))
    assert rep.y == F(6, 5) and rep.x_gap == rep.x_formula == F(33, 28)
    assert rep.ok and rep.endowment_gap >= rep.lower_bound
    with pytest.raises(ValueError):
        perturbation_gap_check(Instance((Additive([1]), Additive([1]))), F(1, 10))


def test_size_caps():
    with pytest.raises(SizeError):
        solve_config_lp(Instance((Additive([1] * 15),), check=False))
