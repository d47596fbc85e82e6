"""Command-line driver: ``endowgap <verb> ...``.

Exit status 0 means success or a Valid verdict, 1 an Invalid, Infeasible or
Unsupportable verdict, 2 an input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import jsonio
from .equilibrium import (
    Allocation,
    Instance,
    greedy_maximal,
    support_construct,
    verify_endowed_equilibrium,
    welfare,
)
from .instances import GENERATORS, InstanceSpec
from .jsonio import InputError, dumps, fmt
from .local_search import PreconditionError, local_search, support_local_optimum
from .lp import (
    endowment_gap_instance,
    integral_opt,
    min_supporting_alpha,
    perturbation_gap_check,
    round_two_player_subadditive,
    solve_config_lp,
)
from .valuations import is_monotone, is_normalized, is_subadditive, is_submodular

OK, VERDICT_NO, INPUT_ERROR = 0, 1, 2


class Report:
    """What a verb produced: a JSON-able payload, a table rendering and an exit code."""

    def __init__(self, payload: dict, table: str, code: int = OK):
        self.payload = payload
        self.table = table
        self.code = code


# ---------------------------------------------------------------- argument helpers


def _params(pairs) -> dict:
    out = {}
    for p in pairs or []:
        if "=" not in p:
            raise InputError(f"--param expects key=value, got {p!r}")
        k, v = p.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _generate(name: str, params: dict, seed: Optional[int]) -> Instance:
    if seed is not None:
        params = {**params, "seed": str(seed)}
    try:
        return InstanceSpec(name, params).resolve()
    except TypeError as e:
        raise InputError(f"bad parameters for {name}: {e}") from None


def _instance(args) -> Instance:
    if getattr(args, "gen", None):
        return _generate(args.gen, _params(args.param), args.seed)
    if not args.instance:
        raise InputError("give an instance file (or '-' for stdin) or --gen NAME")
    if args.instance == "-":
        text = sys.stdin.read()
    else:
        try:
            text = Path(args.instance).read_text()
        except OSError as e:
            raise InputError(f"cannot read instance: {e}") from None
    return jsonio.load_instance(text)


def _certificate_file(args) -> dict:
    if not getattr(args, "certificate", None):
        return {}
    try:
        d = json.loads(Path(args.certificate).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read certificate: {e}") from None
    if not isinstance(d, dict):
        raise InputError("certificate file must hold an object")
    return d


def _allocation(args, inst: Instance, required: bool = True) -> Optional[Allocation]:
    raw = args.allocation if args.allocation is not None else _certificate_file(args).get("allocation")
    if raw is None:
        if required:
            raise InputError("an allocation is required (--allocation '[0,1,-1,...]')")
        return None
    return jsonio.parse_allocation(raw, inst)


def _alpha(args, default=None) -> Fraction:
    raw = args.alpha if args.alpha is not None else _certificate_file(args).get("alpha", default)
    if raw is None:
        raise InputError("--alpha is required")
    a = jsonio.parse_rational(raw, "alpha")
    if a < 0:
        raise InputError("alpha must be nonnegative")
    return a


# ---------------------------------------------------------------- verbs


def cmd_check(args) -> Report:
    inst = _instance(args)
    rows = []
    for i, v in enumerate(inst.valuations):
        rows.append({"player": i, "class": v.kind,
                     "normalized": bool(is_normalized(v)), "monotone": bool(is_monotone(v)),
                     "submodular": bool(is_submodular(v)), "subadditive": bool(is_subadditive(v))})
    lines = [f"{'player':<8}{'class':<18}{'normalized':>11}{'monotone':>10}"
             f"{'submodular':>12}{'subadditive':>13}"]
    for r in rows:
        lines.append(f"{r['player']:<8}{r['class']:<18}{str(r['normalized']):>11}"
                     f"{str(r['monotone']):>10}{str(r['submodular']):>12}{str(r['subadditive']):>13}")
    return Report({"label": inst.label, "n": inst.n, "m": inst.m, "players": rows}, "\n".join(lines))


def cmd_local_search(args) -> Report:
    inst = _instance(args)
    start = _allocation(args, inst, required=False) or Allocation.empty(inst.n, inst.m)
    final, trace = local_search(inst, start)
    if args.trace:
        Path(args.trace).write_text(trace.jsonl())
    w = welfare(inst, final)
    payload = {"initial": list(start.owners), "final": list(final.owners),
               "welfare": fmt(w), "moves": trace.move_count}
    table = f"local optimum {final}  welfare {w}  after {trace.move_count} moves"
    return Report(payload, table)


def cmd_verify(args) -> Report:
    inst = _instance(args)
    alloc = _allocation(args, inst)
    raw = args.prices if args.prices is not None else _certificate_file(args).get("prices")
    if raw is None:
        raise InputError("--prices is required")
    prices = jsonio.parse_prices(raw, inst.m)
    cert = verify_endowed_equilibrium(inst, alloc, prices, _alpha(args))
    d = cert.to_dict()
    table = f"{d['verdict'].upper()}  allocation {alloc}  alpha {cert.alpha}"
    if d["witness"]:
        table += f"\nwitness {d['witness']}"
    return Report(d, table, OK if cert else VERDICT_NO)


def cmd_support(args) -> Report:
    inst = _instance(args)
    alloc = _allocation(args, inst, required=False)
    if args.method == "construct":
        if alloc is None:
            alloc = greedy_maximal(inst)
        sup = support_construct(inst, alloc)
        if sup is None:
            payload = {"verdict": "not_maximal", "allocation": list(alloc.owners)}
            return Report(payload, f"NOT MAXIMAL  {alloc}", VERDICT_NO)
        cert = verify_endowed_equilibrium(inst, alloc, sup.prices, sup.alpha)
    else:
        if alloc is None:
            alloc, _ = local_search(inst, Allocation.empty(inst.n, inst.m))
        try:
            cert = support_local_optimum(inst, alloc, _alpha(args, default=2))
        except PreconditionError as e:
            raise InputError(str(e)) from None
    d = cert.to_dict()
    table = (f"{d['verdict'].upper()}  allocation {alloc}  alpha {cert.alpha}\n"
             f"prices {' '.join(d['prices'])}")
    return Report(d, table, OK if cert else VERDICT_NO)


def cmd_lp_solve(args) -> Report:
    inst = _instance(args)
    x = solve_config_lp(inst)
    opt, best = integral_opt(inst)
    d = x.to_dict()
    d["integral_opt"] = fmt(opt)
    d["integral_allocation"] = list(best.owners)
    lines = [f"LP value {x.value}   integral OPT {opt}"]
    for w in d["weights"]:
        lines.append(f"  x[{w['player']}, {{{','.join(map(str, w['bundle']))}}}] = {w['weight']}")
    return Report(d, "\n".join(lines))


def cmd_gap(args) -> Report:
    inst = _instance(args)
    rep = endowment_gap_instance(inst, include_unsupportable=args.all)
    return Report(rep.to_dict(), rep.table(), OK if rep.endowment_gap is not None else VERDICT_NO)


def cmd_alpha_min(args) -> Report:
    inst = _instance(args)
    alloc = _allocation(args, inst)
    alpha = min_supporting_alpha(inst, alloc)
    if alpha is None:
        return Report({"allocation": list(alloc.owners), "alpha": None, "verdict": "unsupportable"},
                      f"UNSUPPORTABLE  {alloc}", VERDICT_NO)
    return Report({"allocation": list(alloc.owners), "alpha": fmt(alpha), "verdict": "supported",
                   "attained": True},
                  f"min alpha {alpha} (attained)  {alloc}")


def cmd_round(args) -> Report:
    inst = _instance(args)
    x = solve_config_lp(inst)
    try:
        res = round_two_player_subadditive(inst, x)
    except ValueError as e:
        raise InputError(str(e)) from None
    d = {"lp_value": fmt(x.value), "expected_welfare": fmt(res.expected_welfare),
         "bound": fmt(res.bound), "best": list(res.best.owners), "swapped": res.swapped}
    table = (f"LP value {x.value}  expected welfare {res.expected_welfare}  "
             f"bound {res.bound}\nbest {res.best}")
    return Report(d, table)


def cmd_perturb(args) -> Report:
    inst = _instance(args)
    delta = jsonio.parse_rational(args.delta, "delta")
    try:
        rep = perturbation_gap_check(inst, delta)
    except ValueError as e:
        raise InputError(str(e)) from None
    d = rep.to_dict()
    table = (f"y {rep.y}  delta {rep.delta}  eps {rep.eps}\n"
             f"integrality gap {rep.x_gap} (formula {rep.x_formula})\n"
             f"endowment gap {d['endowment_gap']}  lower bound {rep.lower_bound}  ok {rep.ok}")
    return Report(d, table, OK if rep.ok else VERDICT_NO)


def cmd_generate(args) -> Report:
    inst = _generate(args.name, _params(args.param), args.seed)
    d = jsonio.instance_to_dict(inst)
    return Report(d, dumps(d).rstrip("\n"))


# ---------------------------------------------------------------- parser


def _add_instance(p: argparse.ArgumentParser) -> None:
    p.add_argument("instance", nargs="?", help="instance JSON file, or '-' for stdin")
    p.add_argument("--gen", metavar="NAME", help="use a named generator instead of a file")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="generator parameter")
    p.add_argument("--seed", type=int, help="seed for random generators")
    p.add_argument("--format", choices=("json", "table"), default="json")


def _add_allocation(p: argparse.ArgumentParser) -> None:
    p.add_argument("--allocation", help="owner array, e.g. '[0,0,1,-1]'")
    p.add_argument("--certificate", help="JSON file with allocation, prices and alpha")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="endowgap",
                                     description="Endowed equilibria and endowment gaps, exactly.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("check", help="class checks for every player")
    _add_instance(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("local-search", help="single-item-move local search")
    _add_instance(p)
    _add_allocation(p)
    p.add_argument("--trace", metavar="FILE", help="write the moves as JSON lines")
    p.set_defaults(func=cmd_local_search)

    eq = sub.add_parser("equilibrium", help="verify or construct endowed equilibria")
    eqs = eq.add_subparsers(dest="action", required=True)
    p = eqs.add_parser("verify", help="check an (allocation, prices, alpha) triple")
    _add_instance(p)
    _add_allocation(p)
    p.add_argument("--prices", help="price array of \"p/q\" strings")
    p.add_argument("--alpha")
    p.set_defaults(func=cmd_verify)
    p = eqs.add_parser("support", help="build supporting prices")
    _add_instance(p)
    _add_allocation(p)
    p.add_argument("--method", choices=("construct", "local-optimum"), default="construct")
    p.add_argument("--alpha", help="alpha for the local-optimum method (default 2)")
    p.set_defaults(func=cmd_support)

    lp = sub.add_parser("lp", help="configuration LP")
    lps = lp.add_subparsers(dest="action", required=True)
    p = lps.add_parser("solve", help="optimal fractional solution")
    _add_instance(p)
    p.set_defaults(func=cmd_lp_solve)

    p = sub.add_parser("gap", help="integrality and endowment gaps over all allocations")
    _add_instance(p)
    p.add_argument("--all", action="store_true", help="list unsupportable allocations too")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("alpha-min", help="minimal supporting alpha of one allocation")
    _add_instance(p)
    _add_allocation(p)
    p.set_defaults(func=cmd_alpha_min)

    p = sub.add_parser("round", help="two-player subadditive rounding")
    _add_instance(p)
    p.set_defaults(func=cmd_round)

    p = sub.add_parser("perturb", help="perturbation amplification check")
    _add_instance(p)
    p.add_argument("--delta", default="1/10")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("generate", help="emit a named instance as JSON")
    p.add_argument("name", choices=sorted(GENERATORS))
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rep = args.func(args)
    except ValueError as e:
        # InputError, ValuationError and SizeError are all ValueErrors
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR
    out = dumps(rep.payload) if args.format == "json" else rep.table + "\n"
    sys.stdout.write(out)
    return rep.code

