"""JSON form of instances, allocations and prices; rationals travel as "p/q" strings."""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Sequence

from .equilibrium import Allocation, Instance
from .valuations import ValuationError, from_dict, rational, to_dict


class InputError(ValueError):
    pass


def fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def dumps(obj: Any) -> str:
    """Canonical serialization: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def instance_to_dict(inst: Instance) -> dict:
    return {"label": inst.label, "m": inst.m,
            "players": [to_dict(v) for v in inst.valuations]}


def instance_from_dict(d: Any) -> Instance:
    if not isinstance(d, dict):
        raise InputError("instance JSON must be an object")
    for key in ("m", "players"):
        if key not in d:
            raise InputError(f"instance JSON is missing {key!r}")
    m = d["m"]
    if not isinstance(m, int) or isinstance(m, bool) or m < 0:
        raise InputError(f"'m' must be a nonnegative integer, got {m!r}")
    players = d["players"]
    if not isinstance(players, list) or not players:
        raise InputError("'players' must be a nonempty list")
    try:
        vals = tuple(from_dict(p, m) for p in players)
        return Instance(vals, label=str(d.get("label", "")))
    except (TypeError, ZeroDivisionError) as e:
        raise InputError(f"bad number in instance: {e}") from None
    except ValueError as e:
        if isinstance(e, ValuationError):
            raise
        raise InputError(str(e)) from None


def load_instance(text: str) -> Instance:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON: {e}") from None
    return instance_from_dict(d)


def parse_allocation(owners: Any, inst: Instance) -> Allocation:
    if isinstance(owners, str):
        try:
            owners = json.loads(owners)
        except json.JSONDecodeError as e:
            raise InputError(f"allocation is not a JSON array: {e}") from None
    if not isinstance(owners, list) or not all(
            isinstance(o, int) and not isinstance(o, bool) for o in owners):
        raise InputError("allocation must be an array of integer owners (-1 = unallocated)")
    if len(owners) != inst.m:
        raise InputError(f"allocation lists {len(owners)} owners for {inst.m} items")
    try:
        return Allocation(tuple(owners), inst.n)
    except ValueError as e:
        raise InputError(str(e)) from None


def parse_rational(x: Any, what: str = "value") -> Fraction:
    try:
        return rational(x)
    except (TypeError, ValueError, ZeroDivisionError):
        raise InputError(f"{what} {x!r} is not an exact rational") from None


def parse_prices(prices: Any, m: int) -> tuple[Fraction, ...]:
    if isinstance(prices, str):
        try:
            prices = json.loads(prices)
        except json.JSONDecodeError:
            prices = prices.split(",")
    if not isinstance(prices, list):
        raise InputError("prices must be an array of \"p/q\" strings")
    if len(prices) != m:
        raise InputError(f"expected {m} prices, got {len(prices)}")
    out = tuple(parse_rational(p, "price") for p in prices)
    if any(p < 0 for p in out):
        raise InputError("prices must be nonnegative")
    return out


def prices_to_list(prices: Sequence[Fraction]) -> list[str]:
    return [fmt(p) for p in prices]
