"""Named fans and divisors used by the suites and demos."""

from __future__ import annotations

from .divisor import ToricDivisor
from .fan import Fan


def p1() -> Fan:
    return Fan(1, [[1], [-1]], [[0], [1]], name="P1")


def p2() -> Fan:
    return Fan(2, [[1, 0], [0, 1], [-1, -1]], [[0, 1], [1, 2], [0, 2]], name="P2")


def p1xp1() -> Fan:
    return Fan(2, [[1, 0], [0, 1], [-1, 0], [0, -1]], [[0, 1], [1, 2], [2, 3], [0, 3]], name="P1xP1")


def hirzebruch(a: int = 1) -> Fan:
    """F_a with rays e1, e2, -e1 + a e2, -e2."""
    return Fan(2, [[1, 0], [0, 1], [-1, a], [0, -1]], [[0, 1], [1, 2], [2, 3], [0, 3]],
               name=f"F{a}")


def a1() -> Fan:
    return Fan(1, [[1]], [[0]], name="A1")


def a2() -> Fan:
    return Fan(2, [[1, 0], [0, 1]], [[0, 1]], name="A2")


def o_p1(a: int) -> ToricDivisor:
    """A divisor of degree a on P1 (coefficients split as evenly as possible)."""
    return ToricDivisor((a - a // 2, a // 2))


def o_p2(k: int) -> ToricDivisor:
    return ToricDivisor((0, 0, k))


def o_p1xp1(a: int, b: int) -> ToricDivisor:
    return ToricDivisor((0, 0, a, b))


FANS = {"p1": p1, "p2": p2, "p1xp1": p1xp1, "f1": hirzebruch, "a1": a1, "a2": a2}


def fan_by_name(name: str) -> Fan:
    try:
        return FANS[name.lower()]()
    except KeyError:
        raise KeyError(f"unknown fan preset {name!r}; choose from {sorted(FANS)}") from None
