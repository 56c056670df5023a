"""Trigamma and tetragamma for positive real arguments."""

from __future__ import annotations

import math

__all__ = ["polygamma", "trigamma", "tetragamma"]

# the first omitted term, B12 / x^13, is ~1e-14 relative to 1/x^2 at x = 16
_SWITCH = 16.0

# Bernoulli numbers B2..B10
_B = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0)


def _trigamma_asymptotic(x: float) -> float:
    # psi'(x) ~ 1/x + 1/(2x^2) + sum_k B_2k / x^(2k+1)
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    for b in reversed(_B):
        series = series * inv2 + b
    return inv + 0.5 * inv2 + series * inv2 * inv


def _tetragamma_asymptotic(x: float) -> float:
    # psi''(x) ~ -1/x^2 - 1/x^3 - sum_k (2k+1) B_2k / x^(2k+2)
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    for k in range(len(_B), 0, -1):
        series = series * inv2 + (2 * k + 1) * _B[k - 1]
    return -inv2 - inv2 * inv - series * inv2 * inv2


def polygamma(order: int, x: float) -> float:
    """psi'(x) for ``order == 1`` and psi''(x) for ``order == 2``, x > 0.

    Shifts x upward with the recurrences psi'(x) = psi'(x+1) + 1/x^2 and
    psi''(x) = psi''(x+1) - 2/x^3 until x >= 16, then sums the asymptotic
    series through the B10 term.
    """
    if order not in (1, 2):
        raise ValueError(f"polygamma order must be 1 or 2, got {order!r}")
    x = float(x)
    if not x > 0 or math.isinf(x):
        raise ValueError(f"polygamma requires finite x > 0, got {x!r}")
    shift = 0.0
    if order == 1:
        while x < _SWITCH:
            shift += 1.0 / (x * x)
            x += 1.0
        return shift + _trigamma_asymptotic(x)
    while x < _SWITCH:
        shift -= 2.0 / (x * x * x)
        x += 1.0
    return shift + _tetragamma_asymptotic(x)


def trigamma(x: float) -> float:
    return polygamma(1, x)


def tetragamma(x: float) -> float:
    return polygamma(2, x)
