"""Efficiency statistics: how many map applications each automaton performs.

The efficiency of an input n under one automaton is the number of its map's
applications needed to reach 1, divided by the total stopping time of n under
the plain Collatz map T (3n+1 / n/2).  Fewer rows for the same trajectory
means a smaller ratio: each automaton folds one or more halvings into its odd
step.  Ratios are kept as exact rationals and only rendered to decimals at
the output boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .digits import DEFAULT_STEP_CAP, oracle_trajectory, total_stopping_time
from .rules import CAVariant


@dataclass
class EfficiencyRecord:
    n: int
    variant: CAVariant
    ca_steps: int
    tst: int
    ratio: Fraction

    @property
    def decimal(self) -> str:
        return f"{float(self.ratio):.6f}"


def n_efficiency(n: int, variant: CAVariant, cap: int = DEFAULT_STEP_CAP) -> EfficiencyRecord:
    """ca_steps(n) / tst(n) as an exact fraction.

    ca_steps counts applications of the variant's map from its starting value
    (n itself, except the base-2 automaton starts from the odd part of n, its
    trailing zero bits being implicit halvings).  For powers of two that start
    is already 1, so the base-2 ratio can be 0; otherwise ratios lie in (0, 1].
    """
    if n < 2:
        raise ValueError("efficiency is defined for n >= 2")
    tst = total_stopping_time(n, cap)
    if tst is None:
        raise RuntimeError(f"{n} did not reach 1 within {cap} steps of T")
    trip = oracle_trajectory(variant.map_variant, n, cap)
    if trip.steps_to_one is None:
        raise RuntimeError(f"{n} did not reach 1 within {cap} steps of {variant.value}")
    return EfficiencyRecord(
        n=n,
        variant=variant,
        ca_steps=trip.steps_to_one,
        tst=tst,
        ratio=Fraction(trip.steps_to_one, tst),
    )


def average_efficiency(
    lo: int, hi: int, variant: CAVariant, cap: int = DEFAULT_STEP_CAP
) -> Fraction:
    """Arithmetic mean of n_efficiency over [lo, hi], exact."""
    if not 2 <= lo <= hi:
        raise ValueError("need 2 <= lo <= hi")
    total = Fraction(0)
    for n in range(lo, hi + 1):
        total += n_efficiency(n, variant, cap).ratio
    return total / (hi - lo + 1)
