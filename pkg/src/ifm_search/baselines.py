"""Reference success probabilities: classical search, ideal Grover, single-box IFM."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict


@dataclass(frozen=True)
class ComparisonRow:
    n_boxes: int
    queries: int
    classical: float
    grover: float
    ifm_grover: float
    small_cycles: int
    theta: float
    large_cycles: int

    def as_dict(self) -> dict:
        return asdict(self)


def classical_success(n_boxes: int, queries: int) -> float:
    """Best classical strategy: open ``queries`` distinct boxes."""
    if queries < 0:
        raise ValueError(f"queries must be >= 0, got {queries}")
    if queries > n_boxes:
        raise ValueError(f"queries ({queries}) exceeds n_boxes ({n_boxes})")
    return queries / n_boxes


def grover_success(n_boxes: int, iterations: int) -> float:
    """Ideal unitary-oracle Grover search after ``iterations`` oracle calls."""
    if n_boxes < 2:
        raise ValueError(f"n_boxes must be >= 2, got {n_boxes}")
    if iterations < 0:
        raise ValueError(f"iterations must be >= 0, got {iterations}")
    if iterations == 0:
        return 1.0 / n_boxes
    half_angle = math.asin(1.0 / math.sqrt(n_boxes))
    return math.sin((2 * iterations + 1) * half_angle) ** 2


def query_count(large_cycles: int, small_cycles: int) -> int:
    return large_cycles * small_cycles


def ifm_single(small_cycles: int, theta: float, bomb_present: bool) -> tuple[float, float]:
    """One photon through M passes of the single-box interferometer.

    Returns ``(explosion_probability, exit_angle)``; the exit state is
    cos(a)|H> + sin(a)|V>. Without a bomb the polarization simply turns by
    M*theta, with one it keeps being projected back to |H>.
    """
    if small_cycles < 1:
        raise ValueError(f"small_cycles must be >= 1, got {small_cycles}")
    if not bomb_present:
        return 0.0, small_cycles * theta
    return 1.0 - math.cos(theta) ** (2 * small_cycles), 0.0
