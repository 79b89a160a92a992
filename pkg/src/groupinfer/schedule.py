"""Analytic accounting for progressive candidate pruning.

A run starts with m candidates and keeps, after each step, a fraction rho of
the current pool (rounded up, never below the target size k). The schedule
records the pool size at every step, the crossover step at which the pool
first reaches k, and the total number of per-candidate model evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError


def _require_int(value, name: str, minimum: int) -> int:
    if not isinstance(value, (int,)) or isinstance(value, bool):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def next_pool_size(current: int, k: int, rho: float) -> int:
    """Pool size after one pruning step: max(k, ceil(rho * current)).

    The product is rounded to 9 decimals before ceil so float dust (for
    example 0.1 * 130 evaluating a hair above 13) cannot inflate the count.
    """
    return max(k, math.ceil(round(rho * current, 9)))


@dataclass(frozen=True)
class PruneSchedule:
    """Per-step pool sizes plus the derived evaluation counts.

    `sizes[j]` is the number of live candidates evaluated at step j+1;
    `t_star` is the number of pruning steps until the pool first reaches k
    (None when rho == 1, where no progressive pruning happens); `nfe` is the
    total count of single-candidate evaluations, sum(sizes).
    """

    m: int
    k: int
    rho: float
    t_total: int
    sizes: tuple[int, ...]
    t_star: int | None
    nfe: int

    def savings_ratio(self) -> float:
        """Fraction of evaluations saved versus running all m candidates
        for all steps: 1 - nfe / (m * t_total)."""
        return 1.0 - self.nfe / nfe_naive(self.m, self.t_total)


def build_schedule(m: int, k: int, rho: float, t_total: int) -> PruneSchedule:
    """Construct the pruning schedule for (m, k, rho, t_total).

    Sizes follow the recurrence size_{j+1} = max(k, ceil(rho * size_j)) with
    size_1 = m; for rho == 1 the pool never shrinks and selection happens
    once at the end. Note that for rho close to 1 the ceil can stall the
    recurrence above k (for example m=5, rho=0.9 never shrinks), in which
    case the final cut down to k is left to the selection pass after the
    last step.
    """
    m = _require_int(m, "m", 1)
    k = _require_int(k, "k", 1)
    t_total = _require_int(t_total, "t_total", 1)
    if m < k:
        raise ValidationError(f"m must be >= k, got m={m} < k={k}")
    rho = float(rho)
    if not (0.0 < rho <= 1.0) or not math.isfinite(rho):
        raise ValidationError(f"rho must be in (0, 1], got {rho!r}")

    sizes = []
    current = m
    for _ in range(t_total):
        sizes.append(current)
        if rho < 1.0:
            current = next_pool_size(current, k, rho)

    if rho == 1.0:
        t_star: int | None = None
    elif m == k:
        t_star = 0
    else:
        # Smallest integer t with rho^t * m <= k; snap near-integer ratios
        # so dyadic cases evaluate exactly.
        raw = math.log(k / m) / math.log(rho)
        nearest = round(raw)
        t_star = nearest if abs(raw - nearest) < 1e-9 else math.ceil(raw)

    return PruneSchedule(
        m=m, k=k, rho=rho, t_total=t_total,
        sizes=tuple(sizes), t_star=t_star, nfe=int(sum(sizes)),
    )


def nfe_naive(m: int, t_total: int) -> int:
    """Evaluation count without pruning: every candidate at every step."""
    m = _require_int(m, "m", 1)
    t_total = _require_int(t_total, "t_total", 1)
    return m * t_total
