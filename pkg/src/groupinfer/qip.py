"""Solvers for cardinality-constrained quadratic binary selection.

The problem: from n candidates with per-candidate scores u_i and symmetric
pairwise scores b_ij, pick exactly k indices maximizing

    sum_{i in S} u_i  +  lam * sum_{i<j in S} b_ij.

Three routes are provided: an exhaustive oracle (`brute_force`), an exact
best-first branch-and-bound (`solve_exact`), and a greedy construction with
1-swap local search (`solve_greedy`). `solve` dispatches between them.

All solvers recompute the returned objective through one shared routine, so
results from different routes compare exactly, and all break ties toward the
lexicographically smallest sorted index list.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, ValidationError

DEFAULT_ENUMERATION_CAP = 10**7
DEFAULT_NODE_BUDGET = 100_000

# `auto` picks the exact route when the pool is small enough for branch-and-
# bound, or when full enumeration is provably tiny. Its exact attempt runs
# under a tighter node budget so that instances the bound cannot crack fall
# back to greedy quickly instead of burning the full exact budget first.
EXACT_SIZE_LIMIT = 40
EXACT_ENUM_LIMIT = 10**6
AUTO_NODE_BUDGET = 20_000

# Relative inflation applied to branch-and-bound upper bounds so float
# round-off can never prune a subtree holding an optimal (or tying) subset.
_BOUND_SLACK = 1e-12


def _as_locked_array(values, name: str, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ScoreSet:
    """Per-candidate scores `unary` (n,) and pairwise scores `binary` (n, n).

    `binary` must be exactly symmetric with a zero diagonal; asymmetric input
    is rejected rather than repaired (see `symmetrize` for an explicit fix).
    """

    unary: np.ndarray
    binary: np.ndarray

    def __post_init__(self):
        unary = _as_locked_array(self.unary, "unary", ndim=1)
        binary = _as_locked_array(self.binary, "binary", ndim=2)
        n = unary.shape[0]
        if n < 1:
            raise ValidationError("need at least one candidate")
        if binary.shape != (n, n):
            raise ValidationError(f"binary must be ({n}, {n}), got {binary.shape}")
        if not np.array_equal(binary, binary.T):
            raise ValidationError("binary matrix is not symmetric; use symmetrize() first if intended")
        if np.any(np.diagonal(binary) != 0.0):
            raise ValidationError("binary matrix must have a zero diagonal")
        object.__setattr__(self, "unary", unary)
        object.__setattr__(self, "binary", binary)

    @property
    def n(self) -> int:
        return self.unary.shape[0]


def symmetrize(matrix) -> np.ndarray:
    """Return 0.5 * (M + M.T) with the diagonal zeroed, for callers holding
    one-sided pairwise scores."""
    arr = np.array(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {arr.shape}")
    out = 0.5 * (arr + arr.T)
    np.fill_diagonal(out, 0.0)
    return out


@dataclass(frozen=True)
class SelectionProblem:
    """A ScoreSet plus target size k and tradeoff weight lam (>= 0)."""

    scores: ScoreSet
    k: int
    lam: float = 1.0

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or isinstance(self.k, bool):
            raise ValidationError(f"k must be an integer, got {self.k!r}")
        if not 1 <= self.k <= self.scores.n:
            raise ValidationError(f"k must be in [1, {self.scores.n}], got {self.k}")
        lam = float(self.lam)
        if not math.isfinite(lam) or lam < 0:
            raise ValidationError(f"lam must be a finite nonnegative number, got {self.lam!r}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "lam", lam)


@dataclass(frozen=True)
class Selection:
    """A chosen index set (sorted ascending) and its objective value."""

    indices: tuple[int, ...]
    objective: float
    strategy: str | None = None


def _subset_objective(u_rows: list[float], b_rows: list[list[float]], lam: float,
                      indices) -> float:
    # Single shared accumulation order: unary in ascending-index order, then
    # pairs (i, j), i < j, lexicographically. Every solver funnels through
    # here so objectives from different routes are bit-identical.
    total = 0.0
    for i in indices:
        total += u_rows[i]
    if lam != 0.0:
        pair_sum = 0.0
        for a, i in enumerate(indices):
            row = b_rows[i]
            for j in indices[a + 1:]:
                pair_sum += row[j]
        total += lam * pair_sum
    return total


def _score_lists(scores: ScoreSet) -> tuple[list[float], list[list[float]]]:
    return scores.unary.tolist(), scores.binary.tolist()


def _check_indices(p: SelectionProblem, indices) -> tuple[int, ...]:
    idx = tuple(int(i) for i in indices)
    if len(idx) != p.k:
        raise ValidationError(f"expected {p.k} indices, got {len(idx)}")
    if len(set(idx)) != len(idx):
        raise ValidationError("indices must be unique")
    for i in idx:
        if not 0 <= i < p.scores.n:
            raise ValidationError(f"index {i} out of range [0, {p.scores.n})")
    return tuple(sorted(idx))


def objective_value(p: SelectionProblem, indices) -> float:
    """Evaluate the selection objective for a given index set of size k."""
    idx = _check_indices(p, indices)
    u_rows, b_rows = _score_lists(p.scores)
    return _subset_objective(u_rows, b_rows, p.lam, idx)


def brute_force(p: SelectionProblem, enumeration_cap: int = DEFAULT_ENUMERATION_CAP) -> Selection:
    """Exhaustive oracle: enumerate all C(n, k) subsets and keep the best.

    Ties keep the lexicographically smallest sorted index list (enumeration
    order guarantees this). Refuses instances with C(n, k) above
    `enumeration_cap`.
    """
    n, k = p.scores.n, p.k
    count = math.comb(n, k)
    if count > enumeration_cap:
        raise BudgetError(
            f"C({n}, {k}) = {count} subsets exceeds the enumeration cap of {enumeration_cap}"
        )
    u_rows, b_rows = _score_lists(p.scores)
    best_obj = -math.inf
    best: tuple[int, ...] | None = None
    for combo in itertools.combinations(range(n), k):
        obj = _subset_objective(u_rows, b_rows, p.lam, combo)
        if obj > best_obj:
            best_obj = obj
            best = combo
    assert best is not None
    return Selection(indices=best, objective=best_obj, strategy="exact")


def solve_greedy(p: SelectionProblem) -> Selection:
    """Greedy construction plus 1-swap local search.

    Starts from the highest-unary candidate, then repeatedly adds the
    candidate with the largest marginal gain u_i + lam * sum_{j in S} b_ij.
    Afterwards, swaps one selected candidate for one outsider as long as a
    swap strictly improves the recomputed objective.
    """
    n, k, lam = p.scores.n, p.k, p.lam
    u = p.scores.unary
    B = p.scores.binary
    u_rows, b_rows = _score_lists(p.scores)

    if k == n:
        idx = tuple(range(n))
        return Selection(idx, _subset_objective(u_rows, b_rows, lam, idx), strategy="greedy")

    selected = np.zeros(n, dtype=bool)
    first = int(np.argmax(u))  # argmax takes the lowest index on ties
    selected[first] = True
    coupling = B[:, first].copy()  # coupling[i] = sum of b_ij over selected j
    for _ in range(k - 1):
        gains = u + lam * coupling
        gains[selected] = -np.inf
        pick = int(np.argmax(gains))
        selected[pick] = True
        coupling += B[:, pick]

    # 1-swap local search; each accepted swap must strictly improve the
    # cleanly recomputed objective, which guarantees termination.
    chosen = sorted(np.flatnonzero(selected).tolist())
    current = _subset_objective(u_rows, b_rows, lam, chosen)
    while True:
        sel = np.array(chosen)
        out = np.flatnonzero(~selected)
        if out.size == 0:
            break
        # delta[a, b]: replace sel[a] with out[b]; coupling excludes the
        # removed member's own pair term.
        delta = (u[out][None, :] - u[sel][:, None]) + lam * (
            (coupling[out][None, :] - B[np.ix_(sel, out)]) - coupling[sel][:, None]
        )
        flat = int(np.argmax(delta))
        if delta.ravel()[flat] <= 0.0:
            break
        a, b = divmod(flat, out.size)
        drop, add = int(sel[a]), int(out[b])
        trial = sorted(chosen[:])
        trial.remove(drop)
        trial.append(add)
        trial.sort()
        trial_obj = _subset_objective(u_rows, b_rows, lam, trial)
        if trial_obj <= current:
            break
        chosen = trial
        current = trial_obj
        selected[drop] = False
        selected[add] = True
        coupling += B[:, add] - B[:, drop]

    return Selection(tuple(chosen), current, strategy="greedy")


@dataclass(order=True)
class _Node:
    neg_bound: float
    seq: int
    pos: int = field(compare=False)
    slots: int = field(compare=False)
    partial: float = field(compare=False)
    chosen: tuple[int, ...] = field(compare=False)


class _SuffixTopSums:
    """cumulative(pos)[i, q] = sum of the q largest entries of B[i, pos:].

    Upper-bounds the pairwise mass candidate i can still collect from
    candidates not yet branched on. Built lazily per suffix position.
    """

    def __init__(self, B: np.ndarray, max_q: int):
        self._B = B
        self._max_q = max_q
        self._cache: dict[int, np.ndarray] = {}

    def at(self, pos: int) -> np.ndarray:
        table = self._cache.get(pos)
        if table is None:
            suffix = np.sort(self._B[:, pos:], axis=1)[:, ::-1]
            width = min(self._max_q, suffix.shape[1])
            cums = np.cumsum(suffix[:, :width], axis=1)
            table = np.zeros((self._B.shape[0], self._max_q + 1))
            table[:, 1:width + 1] = cums
            if width < self._max_q:
                table[:, width + 1:] = cums[:, -1:]
            self._cache[pos] = table
        return table


def solve_exact(p: SelectionProblem, node_budget: int = DEFAULT_NODE_BUDGET) -> Selection:
    """Best-first branch-and-bound over include/exclude decisions.

    The bound at a node with partial set S and r open slots adds, on top of
    the partial objective, the r largest "adjusted gains" among unbranched
    candidates, where candidate i's gain is
    u_i + lam * (coupling to S + half the sum of its r-1 largest remaining
    pairwise entries). Halving is what keeps the bound admissible: every
    pair inside the completion is counted once from each endpoint.

    Matches `brute_force` exactly, including the tie-break toward the
    lexicographically smallest index list. Raises BudgetError after
    expanding `node_budget` nodes.
    """
    n, k, lam = p.scores.n, p.k, p.lam
    u_rows, b_rows = _score_lists(p.scores)

    if k == n:
        idx = tuple(range(n))
        return Selection(idx, _subset_objective(u_rows, b_rows, lam, idx), strategy="exact")

    u = p.scores.unary
    B = p.scores.binary

    # Fully tied instance: every k-subset attains the same objective, so the
    # lexicographically smallest one wins outright. Without this shortcut the
    # tie-exploring search below would enumerate everything.
    off_diag = B[~np.eye(n, dtype=bool)]
    if np.all(u == u[0]) and (off_diag.size == 0 or np.all(off_diag == off_diag[0])):
        idx = tuple(range(k))
        return Selection(idx, _subset_objective(u_rows, b_rows, lam, idx), strategy="exact")

    # Static branching order: most promising candidates first, ties by index.
    row_desc = np.sort(B, axis=1)[:, ::-1]
    row_top = row_desc[:, :max(k - 1, 0)].sum(axis=1) if k > 1 else np.zeros(n)
    order = np.argsort(-(u + lam * 0.5 * row_top), kind="stable")
    uo = u[order]
    Bo = B[np.ix_(order, order)]
    original = order.tolist()

    tops = _SuffixTopSums(Bo, max_q=k - 1)

    warm = solve_greedy(p)
    best_obj = warm.objective
    best_set = warm.indices

    def settle(chosen_positions: tuple[int, ...]) -> None:
        nonlocal best_obj, best_set
        idx = tuple(sorted(original[c] for c in chosen_positions))
        obj = _subset_objective(u_rows, b_rows, lam, idx)
        if obj > best_obj or (obj == best_obj and idx < best_set):
            best_obj = obj
            best_set = idx

    def bound(pos: int, slots: int, partial: float, coupling: np.ndarray) -> float:
        gains = uo[pos:] + lam * (coupling[pos:] + 0.5 * tops.at(pos)[pos:, slots - 1])
        if gains.shape[0] > slots:
            top = np.partition(gains, gains.shape[0] - slots)[-slots:]
        else:
            top = gains
        value = partial + float(np.sum(top))
        return value + _BOUND_SLACK * (1.0 + abs(value))

    heap: list[_Node] = []
    seq = 0
    root_coupling = np.zeros(n)
    heapq.heappush(heap, _Node(-bound(0, k, 0.0, root_coupling), seq, 0, k, 0.0, ()))

    expanded = 0
    while heap:
        node = heapq.heappop(heap)
        if -node.neg_bound < best_obj:
            break  # max-heap: everything left is provably worse
        expanded += 1
        if expanded > node_budget:
            raise BudgetError(
                f"branch-and-bound expanded more than {node_budget} nodes "
                f"on an instance with n={n}, k={p.k}"
            )
        pos, slots, chosen = node.pos, node.slots, node.chosen
        remaining = n - pos
        if remaining == slots:
            settle(chosen + tuple(range(pos, n)))
            continue
        coupling = Bo[list(chosen)].sum(axis=0) if chosen else root_coupling

        # Include order[pos].
        inc_chosen = chosen + (pos,)
        if slots == 1:
            settle(inc_chosen)
        else:
            inc_partial = node.partial + uo[pos] + lam * coupling[pos]
            inc_coupling = coupling + Bo[pos]
            inc_bound = bound(pos + 1, slots - 1, inc_partial, inc_coupling)
            if inc_bound >= best_obj:
                seq += 1
                heapq.heappush(heap, _Node(-inc_bound, seq, pos + 1, slots - 1, inc_partial, inc_chosen))

        # Exclude order[pos].
        if remaining - 1 >= slots:
            exc_bound = bound(pos + 1, slots, node.partial, coupling)
            if exc_bound >= best_obj:
                seq += 1
                heapq.heappush(heap, _Node(-exc_bound, seq, pos + 1, slots, node.partial, chosen))

    return Selection(best_set, best_obj, strategy="exact")


def solve(p: SelectionProblem, strategy: str = "auto",
          node_budget: int | None = None) -> Selection:
    """Dispatch to the exact or greedy solver.

    `auto` tries the exact route for pools of at most EXACT_SIZE_LIMIT
    candidates (or provably tiny enumerations) and falls back to greedy if
    branch-and-bound overruns its node budget. `exact` propagates the
    budget error instead of falling back.
    """
    if strategy not in ("auto", "exact", "greedy"):
        raise ValidationError(f"unknown strategy {strategy!r}; expected auto, exact, or greedy")
    if strategy == "greedy":
        return solve_greedy(p)
    if strategy == "exact":
        return solve_exact(p, node_budget=node_budget or DEFAULT_NODE_BUDGET)
    n, k = p.scores.n, p.k
    if k == n:
        return solve_exact(p)  # unique feasible subset, no search
    if n <= EXACT_SIZE_LIMIT or math.comb(n, k) <= EXACT_ENUM_LIMIT:
        try:
            return solve_exact(p, node_budget=node_budget or AUTO_NODE_BUDGET)
        except BudgetError:
            return solve_greedy(p)
    return solve_greedy(p)
