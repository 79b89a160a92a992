"""Group-inference loop: advance, score previews, select, prune, repeat.

Every live candidate is advanced one step; while the pool is larger than
the target size k, preview scores feed a selection problem whose solution
decides who survives. Survivor sets are nested across steps, so the final
group is a subset of every earlier pool. Runs are deterministic functions
of their configuration.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BudgetError, ValidationError
from .qip import Selection, SelectionProblem, objective_value, solve
from .schedule import build_schedule, next_pool_size
from .scores import ScoreSpec, assemble, binary_scores, unary_scores
from .toygen import MixtureSpec, denoise_batch, init_latents, make_timesteps

REPORT_SCHEMA = "groupinfer/report/v1"


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on; two runs with equal configs produce
    identical selections and evaluation counts."""

    m: int
    k: int
    rho: float
    t_total: int
    lam: float
    seed: int
    dimension: int
    condition: MixtureSpec
    score_spec: ScoreSpec = field(default_factory=ScoreSpec)
    strategy: str = "auto"
    normalize_scores: bool = False

    def __post_init__(self):
        build_schedule(self.m, self.k, self.rho, self.t_total)  # validates m, k, rho, t_total
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValidationError(f"lam must be finite and >= 0, got {self.lam!r}")
        if self.dimension != self.condition.dimension:
            raise ValidationError(
                f"dimension {self.dimension} does not match the condition's {self.condition.dimension}"
            )
        if self.strategy not in ("auto", "exact", "greedy"):
            raise ValidationError(f"unknown solver strategy {self.strategy!r}")

    def to_dict(self) -> dict:
        return {
            "m": self.m, "k": self.k, "rho": self.rho, "steps": self.t_total,
            "lambda": self.lam, "seed": self.seed, "dimension": self.dimension,
            "condition": {
                "sigma": self.condition.sigma,
                "components": [
                    {"weight": float(w), "mean": [float(v) for v in mu]}
                    for w, mu in zip(self.condition.weights, self.condition.means)
                ],
            },
            "scores": {"unary": self.score_spec.unary_kind, "binary": self.score_spec.binary_kind},
            "strategy": self.strategy,
            "normalize_scores": self.normalize_scores,
        }


@dataclass
class CandidatePool:
    """Mutable run state: all latents, the live index set, and the latest
    previews for live candidates. Live sets only ever shrink."""

    latents: np.ndarray
    alive: list[int]
    previews: np.ndarray | None = None
    stream_seed: int = 0


@dataclass(frozen=True)
class StepRecord:
    step: int
    pool_size: int
    selected: tuple[int, ...]
    strategy: str | None
    wall_ms: float


@dataclass(frozen=True)
class RunReport:
    """Outcome of one run: the chosen group, its scores, per-step records,
    and the evaluation accounting."""

    config: RunConfig
    final_indices: tuple[int, ...]
    final_samples: np.ndarray
    final_unary: np.ndarray
    final_binary: np.ndarray
    objective: float
    steps: tuple[StepRecord, ...]
    final_solve_strategy: str | None
    nfe_counted: int
    nfe_predicted: int
    total_wall_ms: float

    def mean_unary(self) -> float:
        return float(np.mean(self.final_unary))

    def mean_binary(self) -> float:
        """Mean pairwise score over unordered selected pairs (0 for k=1)."""
        k = self.final_binary.shape[0]
        if k < 2:
            return 0.0
        return float(np.sum(self.final_binary) / (k * (k - 1)))

    def to_dict(self, include_timings: bool = False) -> dict:
        steps = []
        for rec in self.steps:
            row = {
                "step": rec.step,
                "pool_size": rec.pool_size,
                "selected": list(rec.selected),
                "strategy": rec.strategy,
            }
            if include_timings:
                row["wall_ms"] = rec.wall_ms
            steps.append(row)
        out = {
            "schema": REPORT_SCHEMA,
            "config": self.config.to_dict(),
            "final_indices": list(self.final_indices),
            "final_samples": [[float(v) for v in row] for row in self.final_samples],
            "objective": self.objective,
            "mean_unary": self.mean_unary(),
            "mean_binary": self.mean_binary(),
            "steps": steps,
            "final_solve_strategy": self.final_solve_strategy,
            "nfe_counted": self.nfe_counted,
            "nfe_predicted": self.nfe_predicted,
        }
        if include_timings:
            out["total_wall_ms"] = self.total_wall_ms
        return out

    def to_json(self, include_timings: bool = False) -> str:
        # Timings are excluded by default so equal configs serialize to
        # byte-identical documents.
        return json.dumps(self.to_dict(include_timings=include_timings),
                          sort_keys=True, indent=2)

    def step_rows(self) -> list[dict]:
        return [
            {
                "step": rec.step, "pool_size": rec.pool_size,
                "strategy": rec.strategy or "", "wall_ms": rec.wall_ms,
                "selected": ";".join(str(i) for i in rec.selected),
            }
            for rec in self.steps
        ]


def _zscore(values: np.ndarray) -> np.ndarray:
    std = float(np.std(values))
    if std == 0.0:
        return np.zeros_like(values)
    return (values - float(np.mean(values))) / std


def _zscore_offdiag(matrix: np.ndarray) -> np.ndarray:
    n = matrix.shape[0]
    if n < 2:
        return np.zeros_like(matrix)
    mask = ~np.eye(n, dtype=bool)
    vals = matrix[mask]
    std = float(np.std(vals))
    out = np.zeros_like(matrix)
    if std > 0.0:
        out[mask] = (matrix[mask] - float(np.mean(vals))) / std
    return out


def _solve_on_previews(previews: np.ndarray, cfg: RunConfig, target: int,
                       step_label: str) -> Selection:
    unary = unary_scores(previews, cfg.condition, cfg.score_spec)
    binary = binary_scores(previews, cfg.condition, cfg.score_spec)
    if cfg.normalize_scores:
        unary = _zscore(unary)
        binary = _zscore_offdiag(binary)
    problem = SelectionProblem(assemble(unary, binary), k=target, lam=cfg.lam)
    try:
        return solve(problem, strategy=cfg.strategy)
    except BudgetError as exc:
        raise BudgetError(f"{step_label}: {exc}") from exc


def group_inference(cfg: RunConfig) -> RunReport:
    """Run the full prune-as-you-go loop and report the selected group.

    At each step the live candidates advance once and, if the scheduled
    pool size shrinks, their previews are scored and a selection of size
    max(k, ceil(rho * pool)) decides the survivors. Once the pool is down
    to k no further solving happens. If the pool is still larger than k
    after the last step (rho == 1, or a stalled schedule), one final
    selection over fully generated samples cuts it to k.
    """
    run_start = time.perf_counter()
    sched = build_schedule(cfg.m, cfg.k, cfg.rho, cfg.t_total)
    ts = make_timesteps(cfg.t_total)
    pool = CandidatePool(
        latents=init_latents(cfg.seed, cfg.m, cfg.dimension),
        alive=list(range(cfg.m)),
        stream_seed=cfg.seed,
    )
    nfe = 0
    records: list[StepRecord] = []

    for j in range(cfg.t_total):
        step_start = time.perf_counter()
        pool_size = len(pool.alive)
        previews, advanced = denoise_batch(
            pool.latents[pool.alive], float(ts[j]), float(ts[j + 1]), cfg.condition
        )
        nfe += pool_size
        pool.latents[pool.alive] = advanced
        pool.previews = previews
        strategy_used = None
        if pool_size > cfg.k and cfg.rho < 1.0:
            target = next_pool_size(pool_size, cfg.k, cfg.rho)
            if target < pool_size:
                sel = _solve_on_previews(previews, cfg, target, f"step {j + 1}")
                pool.alive = [pool.alive[i] for i in sel.indices]
                pool.previews = previews[list(sel.indices)]
                strategy_used = sel.strategy
        records.append(StepRecord(
            step=j + 1, pool_size=pool_size, selected=tuple(pool.alive),
            strategy=strategy_used,
            wall_ms=(time.perf_counter() - step_start) * 1e3,
        ))

    finals = pool.latents[pool.alive]
    final_solve_strategy = None
    if len(pool.alive) > cfg.k:
        sel = _solve_on_previews(finals, cfg, cfg.k, "final selection")
        pool.alive = [pool.alive[i] for i in sel.indices]
        finals = pool.latents[pool.alive]
        final_solve_strategy = sel.strategy

    final_unary = unary_scores(finals, cfg.condition, cfg.score_spec)
    final_binary = binary_scores(finals, cfg.condition, cfg.score_spec)
    group_problem = SelectionProblem(assemble(final_unary, final_binary), k=cfg.k, lam=cfg.lam)
    return RunReport(
        config=cfg,
        final_indices=tuple(pool.alive),
        final_samples=finals,
        final_unary=final_unary,
        final_binary=final_binary,
        objective=objective_value(group_problem, tuple(range(cfg.k))),
        steps=tuple(records),
        final_solve_strategy=final_solve_strategy,
        nfe_counted=nfe,
        nfe_predicted=sched.nfe,
        total_wall_ms=(time.perf_counter() - run_start) * 1e3,
    )


def iid_baseline(cfg: RunConfig) -> RunReport:
    """Take the first k seeded candidates to completion with no selection.

    Because pools are prefix-stable, these are exactly the first k
    candidates of any larger pool under the same seed. The objective is
    still evaluated on the result for comparison purposes.
    """
    return group_inference(replace(cfg, m=cfg.k, rho=1.0))


def final_select_baseline(cfg: RunConfig) -> RunReport:
    """Generate all m candidates fully (no pruning), then select once on
    the finished samples. Costs m * t_total evaluations."""
    return group_inference(replace(cfg, rho=1.0))
