"""Experiment harness: parameter sweeps, rank correlation, preview analysis.

Sweeps run the engine across one axis (lambda, m, rho, or t_total) and a
seed list, emitting one tidy row per (value, seed) cell plus a bootstrap
standard error per value. The correlation analysis quantifies how well
preview scores at each step predict final-sample scores.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import os
import time
from dataclasses import dataclass, replace

import numpy as np

from .engine import RunConfig, group_inference
from .errors import BudgetError, ValidationError
from .scores import binary_scores, unary_scores
from .toygen import denoise_batch, init_latents, make_timesteps

SWEEP_AXES = ("lambda", "m", "rho", "t_total")
SWEEP_COLUMNS = (
    "axis", "value", "seed", "objective", "mean_unary", "mean_binary",
    "nfe", "wall_ms", "boot_se_objective",
)
WORKERS_ENV = "GROUPINFER_WORKERS"
BOOTSTRAP_RESAMPLES = 1000


def spearman(a, b) -> float | None:
    """Rank correlation of two equal-length vectors.

    Ties get average ranks. Returns None (rather than NaN) when either
    vector is constant, since the correlation is undefined there. Without
    ties the exact rank-difference form is used, so perfectly aligned or
    perfectly reversed inputs give exactly 1.0 and -1.0.
    """
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ValidationError(f"expected equal-length vectors, got shapes {x.shape} and {y.shape}")
    n = x.shape[0]
    if n < 2:
        raise ValidationError("need at least two observations")
    if np.all(x == x[0]) or np.all(y == y[0]):
        return None
    rx, x_tied = _average_ranks(x)
    ry, y_tied = _average_ranks(y)
    if not x_tied and not y_tied:
        d = rx.astype(int) - ry.astype(int)
        return 1.0 - (6 * int(np.sum(d * d))) / (n * (n * n - 1))
    rxc = rx - rx.mean()
    ryc = ry - ry.mean()
    denom = float(np.sqrt(np.sum(rxc * rxc) * np.sum(ryc * ryc)))
    return float(np.clip(np.sum(rxc * ryc) / denom, -1.0, 1.0))


def _average_ranks(values: np.ndarray) -> tuple[np.ndarray, bool]:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0])
    sorted_vals = values[order]
    i = 0
    tied = False
    while i < values.shape[0]:
        j = i
        while j + 1 < values.shape[0] and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        tied = tied or j > i
        i = j + 1
    return ranks, tied


@dataclass(frozen=True)
class SweepSpec:
    """One axis, its values, and the seeds to pair with each value."""

    base: RunConfig
    axis: str
    values: tuple
    seeds: tuple[int, ...]

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValidationError(f"axis must be one of {SWEEP_AXES}, got {self.axis!r}")
        if not self.values or not self.seeds:
            raise ValidationError("values and seeds must be nonempty")
        for value in self.values:
            self.config_for(value, self.seeds[0])  # validates each derived config

    def config_for(self, value, seed: int) -> RunConfig:
        field = {"lambda": "lam", "m": "m", "rho": "rho", "t_total": "t_total"}[self.axis]
        if field in ("m", "t_total"):
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValidationError(f"{self.axis} values must be integers, got {value!r}")
        else:
            value = float(value)
        return replace(self.base, **{field: value, "seed": seed})


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: object
    seed: int
    objective: float
    mean_unary: float
    mean_binary: float
    nfe: int
    wall_ms: float
    boot_se_objective: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for r in self.rows:
            writer.writerow([
                r.axis, repr(r.value) if isinstance(r.value, float) else r.value,
                r.seed, repr(r.objective), repr(r.mean_unary), repr(r.mean_binary),
                r.nfe, repr(r.wall_ms), repr(r.boot_se_objective),
            ])
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "SweepResult":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if tuple(header) != SWEEP_COLUMNS:
            raise ValidationError(f"unexpected sweep CSV header: {header}")
        rows = []
        for rec in reader:
            axis, value, seed, objective, mean_u, mean_b, nfe, wall, boot = rec
            rows.append(SweepRow(
                axis=axis, value=_parse_value(value), seed=int(seed),
                objective=float(objective), mean_unary=float(mean_u),
                mean_binary=float(mean_b), nfe=int(nfe), wall_ms=float(wall),
                boot_se_objective=float(boot),
            ))
        return SweepResult(rows=tuple(rows))


def _parse_value(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_sweep(spec: SweepSpec, workers: int | None = None, repeats: int = 1) -> SweepResult:
    """Run every (value, seed) cell and aggregate tidy rows.

    Rows come back value-major, seed-minor, no matter how many workers
    execute the cells. Wall time per cell is averaged over `repeats`
    identical runs. Each value's bootstrap standard error of the mean
    objective (1000 resamples over seeds) is attached to its rows.
    """
    if workers is None:
        workers = default_workers()
    cells = [(value, seed) for value in spec.values for seed in spec.seeds]

    def run_cell(cell):
        value, seed = cell
        cfg = spec.config_for(value, seed)
        try:
            elapsed = []
            for _ in range(max(1, repeats)):
                start = time.perf_counter()
                report = group_inference(cfg)
                elapsed.append((time.perf_counter() - start) * 1e3)
            return report, float(np.mean(elapsed))
        except (ValidationError, BudgetError) as exc:
            raise type(exc)(f"sweep cell (value={value!r}, seed={seed}): {exc}") from exc

    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_cell, cells))
    else:
        outcomes = [run_cell(cell) for cell in cells]

    rows: list[SweepRow] = []
    per_value = len(spec.seeds)
    for vi, value in enumerate(spec.values):
        chunk = outcomes[vi * per_value:(vi + 1) * per_value]
        objectives = np.array([rep.objective for rep, _ in chunk])
        boot_se = _bootstrap_se(objectives)
        for (report, wall), seed in zip(chunk, spec.seeds):
            rows.append(SweepRow(
                axis=spec.axis, value=value, seed=seed,
                objective=report.objective,
                mean_unary=report.mean_unary(),
                mean_binary=report.mean_binary(),
                nfe=report.nfe_counted, wall_ms=wall,
                boot_se_objective=boot_se,
            ))
    return SweepResult(rows=tuple(rows))


def _bootstrap_se(values: np.ndarray, resamples: int = BOOTSTRAP_RESAMPLES) -> float:
    if values.shape[0] < 2:
        return 0.0
    rng = np.random.default_rng(0)  # fixed stream: identical CSVs across runs
    picks = rng.integers(0, values.shape[0], size=(resamples, values.shape[0]))
    return float(np.std(values[picks].mean(axis=1)))


@dataclass(frozen=True)
class StepCorrelation:
    step: int
    unary: float | None
    binary: float | None


def correlate_run(cfg: RunConfig, sample_count: int = 512) -> list[StepCorrelation]:
    """Per-step rank correlation between preview scores and final scores.

    Needs rho == 1 so every candidate survives to the end. Unary scores are
    compared per candidate; binary scores over a fixed random sample of
    candidate pairs (all pairs when sample_count is large enough).
    """
    if cfg.rho != 1.0:
        raise ValidationError("correlate_run requires rho == 1 (no pruning)")
    if cfg.m < 2:
        raise ValidationError("need at least two candidates to correlate pairs")
    ts = make_timesteps(cfg.t_total)
    x = init_latents(cfg.seed, cfg.m, cfg.dimension)
    step_unary: list[np.ndarray] = []
    step_pairs: list[np.ndarray] = []

    rows_idx, cols_idx = np.triu_indices(cfg.m, k=1)
    total_pairs = rows_idx.shape[0]
    if sample_count < total_pairs:
        pick = np.random.default_rng(cfg.seed).choice(total_pairs, size=sample_count, replace=False)
        pick.sort()
        rows_idx, cols_idx = rows_idx[pick], cols_idx[pick]

    for j in range(cfg.t_total):
        previews, x = denoise_batch(x, float(ts[j]), float(ts[j + 1]), cfg.condition)
        step_unary.append(unary_scores(previews, cfg.condition, cfg.score_spec))
        step_pairs.append(binary_scores(previews, cfg.condition, cfg.score_spec)[rows_idx, cols_idx])

    final_unary = step_unary[-1]
    final_pairs = step_pairs[-1]
    return [
        StepCorrelation(
            step=j + 1,
            unary=spearman(step_unary[j], final_unary),
            binary=spearman(step_pairs[j], final_pairs),
        )
        for j in range(cfg.t_total)
    ]


def correlation_csv(rows: list[StepCorrelation]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", "spearman_unary", "spearman_binary"])
    for r in rows:
        writer.writerow([
            r.step,
            "" if r.unary is None else repr(r.unary),
            "" if r.binary is None else repr(r.binary),
        ])
    return buf.getvalue()
