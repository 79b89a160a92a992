"""groupinfer: diversity-aware selection of k outputs from m candidates.

Scores a candidate pool with per-candidate quality and pairwise diversity
terms, solves the resulting cardinality-constrained quadratic binary
program, and (optionally) interleaves selection with the steps of an
iterative generator so that weak candidates are pruned long before they
are fully generated.
"""

__version__ = "0.1.0"

from .errors import BudgetError, ConfigError, ValidationError
from .qip import (
    ScoreSet, SelectionProblem, Selection,
    objective_value, brute_force, solve_exact, solve_greedy, solve, symmetrize,
)
from .schedule import PruneSchedule, build_schedule, next_pool_size, nfe_naive
from .scores import ScoreSpec, assemble, binary_scores, unary_scores
from .toygen import (
    MixtureSpec, FlowState, DenoiseOutput,
    default_four_mode_mixture, init_candidates, init_latents,
    posterior_mean, denoise_step, denoise_batch, make_timesteps,
)
from .engine import (
    CandidatePool, RunConfig, RunReport, StepRecord,
    group_inference, iid_baseline, final_select_baseline,
)
from .harness import (
    SweepSpec, SweepRow, SweepResult, StepCorrelation,
    run_sweep, spearman, correlate_run,
)

__all__ = [
    "BudgetError", "ConfigError", "ValidationError",
    "ScoreSet", "SelectionProblem", "Selection",
    "objective_value", "brute_force", "solve_exact", "solve_greedy", "solve", "symmetrize",
    "PruneSchedule", "build_schedule", "next_pool_size", "nfe_naive",
    "ScoreSpec", "assemble", "binary_scores", "unary_scores",
    "MixtureSpec", "FlowState", "DenoiseOutput",
    "default_four_mode_mixture", "init_candidates", "init_latents",
    "posterior_mean", "denoise_step", "denoise_batch", "make_timesteps",
    "CandidatePool", "RunConfig", "RunReport", "StepRecord",
    "group_inference", "iid_baseline", "final_select_baseline",
    "SweepSpec", "SweepRow", "SweepResult", "StepCorrelation",
    "run_sweep", "spearman", "correlate_run",
    "__version__",
]
