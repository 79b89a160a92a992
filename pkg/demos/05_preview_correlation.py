"""
Why previews are safe to prune on
=================================

Pruning mid-run only works if scores computed on previews rank candidates
the way final scores will. This measures that directly: the rank
correlation between step-j preview scores and final scores, per step.
"""

from groupinfer import RunConfig, correlate_run, default_four_mode_mixture

cfg = RunConfig(
    m=256, k=4, rho=1.0, t_total=20, lam=1.0, seed=0, dimension=2,
    condition=default_four_mode_mixture(),
)

rows = correlate_run(cfg, sample_count=512)

print(" step   quality-score corr   diversity-score corr")
for row in rows:
    unary = "undefined" if row.unary is None else f"{row.unary:.4f}"
    binary = "undefined" if row.binary is None else f"{row.binary:.4f}"
    print(f" {row.step:>4}   {unary:>15}   {binary:>18}")

print(
    "\nAt the very first step every preview is the same prior blend, so the\n"
    "correlation is undefined; within a couple of steps the ranking is\n"
    "nearly final, which is what makes early pruning cheap and safe."
)
