"""
Parameter sweeps
================

Tidy one-row-per-(value, seed) sweeps over the tradeoff weight and the
initial pool size, the raw material for quality/diversity tradeoff curves
and compute-scaling curves. Writes CSV next to this script.
"""

from dataclasses import replace
from pathlib import Path

import numpy as np

from groupinfer import RunConfig, SweepSpec, default_four_mode_mixture, run_sweep

base = RunConfig(
    m=32, k=4, rho=0.5, t_total=20, lam=1.0, seed=0, dimension=2,
    condition=default_four_mode_mixture(),
)
out_dir = Path(__file__).resolve().parent / "output"
out_dir.mkdir(exist_ok=True)
seeds = tuple(range(20))

# Tradeoff sweep: larger lambda buys diversity with quality.
lam_sweep = run_sweep(SweepSpec(
    base=replace(base, rho=1.0, strategy="exact"),
    axis="lambda", values=(0.0, 0.5, 1.0, 2.0, 4.0), seeds=seeds,
))
path = out_dir / "sweep_lambda.csv"
path.write_text(lam_sweep.to_csv())
print(f"wrote {path}")
print(" lambda   mean quality   mean diversity")
for value in (0.0, 0.5, 1.0, 2.0, 4.0):
    rows = [r for r in lam_sweep.rows if r.value == value]
    print(f" {value:<7} {np.mean([r.mean_unary for r in rows]):>12.4f} "
          f"{np.mean([r.mean_binary for r in rows]):>15.4f}")

# Pool-size sweep: more candidates, better groups, sublinear extra cost.
m_sweep = run_sweep(SweepSpec(base=base, axis="m",
                              values=(4, 8, 16, 32, 64, 128), seeds=seeds))
path = out_dir / "sweep_m.csv"
path.write_text(m_sweep.to_csv())
print(f"\nwrote {path}")
print("  m     mean objective   evaluations")
for value in (4, 8, 16, 32, 64, 128):
    rows = [r for r in m_sweep.rows if r.value == value]
    print(f" {value:>4} {np.mean([r.objective for r in rows]):>15.4f} {rows[0].nfe:>12}")
