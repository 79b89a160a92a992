"""
Progressive pruning arithmetic
==============================

Generating m candidates through t_total steps costs m * t_total model
evaluations. Keeping only a fraction rho of the pool after each step, never
dropping below the target group size k, cuts that to roughly m + k * t_total.
"""

from groupinfer import build_schedule, nfe_naive

# The headline configuration: 64 candidates, 20 steps, keep half each step,
# deliver a group of 4.
sched = build_schedule(m=64, k=4, rho=0.5, t_total=20)

print("pool size at each step:", list(sched.sizes))
print("pruning steps until the pool reaches k:", sched.t_star)
print("total evaluations:", sched.nfe)
print("without pruning:  ", nfe_naive(64, 20))
print(f"savings: {sched.savings_ratio():.2%}")

# The retention ratio trades compute against how much evidence each pruning
# decision sees.
print("\n rho   evaluations   savings")
for rho in (0.1, 0.25, 0.5, 0.75, 1.0):
    s = build_schedule(64, 4, rho, 20)
    print(f" {rho:<5} {s.nfe:>6}        {s.savings_ratio():>7.2%}")

# Rounding always keeps at least ceil(rho * pool): with rho close to 1 and a
# small pool the schedule can stall above k; the engine then finishes the
# cut with one final selection over fully generated samples.
stalled = build_schedule(5, 4, 0.9, 6)
print("\nstalled schedule (m=5, rho=0.9):", list(stalled.sizes))
