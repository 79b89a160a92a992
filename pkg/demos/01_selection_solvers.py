"""
Selecting a diverse, high-quality subset
========================================

The core primitive: given per-candidate quality scores u_i and pairwise
dissimilarity scores b_ij, pick exactly k candidates maximizing

    sum u_i  +  lambda * sum_{i<j} b_ij.
"""

import numpy as np

from groupinfer import (
    ScoreSet, SelectionProblem,
    brute_force, objective_value, solve, solve_exact, solve_greedy,
)

# A tiny instance small enough to check by hand. Candidate 0 has the best
# quality; candidates 0 and 1 are the most dissimilar pair.
scores = ScoreSet(
    unary=[3.0, 1.0, 2.0],
    binary=[[0.0, 4.0, 1.0],
            [4.0, 0.0, 2.0],
            [1.0, 2.0, 0.0]],
)
problem = SelectionProblem(scores, k=2, lam=1.0)

print("objective of {0,1}:", objective_value(problem, [0, 1]))
print("objective of {0,2}:", objective_value(problem, [0, 2]))
print("objective of {1,2}:", objective_value(problem, [1, 2]))

# Three routes to the same answer. Brute force enumerates every subset,
# branch-and-bound proves optimality without enumerating, greedy builds the
# set incrementally and then polishes with single swaps.
print("brute force:", brute_force(problem))
print("exact      :", solve_exact(problem))
print("greedy     :", solve_greedy(problem))

# On larger pools, `solve` picks the route for you: exact while the pool is
# small enough to prove optimality, greedy beyond that.
rng = np.random.default_rng(0)
n = 200
big = SelectionProblem(
    ScoreSet(
        unary=rng.uniform(0, 1, n),
        binary=(lambda m: (m + m.T) / 2 - np.diag(np.diag(m)))(rng.uniform(0, 1, (n, n))),
    ),
    k=6,
    lam=0.5,
)
selection = solve(big)
print(f"\nn={n}, k=6 via strategy={selection.strategy}: "
      f"indices {selection.indices}, objective {selection.objective:.4f}")

# The tradeoff weight steers the selection from pure quality (lambda = 0)
# toward pure diversity (large lambda).
for lam in (0.0, 0.5, 2.0, 8.0):
    sel = solve(SelectionProblem(scores, k=2, lam=lam))
    print(f"lambda={lam:<4} -> indices {sel.indices}")
