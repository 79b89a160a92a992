import numpy as np
import pytest

from groupinfer import ScoreSet, SelectionProblem, symmetrize


@pytest.fixture
def three_candidates() -> SelectionProblem:
    # Hand-enumerable: {0,1} -> 3+1+4 = 8, {0,2} -> 3+2+1 = 6, {1,2} -> 1+2+2 = 5.
    scores = ScoreSet(unary=[3.0, 1.0, 2.0],
                      binary=[[0.0, 4.0, 1.0], [4.0, 0.0, 2.0], [1.0, 2.0, 0.0]])
    return SelectionProblem(scores, k=2, lam=1.0)


def random_problem(rng: np.random.Generator, n: int, k: int, lam: float) -> SelectionProblem:
    unary = rng.uniform(0.0, 1.0, n)
    binary = symmetrize(rng.uniform(0.0, 1.0, (n, n)))
    return SelectionProblem(ScoreSet(unary, binary), k=k, lam=lam)
