import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from croc.conformal import (
    aggregate_root,
    conch_pvalue,
    pvalue,
    pvalue_exact,
    pvalue_mc,
    pvalue_randomized,
    pvalue_table,
)
from croc.core import build_constraint_explicit, build_constraint_full_grid, root_index_sets
from croc.densities import GaussianModel, mle_changepoints
from croc.errors import EnumerationTooLarge, ValidationError
from croc.permute import RngSeed, group_size
from croc.scores import FunctionScore, constant_score, frozen_score, oracle_score, single_stream

from conftest import random_gaussian_case

VALUE_AT_2 = FunctionScore(lambda v, t: v[1, 0])
PANEL = np.array([[0.0], [1.0], [2.0]])


def test_exact_examples():
    assert pvalue_exact(constant_score(), np.zeros((5, 2)), (2, 3)) == 1.0
    assert pvalue_exact(VALUE_AT_2, PANEL, (1,)) == 0.5


def test_exact_lower_bound(rng):
    for _ in range(20):
        n = int(rng.integers(2, 6))
        X = rng.normal(size=(n, 2))
        t = tuple(int(v) for v in rng.integers(1, n + 1, size=2))
        S = FunctionScore(lambda v, t: float(v[:, 0] @ np.arange(len(v)) - v[-1, 1]))
        assert pvalue_exact(S, X, t) >= 1 / group_size(t, n)


def test_exact_cap():
    with pytest.raises(EnumerationTooLarge, match="Monte Carlo"):
        pvalue_exact(constant_score(), np.zeros((12, 1)), (6,), cap=100)


def test_mc_examples(rng):
    X = rng.normal(size=(8, 2))
    assert pvalue_mc(VALUE_AT_2, X, (4, 4), M=0) == 1.0
    assert pvalue_mc(constant_score(), X, (4, 4), M=37, seed=3) == 1.0
    with pytest.raises(ValidationError):
        pvalue_mc(VALUE_AT_2, X, (4, 4), M=-1)


def test_mc_grid_and_determinism(rng):
    X = rng.normal(size=(10, 2))
    S = FunctionScore(lambda v, t: float(v[0, 0] - v[9, 1]))
    M = 40
    a = pvalue_mc(S, X, (5, 5), M, RngSeed(8, (2,)))
    assert a == pvalue_mc(S, X, (5, 5), M, RngSeed(8, (2,)))
    assert_allclose(a * (M + 1), round(a * (M + 1)), atol=1e-9)
    assert 1 / (M + 1) <= a <= 1


def test_mc_close_to_exact():
    X = np.array([[0.3], [-1.1], [0.8], [2.0], [0.1]])
    S = FunctionScore(lambda v, t: float(v[0, 0] + 2 * v[1, 0] - v[4, 0]))
    exact = pvalue_exact(S, X, (3,))
    close = sum(abs(pvalue_mc(S, X, (3,), 5000, s) - exact) <= 0.03 for s in range(20))
    assert close >= 19


def test_randomized_examples():
    S = constant_score()
    X = np.zeros((4, 1))
    assert pvalue_randomized(S, X, (2,), 0.0) == 0.0
    assert pvalue_randomized(S, X, (2,), 1.0) == 1.0
    with pytest.raises(ValidationError):
        pvalue_randomized(S, X, (2,), 1.5)


@pytest.mark.parametrize("u", [0.0, 0.3, 1.0])
def test_randomized_without_ties(u):
    X = np.array([[0.2], [1.7], [-0.4]])
    S = FunctionScore(lambda v, t: float(v[0, 0] * 3 + v[1, 0] * 5 + v[2, 0] * 7))
    size = group_size((2,), 3)
    assert_allclose(pvalue_randomized(S, X, (2,), u), pvalue_exact(S, X, (2,)) - (1 - u) / size)


def test_randomized_with_ties_strictly_smaller_at_zero():
    X = np.array([[1.0], [1.0], [3.0], [2.0]])
    S = FunctionScore(lambda v, t: float(v[0, 0]))
    assert pvalue_randomized(S, X, (2,), 1.0) == pvalue_exact(S, X, (2,))
    assert pvalue_randomized(S, X, (2,), 0.0) < pvalue_exact(S, X, (2,))


def test_aggregate_root_examples():
    R = build_constraint_explicit(5, 2, [(1, 4), (2, 4), (4, 1)])
    I = root_index_sets(R)
    root = aggregate_root({(1, 4): 0.2, (2, 4): 0.7, (4, 1): 0.05}, I)
    assert root[0] == 0.7 and root[1] == 0.05
    R = build_constraint_explicit(5, 2, [(1, 4)])
    root = aggregate_root({(1, 4): 0.4}, root_index_sets(R))
    assert root[0] == 0.4
    assert root[1] == 0.0 and root.excluded[1]
    with pytest.raises(KeyError, match=r"\(1, 4\)"):
        aggregate_root({}, root_index_sets(R))


def test_conch_examples(rng):
    assert conch_pvalue(lambda x, t: 0.0, rng.normal(size=6), 3, 0) == 1.0
    assert conch_pvalue(lambda x, t: float(x[1]), [0.0, 1.0, 2.0], 1, 0) == 0.5
    x = rng.normal(size=6)
    f = lambda x, t: float(x[:t].mean() - x[t:].mean())
    for t in (1, 3, 5):
        assert conch_pvalue(f, x, t, 0) == pvalue_exact(single_stream(f), x[:, None], (t,))
        assert conch_pvalue(f, x, t, 50, 4) == pvalue(single_stream(f), x[:, None], (t,), 50, 4)


def test_pvalue_table_seeds_per_config(rng):
    X = rng.normal(size=(6, 2))
    R = build_constraint_full_grid(6, 2)
    S = oracle_score(GaussianModel([0, 0], 1, [1, 1], 1))
    a = pvalue_table(S, X, R, 30, RngSeed(5))
    b = pvalue_table(S, X, R, 30, RngSeed(5))
    assert a.pvalues == b.pvalues and len(a) == 36
    assert all(0 < p <= 1 for p in a.pvalues.values())
    assert a.method == "mc(30)"


@pytest.mark.parametrize("alpha", [0.05, 0.1, 0.2])
def test_super_uniform_at_truth(alpha):
    reps = 400
    rng = np.random.default_rng(123)
    hits = 0
    for r in range(reps):
        X, xi, model = random_gaussian_case(rng, 10, 2)
        hits += pvalue_mc(oracle_score(model), X, xi, 50, RngSeed(77, (r,))) <= alpha
    se = np.sqrt(alpha * (1 - alpha) / reps)
    assert hits / reps <= alpha + 3 * se


def test_learned_and_frozen_pvalues_ordered(rng):
    # S(pi X) <= S_frozen(pi X) with equality at the identity, so every
    # indicator that fires for the frozen score also fires for the learned one
    for r in range(30):
        X, xi, model = random_gaussian_case(rng, 12, 2)
        est = mle_changepoints(X, model)
        learned, frozen = oracle_score(model), frozen_score(model, est)
        for t in itertools.product((2, 6, 10), repeat=2):
            seed = RngSeed(r, t)
            assert pvalue_mc(learned, X, t, 40, seed) >= pvalue_mc(frozen, X, t, 40, seed)
