from types import SimpleNamespace

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from rsudeploy.evolver.ranking import Ordering, epsilon_compare, nondominated_sort

from oracles import constrained_better, peel_fronts


def ind(f, phi):
    return SimpleNamespace(f=np.array(f, dtype=float), phi=float(phi))


def test_epsilon_compare_examples():
    assert epsilon_compare(ind([5, 5, 5], 0), ind([1, 1, 1], 5), 0) == Ordering.A_BETTER
    assert epsilon_compare(ind([1, 1, 1], 2), ind([2, 2, 2], 3), 10) == Ordering.A_BETTER
    assert epsilon_compare(ind([1, 1, 1], 4), ind([9, 9, 9], 2), 1) == Ordering.B_BETTER
    assert epsilon_compare(ind([1, 2, 3], 0), ind([3, 2, 1], 0), 0) == Ordering.INCOMPARABLE
    # equal violation above tolerance falls back to dominance
    assert epsilon_compare(ind([1, 1, 1], 7), ind([2, 2, 2], 7), 0) == Ordering.A_BETTER


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=3, max_size=3), st.lists(st.integers(0, 4), min_size=3, max_size=3),
       st.integers(0, 3), st.integers(0, 3), st.sampled_from([0.0, 1.0, 2.5, float("inf")]))
def test_epsilon_compare_is_asymmetric_and_matches_scalar_rule(fa, fb, pa, pb, eps):
    a, b = ind(fa, pa), ind(fb, pb)
    ab = epsilon_compare(a, b, eps)
    ba = epsilon_compare(b, a, eps)
    assert ab == -ba
    assert (ab == Ordering.A_BETTER) == constrained_better(fa, pa, fb, pb, eps)
    if pa == pb == 0 and eps == 0:
        dom = all(x <= y for x, y in zip(fa, fb)) and fa != fb
        assert (ab == Ordering.A_BETTER) == dom


def test_sort_examples():
    fronts, rank = nondominated_sort(np.array([[1.0, 2.0, 3.0]]), np.zeros(1))
    assert len(fronts) == 1 and rank.tolist() == [0]
    fronts, rank = nondominated_sort(np.array([[1.0, 2.0, 3.0], [3.0, 2.0, 1.0]]), np.zeros(2))
    assert rank.tolist() == [0, 0]
    fronts, rank = nondominated_sort(np.empty((0, 3)), np.empty(0))
    assert fronts == [] and len(rank) == 0


def test_sort_matches_brute_force_on_feasible_points():
    rng = np.random.default_rng(3)
    F = rng.integers(0, 6, size=(20, 3)).astype(float)
    _, rank = nondominated_sort(F, np.zeros(20), 0.0)
    assert rank.tolist() == peel_fronts(F.tolist(), [0.0] * 20, 0.0)


def test_fronts_partition_members():
    rng = np.random.default_rng(4)
    F = rng.random((40, 3))
    phi = np.where(rng.random(40) < 0.5, 0.0, rng.random(40) * 5)
    fronts, rank = nondominated_sort(F, phi, 1.0)
    joined = np.sort(np.concatenate(fronts))
    np.testing.assert_array_equal(joined, np.arange(40))
    for r, front in enumerate(fronts):
        assert (rank[front] == r).all()
