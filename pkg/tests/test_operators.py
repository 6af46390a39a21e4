import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from rsudeploy.evolver.operators import calibrate, variation
from rsudeploy.objectives import make_deployment, spacing_violation
from rsudeploy.scenario import traffic_volume

from conftest import make_scenario


def test_identity_without_crossover_or_mutation(rng):
    p1 = rng.random(50) < 0.3
    p2 = rng.random(50) < 0.3
    c1, c2 = variation(p1, p2, 0.0, 0.0, rng)
    np.testing.assert_array_equal(c1, p1)
    np.testing.assert_array_equal(c2, p2)
    assert c1 is not p1


def test_crossover_of_identical_parents(rng):
    p = rng.random(50) < 0.3
    c1, c2 = variation(p, p.copy(), 1.0, 0.0, rng)
    np.testing.assert_array_equal(c1, p)
    np.testing.assert_array_equal(c2, p)


def test_uniform_crossover_takes_each_gene_from_a_parent(rng):
    p1 = np.zeros(200, bool)
    p2 = np.ones(200, bool)
    c1, c2 = variation(p1, p2, 1.0, 0.0, rng)
    np.testing.assert_array_equal(c1, ~c2)
    assert 0 < c1.sum() < 200


def test_mutation_toggles_at_most_n_mut_and_never_sets_obstacles(rng):
    obstacles = rng.random(100) < 0.3
    for _ in range(200):
        p = (rng.random(100) < 0.2) & ~obstacles
        c1, c2 = variation(p, p.copy(), 0.0, 1.0, rng, obstacles=obstacles, n_mut=3)
        for c in (c1, c2):
            assert np.sum(c != p) <= 3
            assert not (c & obstacles).any()


def _chain_scenario():
    # cells 0, 1, 2 on a 20 m grid; volumes 5, 9, 5 inside a 5 m radius
    traces = [[0]] * 5 + [[1]] * 9 + [[2]] * 5
    return make_scenario(6, 1, traces=traces)


def test_calibrate_chain_keeps_middle():
    s = _chain_scenario()
    assert [traffic_volume(s, c, 5.0) for c in (0, 1, 2)] == [5, 9, 5]
    out = calibrate(make_deployment(s, [0, 1, 2]), s, 30.0, radius_m=5.0)
    np.testing.assert_array_equal(np.flatnonzero(out), [1])


def test_calibrate_pair_keeps_higher_volume():
    traces = [[0]] * 5 + [[1]] * 3
    s = make_scenario(4, 1, traces=traces)
    out = calibrate(make_deployment(s, [0, 1]), s, 30.0, radius_m=5.0)
    np.testing.assert_array_equal(np.flatnonzero(out), [0])
    assert spacing_violation(s, out, 30.0) == 0


def test_calibrate_tie_drops_higher_index():
    s = make_scenario(4, 1, traces=[[0], [1]])
    out = calibrate(make_deployment(s, [0, 1]), s, 30.0, radius_m=5.0)
    np.testing.assert_array_equal(np.flatnonzero(out), [0])


def test_calibrate_leaves_spaced_genome_alone():
    s = make_scenario(5, 5, traces=[[0]])
    g = make_deployment(s, [0, 2, 4, 10, 12, 14])
    np.testing.assert_array_equal(calibrate(g, s, 30.0), g)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.6), st.floats(10.0, 90.0))
def test_calibrate_properties(seed, density, d_min):
    rng = np.random.default_rng(seed)
    s = make_scenario(8, 8, traces=[[int(c)] for c in rng.integers(0, 64, size=20)])
    g = rng.random(64) < density
    out = calibrate(g, s, d_min)
    assert not (out & ~g).any()
    assert spacing_violation(s, out, d_min) == 0
    np.testing.assert_array_equal(calibrate(out, s, d_min), out)
