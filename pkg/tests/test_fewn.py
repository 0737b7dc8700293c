import numpy as np
import pytest

from nexus_opt.fewn import (
    DEMAND_LOWER_BOUND,
    PENALTY,
    FewnProblem,
    ResourceTopology,
    decision_dim,
)
from oracles import fewn_objectives_bruteforce


def test_topology_rejects_degenerate_counts():
    with pytest.raises(ValueError):
        ResourceTopology(0, 1, 1, 1)
    with pytest.raises(ValueError):
        ResourceTopology(1, 1, 1, 0)


@pytest.mark.parametrize(
    "counts,expected",
    [((7, 7, 7, 6), 567), ((5, 5, 5, 6), 315), ((1, 1, 1, 1), 12)],
)
def test_decision_dim_examples(counts, expected):
    assert decision_dim(ResourceTopology(*counts)) == expected


def test_decision_dim_strictly_increasing_per_component():
    base = (3, 4, 5, 6)
    d0 = decision_dim(ResourceTopology(*base))
    for axis in range(4):
        bumped = list(base)
        bumped[axis] += 1
        assert decision_dim(ResourceTopology(*bumped)) > d0


def test_decode_zero_and_rowmajor():
    p = FewnProblem(ResourceTopology(1, 1, 1, 1))
    assert np.array_equal(p.decode(np.zeros(12)), np.zeros((3, 4)))
    m = p.decode(np.arange(12.0))
    for r in range(3):
        for c in range(4):
            assert m[r, c] == 4 * r + c


def test_decode_shape_error():
    p = FewnProblem(ResourceTopology(1, 1, 1, 1))
    with pytest.raises(ValueError):
        p.decode(np.zeros(11))
    with pytest.raises(ValueError):
        p.encode(np.zeros((4, 3)))


def test_encode_decode_roundtrip_random():
    p = FewnProblem(ResourceTopology(2, 3, 1, 2))
    rng = np.random.default_rng(7)
    for _ in range(100):
        v = rng.random(p.dim)
        assert np.array_equal(p.encode(p.decode(v)), v)


def test_consumption_summary_hand_example():
    p = FewnProblem(ResourceTopology(1, 1, 1, 1))
    m = np.array([[0, 2, 1, 1], [1, 0, 2, 1], [1, 2, 0, 1]], dtype=float)
    s = p.consumption_summary(m)
    assert s.water_total == 4 and s.energy_total == 4 and s.food_total == 4
    assert s.water_to_energy == 2
    assert s.water_to_food == 1
    assert s.food_to_water == 1
    assert s.energy_to_food == 2
    assert s.food_to_energy == 2


def test_consumption_summary_zero_matrix():
    p = FewnProblem(ResourceTopology(2, 2, 2, 3))
    s = p.consumption_summary(np.zeros(p.topology.shape))
    assert s.water_total == s.energy_total == s.food_total == 0
    for agg in (
        s.water_to_energy,
        s.water_to_food,
        s.food_to_water,
        s.energy_to_food,
        s.food_to_energy,
    ):
        assert agg == 0


def test_consumption_summary_matches_row_sums_randomly():
    rng = np.random.default_rng(21)
    for _ in range(50):
        top = ResourceTopology(*(int(v) for v in rng.integers(1, 5, size=4)))
        p = FewnProblem(top)
        m = rng.random(top.shape)
        s = p.consumption_summary(m)
        a, b, g = top.water, top.energy, top.food
        assert np.allclose(s.per_water, m[:a].sum(axis=1))
        assert np.allclose(s.per_energy, m[a : a + b].sum(axis=1))
        assert np.allclose(s.per_food, m[a + b :].sum(axis=1))
        assert np.isclose(s.water_total, sum(s.per_water))
        # Aggregates never exceed the consumption totals they draw from.
        assert 0 <= s.water_to_energy <= s.water_total + 1e-12
        assert 0 <= s.water_to_food <= s.water_total + 1e-12
        assert 0 <= s.food_to_water <= s.food_total + 1e-12
        assert 0 <= s.energy_to_food <= s.energy_total + 1e-12
        assert 0 <= s.food_to_energy <= s.food_total + 1e-12


def test_evaluate_hand_example():
    p = FewnProblem(ResourceTopology(1, 1, 1, 1))
    m = np.array([[0, 2, 1, 1], [1, 0, 2, 1], [1, 2, 0, 1]], dtype=float)
    f = p.objectives_from_matrix(m)
    assert np.allclose(f, [0.5, 0.25, 0.25, 0.5, 0.5])


def test_evaluate_demand_only_matrix_is_all_zero():
    top = ResourceTopology(2, 2, 2, 2)
    p = FewnProblem(top)
    m = np.zeros(top.shape)
    m[:, -top.demand :] = 0.5
    assert np.array_equal(p.objectives_from_matrix(m), np.zeros(5))


def test_evaluate_penalty_when_energy_consumption_zero():
    top = ResourceTopology(1, 1, 1, 1)
    p = FewnProblem(top)
    m = np.array([[0, 1, 1, 1], [0, 0, 0, 0], [1, 1, 0, 1]], dtype=float)
    f = p.objectives_from_matrix(m)
    assert f[0] == PENALTY and f[4] == PENALTY
    assert f[1] != PENALTY and f[2] != PENALTY and f[3] != PENALTY


def test_evaluate_against_bruteforce_oracle():
    rng = np.random.default_rng(5)
    for _ in range(50):
        counts = [int(v) for v in rng.integers(1, 6, size=4)]
        top = ResourceTopology(*counts)
        p = FewnProblem(top)
        m = rng.random(top.shape)
        got = p.objectives_from_matrix(m)
        want = fewn_objectives_bruteforce(m.tolist(), *counts)
        assert np.allclose(got, want, rtol=1e-12, atol=0)


def test_evaluate_batch_matches_single():
    top = ResourceTopology(3, 2, 4, 2)
    p = FewnProblem(top)
    rng = np.random.default_rng(11)
    lo, hi = p.bounds()
    X = rng.uniform(lo, hi, size=(40, p.dim))
    F = p.evaluate_batch(X)
    for i in range(len(X)):
        assert np.allclose(F[i], p.evaluate(X[i]), rtol=1e-14)


def test_evaluate_checks_bounds_and_shape():
    p = FewnProblem(ResourceTopology(1, 1, 1, 1))
    with pytest.raises(ValueError):
        p.evaluate(np.zeros(5))
    bad = np.full(12, 0.5)
    bad[0] = -0.2
    with pytest.raises(ValueError):
        p.evaluate(bad)
    bad = np.full(12, 0.5)
    bad[3] = 0.0  # demand column sits below its floor
    with pytest.raises(ValueError):
        p.evaluate(bad)


def test_bounds_layout():
    p = FewnProblem(ResourceTopology(1, 1, 1, 1))
    lo, hi = p.bounds()
    want = [0, 0, 0, DEMAND_LOWER_BOUND] * 3
    assert np.allclose(lo, want)
    assert np.array_equal(hi, np.ones(12))


def test_scale_invariance_of_objectives():
    rng = np.random.default_rng(13)
    p = FewnProblem(ResourceTopology(2, 3, 2, 2))
    for _ in range(40):
        m = rng.uniform(0.02, 0.1, size=p.topology.shape)
        f = p.objectives_from_matrix(m)
        for c in (0.5, 2.0, 10.0):
            assert np.allclose(p.objectives_from_matrix(c * m), f, rtol=1e-12)


def test_random_solution_determinism_and_bounds():
    p = FewnProblem(ResourceTopology(2, 2, 2, 2))
    lo, hi = p.bounds()
    a = p.random_solution(np.random.default_rng(42))
    b = p.random_solution(np.random.default_rng(42))
    c = p.random_solution(np.random.default_rng(43))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    for _ in range(100):
        v = p.random_solution(np.random.default_rng())
        assert np.all(v >= lo) and np.all(v <= hi)


def test_random_solution_uniform_mean():
    p = FewnProblem(ResourceTopology(1, 1, 1, 1))
    lo, hi = p.bounds()
    rng = np.random.default_rng(99)
    samples = np.array([p.random_solution(rng)[0] for _ in range(10_000)])
    sigma = (hi[0] - lo[0]) / np.sqrt(12.0) / np.sqrt(len(samples))
    assert abs(samples.mean() - 0.5 * (lo[0] + hi[0])) < 3 * sigma
