import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppga.geometry import project
from ppga.model import Instance, feasible_region, max_utility, utility


def inst(sizes, c, ballots):
    return Instance.from_approvals(sizes, c, ballots)


@pytest.mark.parametrize(
    "sizes, bounds",
    [
        ([0.5, 2.0], [0.5, 1.0]),
        ([1.0, 3.0, 7.0], [1.0, 1.0, 1.0]),
        ([0.1, 0.3, 0.9], [0.1, 0.3, 0.9]),
    ],
)
def test_feasible_region_caps(sizes, bounds):
    region = feasible_region(inst(sizes, 1.0, [[0]]))
    np.testing.assert_allclose(region.bounds, bounds, rtol=0, atol=0)
    assert region.total_cap == 1.0


def test_caps_scale_with_capacity():
    region = feasible_region(inst([100.0, 300.0], 200.0, [[0]]))
    np.testing.assert_array_equal(region.bounds, [0.5, 1.0])


def test_utility_examples():
    i = inst([1, 1, 1], 1, [[0, 2], [], [0, 1, 2]])
    assert utility(i, 0, [0.3, 0.5, 0.2]) == pytest.approx(0.5)
    assert utility(i, 1, [0.3, 0.5, 0.2]) == 0.0
    assert utility(i, 2, [0.3, 0.5, 0.2]) == pytest.approx(1.0)
    with pytest.raises(IndexError):
        utility(i, 3, [0, 0, 0])


def test_max_utility_examples():
    i = inst([0.1, 0.2, 1.2, 1.2], 1, [[0, 1], [2, 3], []])
    assert max_utility(i, 0) == pytest.approx(0.3)
    assert max_utility(i, 1) == 1.0
    assert max_utility(i, 2) == 0.0


def test_construction_rejects_bad_input():
    with pytest.raises(ValueError):
        inst([1.0, 0.0], 1.0, [[0]])
    with pytest.raises(ValueError):
        inst([1.0], -1.0, [[0]])
    with pytest.raises(ValueError):
        inst([1.0], 1.0, [[1]])
    with pytest.raises(ValueError):
        inst([1.0], 1.0, [])


def test_duplicate_approvals_are_merged():
    i = inst([1, 1], 1, [[1, 1, 0, 1]])
    assert i.approvals(0).tolist() == [0, 1]
    assert utility(i, 0, [0.25, 0.5]) == pytest.approx(0.75)


def test_vectorized_utilities_match_scalar():
    rng = np.random.default_rng(3)
    ballots = [sorted(rng.choice(6, size=rng.integers(0, 4), replace=False).tolist()) for _ in range(40)]
    i = inst(rng.uniform(0.1, 2, 6), 1.0, ballots)
    z = project(rng.normal(size=6), i.region()).point
    np.testing.assert_allclose(i.utilities(z), [utility(i, v, z) for v in range(40)], atol=1e-15)
    np.testing.assert_allclose(i.max_utilities(), [max_utility(i, v) for v in range(40)], atol=1e-15)


def test_profile_groups_identical_ballots_in_first_appearance_order():
    i = inst([1, 1, 1], 1, [[2], [0, 1], [2], [], [1, 0]])
    ballots, counts, first = i.profile()
    assert ballots.tolist() == [[0, 0, 1], [1, 1, 0], [0, 0, 0]]
    assert counts.tolist() == [2, 2, 1]
    assert first.tolist() == [0, 1, 3]


ballot_lists = st.lists(st.lists(st.integers(0, 3), max_size=4), min_size=1, max_size=6)
sizes4 = st.lists(st.floats(0.05, 3.0), min_size=4, max_size=4)
points4 = st.lists(st.floats(-2, 2), min_size=4, max_size=4)


@settings(max_examples=200, deadline=None)
@given(sizes4, ballot_lists, points4)
def test_utility_bounded_by_max_utility(sizes, ballots, v):
    i = inst(sizes, 1.0, ballots)
    z = project(np.array(v), i.region()).point
    u = i.utilities(z)
    assert np.all(u >= -1e-12)
    assert np.all(u <= i.max_utilities() + 1e-12)


@settings(max_examples=200, deadline=None)
@given(ballot_lists, points4, points4)
def test_utility_is_additive(ballots, a, b):
    i = inst([1, 1, 1, 1], 1.0, ballots)
    a, b = np.array(a), np.array(b)
    np.testing.assert_allclose(i.utilities(a + b), i.utilities(a) + i.utilities(b), atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_max_utility_matches_grid_search(seed):
    rng = np.random.default_rng(seed)
    m = 3
    sizes = rng.uniform(0.1, 1.2, m)
    ballot = sorted(rng.choice(m, size=2, replace=False).tolist())
    i = inst(sizes, 1.0, [ballot])
    b = feasible_region(i).bounds
    h = 0.01
    axes = [np.append(np.arange(0, bj, h), bj) for bj in b]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, m)
    grid = grid[grid.sum(axis=1) <= 1 + 1e-12]
    best = grid[:, ballot].sum(axis=1).max()
    assert max_utility(i, 0) == pytest.approx(best, abs=m * h)
    assert max_utility(i, 0) >= best - 1e-12
