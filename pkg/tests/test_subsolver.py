import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import golden_section, max_linear_enum
from ppga.geometry import project
from ppga.model import FeasibleRegion
from ppga.subsolver import (
    SubproblemSpec,
    SubsolverError,
    UPSILON_FLOOR,
    fo_residual,
    iteration_cap,
    lipschitz_bound,
    solve_x_subproblem,
)


def region(b):
    return FeasibleRegion(np.asarray(b, float))


def random_spec(rng, m, rho=1.0, xi=1e-8, scale=0.3):
    k = int(rng.integers(1, m + 1))
    approvals = np.sort(rng.choice(m, size=k, replace=False))
    b = rng.uniform(0.1, 1.0, m)
    spec = SubproblemSpec(
        voter=0,
        approvals=approvals,
        z_prev=rng.normal(scale=scale, size=m) + 0.1,
        gamma_prev=rng.normal(scale=scale, size=m),
        rho=rho,
        xi=xi,
    )
    return spec, region(b)


def test_lipschitz_and_cap():
    assert lipschitz_bound(0.0, 2.0) == pytest.approx(1 / (2 * UPSILON_FLOOR**2) + 2)
    assert lipschitz_bound(0.5, 1.0, beta=1.0) == pytest.approx(4 / 0.5 + 1 / 0.5 + 1)
    assert iteration_cap(1.0, 1.0, 1e-2) == 10 * math.ceil(math.sqrt(1.5 / 1e-2) * math.log(100))
    assert iteration_cap(0.0, 1.0, 1e-8) == 20_000


def test_stationary_start_is_returned():
    z = np.array([0.2, 0.3, 0.1])
    a = np.array([1.0, 0.0, 1.0])
    gamma = a / (a @ z + UPSILON_FLOOR)
    spec = SubproblemSpec(0, np.array([0, 2]), z, gamma, rho=1.0)
    x, res = solve_x_subproblem(spec, region([1, 1, 1]), x0=z)
    np.testing.assert_allclose(x, z, atol=1e-12)
    assert res <= 1e-12


def test_large_penalty_tracks_projection():
    rng = np.random.default_rng(1)
    for _ in range(10):
        spec, R = random_spec(rng, 5, rho=1e6, xi=1e-10)
        x, _ = solve_x_subproblem(spec, R)
        assert np.linalg.norm(x - project(spec.z_prev, R).point) <= 1e-3


def two_project_oracle():
    # symmetric, so the optimum is (t, t); the total cap restricts t to [0, 1/2]
    ups = UPSILON_FLOOR
    return golden_section(lambda t: math.log(2 * t + ups) - t * t, 0.0, 0.5)


def test_two_project_example():
    t = two_project_oracle()
    assert t == pytest.approx(0.5, abs=1e-8)
    spec = SubproblemSpec(0, np.array([0, 1]), np.zeros(2), np.zeros(2), rho=1.0, xi=1e-10)
    x, res = solve_x_subproblem(spec, region([1, 1]))
    np.testing.assert_allclose(x, [t, t], atol=1e-6)
    assert res <= 1e-10


def test_residual_at_far_vertex():
    spec = SubproblemSpec(0, np.array([0, 1]), np.zeros(2), np.zeros(2), rho=1.0)
    R = region([1, 1])
    x = np.array([1.0, 0.0])
    g = spec.gradient(x)
    t = two_project_oracle()
    res = fo_residual(x, spec, R)
    assert res == pytest.approx(max_linear_enum(g, [1, 1])[1] - g @ x, abs=1e-12)
    assert res >= (np.array([t, t]) - x) @ g - 1e-12
    assert res > 0


def test_residual_zero_for_nonpositive_gradient_at_origin():
    spec = SubproblemSpec(0, np.array([0]), np.zeros(2), np.array([5e9, 1.0]), rho=1.0)
    g = spec.gradient(np.zeros(2))
    assert np.all(g <= 0)
    assert fo_residual(np.zeros(2), spec, region([1, 1])) == 0.0


def test_one_dimensional_optimum_has_zero_residual():
    # maximize log(x) - (x - 0.3)^2 / 2 on [0, 0.8]
    spec = SubproblemSpec(0, np.array([0]), np.array([0.3]), np.array([0.0]), rho=1.0, upsilon=1.0)
    x_star = golden_section(lambda x: math.log(x + 1.0) - 0.5 * (x - 0.3) ** 2, 0.0, 0.8, tol=1e-13)
    assert fo_residual(np.array([x_star]), spec, region([0.8])) <= 1e-10


def test_cap_exhaustion_raises_with_best_iterate():
    spec = SubproblemSpec(7, np.array([0, 1]), np.zeros(2), np.zeros(2), rho=1.0, xi=1e-12)
    with pytest.raises(SubsolverError) as info:
        solve_x_subproblem(spec, region([1, 1]), max_iter=1)
    assert info.value.agent == 7
    assert info.value.x is not None and info.value.residual > 1e-12


def test_certificate_soundness():
    rng = np.random.default_rng(2)
    for _ in range(200):
        m = int(rng.integers(2, 9))
        xi = float(10 ** rng.uniform(-10, -4))
        spec, R = random_spec(rng, m, rho=float(10 ** rng.uniform(-1, 2)), xi=xi)
        x, res = solve_x_subproblem(spec, R)
        assert R.contains(x, tol=1e-12)
        assert fo_residual(x, spec, R) <= xi
        assert res == pytest.approx(fo_residual(x, spec, R), abs=1e-15)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    h = 1e-6
    for _ in range(100):
        m = int(rng.integers(2, 8))
        spec, R = random_spec(rng, m)
        x = project(rng.uniform(0.05, 0.3, m), R).point * 0.9 + 0.01
        g = spec.gradient(x)
        fd = np.array(
            [(spec.objective(x + h * e) - spec.objective(x - h * e)) / (2 * h) for e in np.eye(m)]
        )
        np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-7)


pts = st.lists(st.floats(-1, 1), min_size=4, max_size=4)


@settings(max_examples=200, deadline=None)
@given(pts, pts, st.integers(0, 10**6))
def test_objective_is_concave(u, v, seed):
    rng = np.random.default_rng(seed)
    spec, R = random_spec(rng, 4)
    x, y = project(u, R).point, project(v, R).point
    mid = spec.objective(0.5 * (x + y))
    assert mid >= 0.5 * (spec.objective(x) + spec.objective(y)) - 1e-9


@pytest.mark.parametrize("seed", range(10))
def test_distance_to_projection_shrinks_with_penalty(seed):
    rng = np.random.default_rng(50 + seed)
    spec, R = random_spec(rng, 5, xi=1e-12)
    target = project(spec.z_prev, R).point
    dists = []
    for rho in (1.0, 10.0, 100.0, 1e4):
        s = SubproblemSpec(0, spec.approvals, spec.z_prev, spec.gamma_prev, rho=rho, xi=1e-12)
        x, _ = solve_x_subproblem(s, R)
        dists.append(np.linalg.norm(x - target))
    assert all(b <= a + 1e-6 for a, b in zip(dists, dists[1:]))
