import itertools

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from conftest import euclidean_pair, random_symmetric

from concavematch import (
    MatchingState,
    PolytopeDescriptor,
    PolytopeKind,
    SolverConfig,
    assignment_to_matrix,
    frank_wolfe,
    fw_concave_search,
    gershgorin_regularizer,
    hessian_E2,
    hessian_onesided,
    lap_oracle,
    multi_start,
    random_interior_point,
    row_argmin_lp,
    sinkhorn_project,
)
from concavematch.errors import DimensionError


def brute_force_assignment(cost):
    n = cost.shape[0]
    best, best_perm = np.inf, None
    for perm in itertools.permutations(range(n)):
        value = sum(cost[i, perm[i]] for i in range(n))
        if value < best - 1e-12 or (
            abs(value - best) <= 1e-12 and list(perm) < list(best_perm)
        ):
            best, best_perm = min(value, best), perm
    return best, list(best_perm)


def test_lap_trivial_cases():
    np.testing.assert_array_equal(lap_oracle(-np.eye(3)), [0, 1, 2])
    cost = np.array([[1.0, 2.0], [2.0, 1.0]])
    assignment = lap_oracle(cost)
    np.testing.assert_array_equal(assignment, [0, 1])
    assert cost[np.arange(2), assignment].sum() == 2.0


def test_lap_matches_brute_force(rng):
    for _ in range(60):
        n = int(rng.integers(2, 8))
        cost = rng.standard_normal((n, n)) * rng.uniform(0.5, 5.0)
        assignment = lap_oracle(cost)
        value = cost[np.arange(n), assignment].sum()
        best, best_perm = brute_force_assignment(cost)
        assert value == pytest.approx(best, abs=1e-8)
        assert list(assignment) == best_perm


def test_lap_breaks_ties_lexicographically(rng):
    np.testing.assert_array_equal(lap_oracle(np.ones((5, 5))), np.arange(5))
    for _ in range(60):
        n = int(rng.integers(2, 7))
        cost = rng.integers(0, 3, size=(n, n)).astype(float)
        best, best_perm = brute_force_assignment(cost)
        assert list(lap_oracle(cost)) == best_perm


def test_lap_cross_checks_scipy(rng):
    for _ in range(10):
        cost = rng.standard_normal((40, 40))
        assignment = lap_oracle(cost)
        rows, cols = linear_sum_assignment(cost)
        assert cost[np.arange(40), assignment].sum() == pytest.approx(
            cost[rows, cols].sum(), abs=1e-8
        )


def test_lap_rejects_nonfinite():
    with pytest.raises(ValueError):
        lap_oracle(np.array([[1.0, np.inf], [0.0, 1.0]]))


def test_frank_wolfe_concave_accepts_only_unit_steps(rng):
    for _ in range(10):
        n = int(rng.integers(5, 15))
        a, b = euclidean_pair(n, 3, rng)
        h = hessian_E2(a, b)
        start = assignment_to_matrix(rng.permutation(n))
        result = frank_wolfe(h, MatchingState(start, PolytopeKind.PERMUTATION))
        assert result.is_vertex and result.converged
        assert all(t == 1.0 for _, t in result.trace)
        energies = [e for e, _ in result.trace]
        assert all(energies[k + 1] <= energies[k] + 1e-9 for k in range(len(energies) - 1))


def test_frank_wolfe_global_minimum_is_fixed(rng):
    n = 6
    a, b = euclidean_pair(n, 2, rng)
    h = hessian_E2(a, b)
    best_perm = min(
        itertools.permutations(range(n)),
        key=lambda p: h.value(assignment_to_matrix(p)),
    )
    x0 = assignment_to_matrix(best_perm)
    result = frank_wolfe(h, MatchingState(x0, PolytopeKind.PERMUTATION))
    assert result.converged and result.iterations == 1
    np.testing.assert_array_equal(result.assignment, best_perm)


def test_frank_wolfe_from_center_reaches_vertex(rng):
    a, b = euclidean_pair(8, 3, rng)
    h = hessian_E2(a, b)
    x0 = MatchingState(np.full((8, 8), 1.0 / 8.0), PolytopeKind.PERMUTATION)
    result = frank_wolfe(h, x0)
    assert result.is_vertex


def test_frank_wolfe_rejects_onesided_start(rng):
    a, b = euclidean_pair(4, 2, rng)
    state = MatchingState(np.full((4, 4), 0.25), PolytopeKind.ONESIDED)
    with pytest.raises(DimensionError):
        frank_wolfe(hessian_E2(a, b), state)


def test_row_argmin_lp():
    state = row_argmin_lp(np.array([[3.0, 1.0, 2.0], [0.0, 5.0, 4.0]]))
    np.testing.assert_array_equal(np.argmax(state.entries, axis=1), [1, 0])
    ties = row_argmin_lp(np.full((3, 4), 2.0))
    np.testing.assert_array_equal(np.argmax(ties.entries, axis=1), [0, 0, 0])


def test_row_argmin_matches_exhaustive(rng):
    for _ in range(50):
        cost = rng.standard_normal((5, 4))
        state = row_argmin_lp(cost)
        got = float(np.sum(cost * state.entries))
        best = sum(min(cost[i]) for i in range(5))
        assert got == pytest.approx(best, abs=1e-12)


def test_gershgorin_single_term(rng):
    a = random_symmetric(4, rng)
    b = random_symmetric(5, rng)
    delta = gershgorin_regularizer(hessian_E2(a, b)).value
    expected = np.abs(a).sum(axis=1).max() * np.abs(b).sum(axis=1).max()
    assert delta == pytest.approx(expected, rel=1e-12)
    zero = gershgorin_regularizer(
        hessian_E2(np.zeros((3, 3)), np.zeros((3, 3)))
    )
    assert zero.value == 0.0


def test_gershgorin_shifts_to_negative_semidefinite(rng):
    for _ in range(5):
        h = hessian_onesided(random_symmetric(4, rng), random_symmetric(3, rng))
        delta = gershgorin_regularizer(h).value
        dense = h.dense()
        shifted = dense - delta * np.eye(dense.shape[0])
        assert np.linalg.eigvalsh(shifted).max() <= 1e-9


def test_concave_search_identical_graphs(rng):
    for _ in range(10):
        n = int(rng.integers(4, 21))
        a, _ = euclidean_pair(n, 3, rng)
        h = hessian_onesided(a, a)
        x0 = 0.9 * np.eye(n) + 0.1 / n * np.ones((n, n))
        result = fw_concave_search(h, MatchingState(x0, PolytopeKind.ONESIDED))
        np.testing.assert_array_equal(result.assignment, np.arange(n))
        assert abs(result.energy) < 1e-9


def test_concave_search_optimal_vertex_unchanged(rng):
    a, _ = euclidean_pair(6, 2, rng)
    h = hessian_onesided(a, a)
    result = fw_concave_search(h, MatchingState(np.eye(6), PolytopeKind.ONESIDED))
    np.testing.assert_array_equal(result.assignment, np.arange(6))
    assert result.energy == 0.0 and result.converged


def test_concave_search_outputs_are_one_swap_optimal(rng):
    for _ in range(20):
        a, _ = euclidean_pair(5, 2, rng)
        b, _ = euclidean_pair(4, 2, rng)
        h = hessian_onesided(a, b)
        descriptor = PolytopeDescriptor(PolytopeKind.ONESIDED, 5, 4)
        x0 = random_interior_point(descriptor, rng)
        result = fw_concave_search(h, x0)
        assert result.is_vertex
        assert result.energy <= h.value(x0.entries) + 1e-9
        cols = result.assignment
        for r in range(5):
            for c in range(4):
                if c == cols[r]:
                    continue
                alt = cols.copy()
                alt[r] = c
                assert h.value(assignment_to_matrix(alt, 4)) >= result.energy - 1e-9


def test_concave_search_rejects_permutation_start(rng):
    a, b = euclidean_pair(4, 2, rng)
    with pytest.raises(DimensionError):
        fw_concave_search(
            hessian_onesided(a, b),
            MatchingState(np.eye(4), PolytopeKind.PERMUTATION),
        )


def test_multi_start_single_restart_matches_manual(rng):
    a, b = euclidean_pair(6, 2, rng)
    h = hessian_E2(a, b)
    descriptor = PolytopeDescriptor(PolytopeKind.PERMUTATION, 6)
    one = multi_start(h, descriptor, anchors=2, restarts=1, seed=123)
    again = multi_start(h, descriptor, anchors=2, restarts=1, seed=123)
    assert one.energy == again.energy
    np.testing.assert_array_equal(one.assignment, again.assignment)


def test_multi_start_prefix_property(rng):
    a, b = euclidean_pair(7, 3, rng)
    h = hessian_E2(a, b)
    descriptor = PolytopeDescriptor(PolytopeKind.PERMUTATION, 7)
    energies = [
        multi_start(h, descriptor, anchors=1, restarts=k, seed=99).energy
        for k in range(1, 6)
    ]
    assert all(energies[k + 1] <= energies[k] + 1e-12 for k in range(len(energies) - 1))


def test_multi_start_threaded_matches_serial(rng):
    a, b = euclidean_pair(6, 2, rng)
    h = hessian_E2(a, b)
    descriptor = PolytopeDescriptor(PolytopeKind.PERMUTATION, 6)
    serial = multi_start(h, descriptor, anchors=1, restarts=8, seed=5, threads=1)
    pooled = multi_start(h, descriptor, anchors=1, restarts=8, seed=5, threads=4)
    assert serial.energy == pooled.energy
    np.testing.assert_array_equal(serial.assignment, pooled.assignment)


def test_multi_start_onesided(rng):
    a, _ = euclidean_pair(5, 2, rng)
    b, _ = euclidean_pair(4, 2, rng)
    h = hessian_onesided(a, b)
    descriptor = PolytopeDescriptor(PolytopeKind.ONESIDED, 5, 4)
    result = multi_start(h, descriptor, anchors=2, restarts=5, seed=7)
    assert result.is_vertex


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(max_iters=0)
    with pytest.raises(ValueError):
        SolverConfig(stationarity_tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(line_search="bogus")


def test_unit_step_mode_on_concave_instances(rng):
    a, b = euclidean_pair(8, 3, rng)
    h = hessian_E2(a, b)
    config = SolverConfig(line_search="unit-step")
    x0 = sinkhorn_project(rng.uniform(0.2, 1.0, (8, 8)))
    result = frank_wolfe(h, x0, config)
    assert result.is_vertex
    energies = [e for e, _ in result.trace]
    assert all(energies[k + 1] <= energies[k] for k in range(len(energies) - 1))
