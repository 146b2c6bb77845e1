import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from lqgame.errors import DivergentCost, UnstableClosedLoop
from lqgame.fixtures import PRINTED, X1
from lqgame.riccati import backward_solve
from lqgame.simulate import (AffineStrategyProfile, closed_form_cost, cost_gap, cost_matrix,
                             make_receding_strategy, rollout, stationary_profile)

from helpers import mixed_random_games, scalar_game


def test_long_receding_equals_limit(example_spec, example_sol):
    prof = make_receding_strategy(example_spec, (50, 50))
    for i in range(2):
        np.testing.assert_allclose(prof.gains[i], example_sol.Kstar[i], atol=1e-6)
        np.testing.assert_allclose(prof.offsets[i], example_sol.Lstar[i], atol=1e-6)
    assert prof.T_h == 50 and prof.kind == "receding"


def test_one_step_profile(example_spec):
    prof = make_receding_strategy(example_spec, (1, 1))
    sol = backward_solve(example_spec, 1)
    for i in range(2):
        assert np.array_equal(prof.gains[i], sol.K[0][i])
        assert np.array_equal(prof.offsets[i], sol.L[0][i])


def test_heterogeneous_horizons(example_spec):
    prof = make_receding_strategy(example_spec, (3, 7))
    s3, s7 = backward_solve(example_spec, 3), backward_solve(example_spec, 7)
    assert np.array_equal(prof.gains[0], s3.K[0][0])
    assert np.array_equal(prof.gains[1], s7.K[0][1])
    assert np.array_equal(prof.gains[0], s7.K[4][0])
    assert prof.T_h == 3


def test_receding_is_pure(example_spec):
    a = make_receding_strategy(example_spec, (4, 9))
    rollout(example_spec, a, X1, steps=10)
    b = make_receding_strategy(example_spec, (4, 9))
    for i in range(2):
        assert np.array_equal(a.gains[i], b.gains[i]) and np.array_equal(a.offsets[i], b.offsets[i])


def test_bad_horizons(example_spec):
    with pytest.raises(ValueError):
        make_receding_strategy(example_spec, (0, 3))
    with pytest.raises(ValueError):
        make_receding_strategy(example_spec, (3,))


def test_zero_state_costs_nothing(zero_spec, zero_sol):
    traj = rollout(zero_spec, stationary_profile(zero_sol), np.zeros(3))
    assert not np.any(traj.totals)


def test_printed_costs(example_spec, example_sol):
    traj = rollout(example_spec, stationary_profile(example_sol), X1)
    assert traj.totals[0] == pytest.approx(PRINTED["J1"], abs=5e-2)
    assert traj.totals[1] == pytest.approx(PRINTED["J2"], abs=5e-2)
    assert np.all(traj.tail_bounds < 1e-8)


def test_two_step_hand_sum(example_spec, example_sol):
    prof = stationary_profile(example_sol)
    traj = rollout(example_spec, prof, X1, steps=2)
    x = X1.copy()
    expected = np.zeros(2)
    for t in range(2):
        u = [K @ x + L for K, L in zip(example_sol.Kstar, example_sol.Lstar)]
        y = example_spec.C @ x + example_spec.D[0] @ u[0] + example_spec.D[1] @ u[1]
        for i, ell in enumerate(([1.0, 1.0], [-1.0, -1.0])):
            e = y - np.array(ell)
            c = e @ example_spec.Q[i] @ e + sum(u[j] @ example_spec.R[i][j] @ u[j] for j in range(2))
            expected[i] += 0.5 * example_spec.delta[i] ** t * c
        x = example_spec.A @ x + example_spec.B[0] @ u[0] + example_spec.B[1] @ u[1]
    np.testing.assert_allclose(traj.totals, expected, rtol=1e-14)
    assert traj.tau == 2


def test_dynamics_residuals(example_spec):
    prof = make_receding_strategy(example_spec, (4, 6))
    traj = rollout(example_spec, prof, X1, steps=40)
    for t in range(traj.tau - 1):
        u = [traj.inputs[j][t] for j in range(2)]
        x_next = example_spec.A @ traj.states[t] + sum(example_spec.B[j] @ u[j] for j in range(2))
        y = example_spec.C @ traj.states[t] + sum(example_spec.D[j] @ u[j] for j in range(2))
        assert np.abs(x_next - traj.states[t + 1]).max() <= 1e-12
        assert np.abs(y - traj.outputs[t]).max() <= 1e-12


def test_tail_refinement_within_bound(example_spec, example_sol):
    prof = stationary_profile(example_sol)
    a = rollout(example_spec, prof, X1, tail_tol=1e-6)
    b = rollout(example_spec, prof, X1, tail_tol=1e-7)
    assert np.all(np.abs(a.totals - b.totals) < a.tail_bounds)
    assert b.tau >= a.tau


def test_tail_brackets_true_cost(zero_spec, zero_sol):
    prof = stationary_profile(zero_sol)
    exact = closed_form_cost(zero_spec, prof, X1)
    traj = rollout(zero_spec, prof, X1, steps=15)
    assert np.all(traj.totals <= exact + 1e-12)
    assert np.all(exact <= traj.totals + traj.tail_bounds + 1e-12)


def test_unstable_profile_needs_fixed_length(example_spec):
    prof = AffineStrategyProfile([np.zeros((1, 3))] * 2, [np.zeros(1)] * 2)
    big = example_spec.replace(A=2.0 * np.eye(3))
    with pytest.raises(UnstableClosedLoop):
        rollout(big, prof, X1)
    assert rollout(big, prof, X1, steps=5).tau == 5


def test_divergent_cost_when_undiscounted():
    spec = scalar_game(A=0.5, B=(0.0,), D=(0.0,), delta=(1.0,), ref=(1.0,))
    prof = AffineStrategyProfile([np.zeros((1, 1))], [np.zeros(1)])
    with pytest.raises(DivergentCost):
        rollout(spec, prof, [1.0])
    assert rollout(spec, prof, [1.0], steps=3).tau == 3


def test_stationary_cost_identity(zero_spec, zero_sol, rng):
    prof = stationary_profile(zero_sol)
    for _ in range(5):
        x1 = rng.standard_normal(3)
        J = closed_form_cost(zero_spec, prof, x1)
        for i in range(2):
            assert J[i] == pytest.approx(0.5 * x1 @ zero_sol.Pstar[i] @ x1, rel=1e-8)
        sim = rollout(zero_spec, prof, x1, tail_tol=1e-12).totals
        np.testing.assert_allclose(sim, J, rtol=1e-6)


def test_closed_form_small_cases(zero_spec, zero_sol):
    assert not np.any(closed_form_cost(zero_spec, stationary_profile(zero_sol), np.zeros(3)))
    spec = scalar_game(A=0.5, B=(0.0,), D=(0.0,), delta=(0.9,))
    prof = AffineStrategyProfile([np.zeros((1, 1))], [np.zeros(1)])
    assert closed_form_cost(spec, prof, [2.0])[0] == pytest.approx(0.5 * 4 / 0.775, rel=1e-12)


def test_cost_matrix_matches_scipy_lyapunov():
    for spec, sol in mixed_random_games(5, 4):
        prof = make_receding_strategy(spec, (3,) * spec.N)
        F, _, G, _ = prof.closed_loop(spec)
        for i in range(spec.N):
            W = G.T @ spec.Q[i] @ G + sum(k.T @ spec.R[i][j] @ k for j, k in enumerate(prof.gains))
            ref = scipy.linalg.solve_discrete_lyapunov(np.sqrt(spec.delta[i]) * F.T, W)
            np.testing.assert_allclose(cost_matrix(spec, prof, i), ref, rtol=1e-9, atol=1e-12)


def test_closed_form_preconditions(example_spec, example_sol, zero_spec):
    with pytest.raises(ValueError):
        closed_form_cost(example_spec, stationary_profile(example_sol), X1)
    prof = AffineStrategyProfile([np.zeros((1, 3))] * 2, [np.ones(1)] * 2)
    with pytest.raises(ValueError):
        closed_form_cost(zero_spec, prof, X1)
    with pytest.raises(UnstableClosedLoop):
        closed_form_cost(zero_spec.replace(A=2.0 * np.eye(3)),
                         AffineStrategyProfile([np.zeros((1, 3))] * 2, [np.zeros(1)] * 2), X1)


def test_short_horizon_gap_against_long_simulation(example_spec, example_sol):
    gaps = cost_gap(example_spec, (2, 2), X1, example_sol)
    prof = make_receding_strategy(example_spec, (2, 2))
    brute = rollout(example_spec, prof, X1, steps=10_000)
    tail = rollout(example_spec, prof, X1).tail_bounds
    for i in range(2):
        assert abs(gaps[i].J_tilde - brute.totals[i]) <= tail[i] + 1e-9


def test_long_horizon_gap_small(example_spec, example_sol):
    for g in cost_gap(example_spec, (50, 50), X1, example_sol):
        assert g.gap < 1e-2
        assert g.gap == abs(g.J_tilde - g.J)


def test_gap_vanishes_at_limit(zero_spec, zero_sol):
    for g in cost_gap(zero_spec, (zero_sol.iterations,) * 2, X1, zero_sol):
        assert g.gap <= 1e-12 * g.J


def test_rollout_argument_checks(example_spec, example_sol):
    prof = stationary_profile(example_sol)
    with pytest.raises(ValueError):
        rollout(example_spec, prof, X1, steps=3, tail_tol=1e-3)
    with pytest.raises(ValueError):
        rollout(example_spec, prof, X1[:2])
    with pytest.raises(ValueError):
        rollout(example_spec, prof, X1, steps=0)


@settings(max_examples=25, deadline=None)
@given(x=st.lists(st.floats(-5, 5), min_size=3, max_size=3), c=st.floats(-3, 3))
def test_closed_form_is_quadratic(zero_spec, zero_sol, x, c):
    prof = stationary_profile(zero_sol)
    x = np.array(x)
    np.testing.assert_allclose(closed_form_cost(zero_spec, prof, c * x),
                               c * c * closed_form_cost(zero_spec, prof, x), rtol=1e-10, atol=1e-12)
