import numpy as np
import pytest

from lqgame.errors import SingularH
from lqgame.generators import random_game
from lqgame.model import ReferenceSignal
from lqgame.riccati import (assemble_g, assemble_g_tilde, assemble_H, backward_solve, riccati_residuals,
                            solution_residuals, stage_step, value_at)

from helpers import scalar_game

X1 = np.array([-0.353, -1.926, -2.595])


def zeros(spec):
    return [np.zeros((spec.n, spec.n))] * spec.N, [np.zeros(spec.n)] * spec.N, [0.0] * spec.N


def test_H_without_feedthrough_is_block_diag_R(example_spec):
    spec = example_spec.replace(D=(np.zeros((2, 1)), np.zeros((2, 1))))
    P, _, _ = zeros(spec)
    assert np.array_equal(assemble_H(spec, P), np.diag([0.7, 0.5]))


def test_H_example_spec_at_zero(example_spec):
    # hand evaluation: D1'Q1D1 + R11 = 4*0.4 + 0.7, D1'Q1D2 = 4*(-0.06 + 0.06), D2'Q2D2 + R22 = 2*0.1 + 0.5
    P, _, _ = zeros(example_spec)
    np.testing.assert_allclose(assemble_H(example_spec, P), [[2.3, 0.0], [0.0, 0.7]], atol=1e-15)


def test_H_is_affine_in_P(example_spec, rng):
    P1 = [rng.standard_normal((3, 3)) for _ in range(2)]
    P2 = [rng.standard_normal((3, 3)) for _ in range(2)]
    P0, _, _ = zeros(example_spec)
    lhs = (assemble_H(example_spec, [a + b for a, b in zip(P1, P2)]) - assemble_H(example_spec, P1)
           - assemble_H(example_spec, P2) + assemble_H(example_spec, P0))
    np.testing.assert_allclose(lhs, 0.0, atol=1e-13)


def test_H_dimension_errors(example_spec):
    with pytest.raises(ValueError):
        assemble_H(example_spec, [np.zeros((3, 3))])
    with pytest.raises(ValueError):
        assemble_H(example_spec, [np.zeros((2, 2))] * 2)


def test_g_examples(example_spec):
    P, _, _ = zeros(example_spec)
    no_D = example_spec.replace(D=(np.zeros((2, 1)), np.zeros((2, 1))))
    assert not np.any(assemble_g(no_D, P))
    expected = np.vstack([-example_spec.D[i].T @ example_spec.Q[i] @ example_spec.C for i in range(2)])
    np.testing.assert_array_equal(assemble_g(example_spec, P), expected)
    # -4*(0.6*C[0] + 0.2*C[1]) and -2*(-0.1*C[0] + 0.3*C[1])
    np.testing.assert_allclose(assemble_g(example_spec, P),
                               [[-1.04, 0.4, -0.64], [-0.18, -0.10, 0.52]], atol=1e-14)


def test_g_tilde_examples(example_spec, rng):
    _, S, _ = zeros(example_spec)
    refs0 = [np.zeros(2)] * 2
    assert not np.any(assemble_g_tilde(example_spec, S, refs0))
    no_D = example_spec.replace(D=(np.zeros((2, 1)), np.zeros((2, 1))))
    Sr = [rng.standard_normal(3) for _ in range(2)]
    expected = np.concatenate([-no_D.delta[i] * no_D.B[i].T @ Sr[i] for i in range(2)])
    np.testing.assert_allclose(assemble_g_tilde(no_D, Sr, example_spec.references(1)), expected, rtol=1e-15)
    # D1'Q1 l1 = 4*(0.6 + 0.2), D2'Q2 l2 = 2*(0.1 - 0.3)
    np.testing.assert_allclose(assemble_g_tilde(example_spec, S, example_spec.references(1)), [3.2, -0.4],
                               atol=1e-14)


def test_stage_without_control_is_raw_cost():
    q, r, d, ell = 2.0, 0.5, 0.8, 1.5
    spec = scalar_game(B=(0.0,), D=(0.0,), Q=(q,), R=[[r]], delta=(d,), ref=(ell,))
    st = stage_step(spec, *zeros(spec), spec.references(1))
    assert st.K[0][0, 0] == 0.0 and st.L[0][0] == 0.0
    assert st.P[0][0, 0] == pytest.approx(q)
    assert st.S[0][0] == pytest.approx(-q * ell)
    assert st.w[0] == pytest.approx(0.5 * q * ell ** 2)
    for x in (-1.0, 0.3, 2.0):
        value = 0.5 * q * x * x + st.S[0][0] * x + st.w[0]
        assert value == pytest.approx(0.5 * q * (x - ell) ** 2)


def test_costless_stage(example_spec):
    spec = example_spec.replace(Q=(np.zeros((2, 2)),) * 2).with_zero_refs()
    st = stage_step(spec, *zeros(spec), spec.references(1))
    for i in range(2):
        assert not np.any(st.K[i]) and not np.any(st.L[i])
        assert not np.any(st.P[i]) and not np.any(st.S[i]) and st.w[i] == 0.0


def test_scalar_two_player_one_stage():
    # H = [[2, 1], [1, 2]], g = [-1, -1]  =>  K1 = K2 = -1/3 by elimination;
    # G = 1 - 2/3 = 1/3 and P_i = G^2 + K1^2 + K2^2 = 1/3
    spec = scalar_game(B=(1.0, 1.0), D=(1.0, 1.0), Q=(1.0, 1.0), R=[[1.0, 1.0], [1.0, 1.0]],
                       delta=(1.0, 1.0))
    st = stage_step(spec, *zeros(spec), spec.references(1))
    for i in range(2):
        assert st.K[i][0, 0] == pytest.approx(-1 / 3, rel=1e-14)
        assert st.P[i][0, 0] == pytest.approx(1 / 3, rel=1e-14)


def test_singular_H_detected():
    spec = scalar_game(B=(1.0,), D=(0.5,), Q=(1.0,), R=[[1.0]], delta=(0.5,))
    P = [np.array([[-(1.0 + 0.25) / 0.5]])]
    with pytest.raises(SingularH) as info:
        stage_step(spec, P, [np.zeros(1)], [0.0], spec.references(1), stage=7)
    assert info.value.stage == 7


def test_cond_max_is_honoured(example_spec):
    with pytest.raises(SingularH):
        backward_solve(example_spec, 3, cond_max=1.5)


def test_T1_equals_single_stage(example_spec):
    sol = backward_solve(example_spec, 1)
    st = stage_step(example_spec, *zeros(example_spec), example_spec.references(1))
    for i in range(2):
        assert np.array_equal(sol.K[0][i], st.K[i])
        assert np.array_equal(sol.L[0][i], st.L[i])
        assert np.array_equal(sol.P[0][i], st.P[i])
        assert not np.any(sol.P[1][i]) and sol.w[1][i] == 0.0


def test_bad_horizon(example_spec):
    with pytest.raises(ValueError):
        backward_solve(example_spec, 0)
    short = example_spec.replace(ref=(ReferenceSignal.sequence([[1.0, 1.0]] * 3), ReferenceSignal.zero()))
    with pytest.raises(ValueError):
        backward_solve(short, 4)


def test_first_stage_tends_to_printed_limit(example_spec):
    sol = backward_solve(example_spec, 20)
    np.testing.assert_allclose(sol.K[0][0], [[-0.527, 0.217, 0.075]], atol=1e-3)
    np.testing.assert_allclose(sol.L[0][0], [1.235], atol=1e-3)
    np.testing.assert_allclose(sol.K[0][1], [[-0.160, -0.210, 0.306]], atol=1e-3)
    np.testing.assert_allclose(sol.L[0][1], [-0.401], atol=1e-3)


def test_horizon_consistency_bitwise(example_spec):
    long = backward_solve(example_spec, 12)
    short = backward_solve(example_spec, 11)
    for t in range(1, 12):
        for i in range(2):
            assert np.array_equal(short.K[t - 1][i], long.K[t][i])
            assert np.array_equal(short.L[t - 1][i], long.L[t][i])


def test_gain_consistency_with_time_varying_refs(example_spec, rng):
    seq = [rng.standard_normal(2) for _ in range(10)]
    spec = example_spec.replace(ref=(ReferenceSignal.sequence(seq), ReferenceSignal.sequence(seq[::-1])))
    long, short = backward_solve(spec, 10), backward_solve(spec, 9)
    for t in range(1, 10):
        for i in range(2):
            assert np.array_equal(short.K[t - 1][i], long.K[t][i])


def test_solve_is_pure(example_spec):
    a = backward_solve(example_spec, 8)
    backward_solve(example_spec.with_zero_refs(), 5)
    b = backward_solve(example_spec, 8)
    for t in range(8):
        for i in range(2):
            assert np.array_equal(a.K[t][i], b.K[t][i]) and np.array_equal(a.P[t][i], b.P[t][i])


def test_symmetry_and_residuals(example_spec):
    sol = backward_solve(example_spec, 40)
    for Ps in sol.P:
        for P in Ps:
            assert np.array_equal(P, P.T)
    assert solution_residuals(example_spec, sol) < 1e-9


def test_residuals_detect_wrong_gain(example_spec):
    sol = backward_solve(example_spec, 2)
    K = list(sol.K[0])
    K[0] = K[0] + 0.1
    res = riccati_residuals(example_spec, K, sol.L[0], sol.P[0], sol.S[0], sol.w[0],
                            sol.P[1], sol.S[1], sol.w[1], example_spec.references(1))
    assert res[0]["K"] > 1e-3


def test_value_matrices_psd_for_psd_weights():
    rng = np.random.default_rng(7)
    for _ in range(10):
        spec = random_game(rng, n=3, p=2, m=(1, 2))
        sol = backward_solve(spec, 15)
        for Ps in sol.P:
            for P in Ps:
                assert np.linalg.eigvalsh(P)[0] >= -1e-10 * (1 + np.linalg.norm(P))


def test_value_at_conventions(example_spec):
    sol = backward_solve(example_spec, 5)
    assert value_at(sol, 6, 0, X1) == 0.0
    assert value_at(sol, 2, 1, np.zeros(3)) == sol.w[1][1]
    with pytest.raises(IndexError):
        value_at(sol, 7, 0, X1)
    with pytest.raises(IndexError):
        value_at(sol, 1, 2, X1)


def test_long_horizon_value_near_printed_cost(example_spec):
    # the constant-reference tail decays like 0.9^T, so a long horizon is needed
    sol = backward_solve(example_spec, 200)
    assert value_at(sol, 1, 0, X1) == pytest.approx(38.784, abs=5e-3)
    assert value_at(sol, 1, 1, X1) == pytest.approx(17.050, abs=5e-3)


def simulate_time_varying(spec, sol, x, t0=1, first_inputs=None):
    """Discounted costs of stages t0..T under the solution's stage gains (independent loop)."""
    N = spec.N
    total = np.zeros(N)
    for t in range(t0, sol.T + 1):
        u = [sol.K[t - 1][j] @ x + sol.L[t - 1][j] for j in range(N)]
        if t == t0 and first_inputs is not None:
            u = [first_inputs.get(j, u[j]) for j in range(N)]
        y = spec.C @ x + sum(spec.D[j] @ u[j] for j in range(N))
        for i in range(N):
            e = y - spec.reference(i, t)
            c = e @ spec.Q[i] @ e + sum(u[j] @ spec.R[i][j] @ u[j] for j in range(N))
            total[i] += 0.5 * c * spec.delta[i] ** (t - t0)
        x = spec.A @ x + sum(spec.B[j] @ u[j] for j in range(N))
    return total


def test_dynamic_programming_cross_check(example_spec):
    rng = np.random.default_rng(3)
    seq = [rng.standard_normal(2) for _ in range(12)]
    specs = [example_spec, example_spec.replace(ref=(ReferenceSignal.sequence(seq), ReferenceSignal.zero()))]
    specs += [random_game(rng, n=4, p=2, m=(1, 2, 1), refs=True) for _ in range(3)]
    for spec in specs:
        sol = backward_solve(spec, 12)
        for _ in range(3):
            x1 = rng.standard_normal(spec.n)
            sim = simulate_time_varying(spec, sol, x1)
            for i in range(spec.N):
                assert sim[i] == pytest.approx(value_at(sol, 1, i, x1), rel=1e-8, abs=1e-12)


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("T", [1, 2, 3])
def test_no_profitable_unilateral_deviation(seed, T):
    rng = np.random.default_rng(100 + seed)
    spec = scalar_game(A=rng.uniform(-1.5, 1.5), B=tuple(rng.uniform(-1, 1, 2)), C=rng.uniform(0.2, 1.5),
                       D=tuple(rng.uniform(-0.5, 0.5, 2)), Q=tuple(rng.uniform(0.1, 2, 2)),
                       R=[[rng.uniform(0.2, 2), rng.uniform(0, 0.5)], [rng.uniform(0, 0.5), rng.uniform(0.2, 2)]],
                       delta=tuple(rng.uniform(0.5, 1.0, 2)), ref=tuple(rng.standard_normal(2)))
    sol = backward_solve(spec, T)
    for t in range(1, T + 1):
        x = rng.standard_normal(1)
        for i in range(2):
            u_eq = sol.K[t - 1][i] @ x + sol.L[t - 1][i]

            def cost(v):
                return simulate_time_varying(spec, sol, x, t0=t, first_inputs={i: u_eq + v})[i]

            # cost is quadratic in the deviation v: fit it through three points
            c0, cp, cm = cost(0.0), cost(1.0), cost(-1.0)
            a, b = 0.5 * (cp + cm) - c0, 0.5 * (cp - cm)
            assert a > 0
            best = c0 - b * b / (4 * a)
            assert c0 - best <= 1e-8
            grid = min(cost(v) for v in np.linspace(-3, 3, 61))
            assert grid >= c0 - 1e-8
