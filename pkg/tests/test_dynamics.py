import numpy as np
import pytest

from masnet.dynamics import (
    ConvergenceError,
    GainMatrix,
    MasModel,
    model_preset,
    rollout,
    solve_dare,
    spectral_radius,
    stage_cost,
    step_global,
)


def scalar_model(a, b=1.0, s=1.0, r=1.0) -> MasModel:
    return MasModel(L=1, A=[[a]], B=[[b]], S=[[s]], R=[[r]])


def test_step_global_zero_is_zero():
    model = model_preset("A5")
    assert np.array_equal(step_global(model, np.zeros(5), np.zeros(5)), np.zeros(5))


def test_step_global_unit_vector_reads_first_column():
    model = model_preset("A5")
    e1 = np.eye(5)[0]
    expected = np.array([0.63, 0.04, -0.02, 0.03, 0.02])
    assert np.array_equal(step_global(model, e1, np.zeros(5)), expected)


def test_step_global_matches_double_loop_oracle():
    rng = np.random.default_rng(11)
    model = model_preset("A6")
    for _ in range(20):
        X = rng.normal(size=6)
        U = rng.normal(size=6)
        got = step_global(model, X, U)
        want = np.zeros(6)
        for i in range(6):
            for j in range(6):
                want[i] += model.A[i, j] * X[j] + model.B[i, j] * U[j]
        assert np.max(np.abs(got - want)) < 1e-12 * max(1.0, np.max(np.abs(want)))


def test_step_global_rejects_bad_dims():
    model = model_preset("A5")
    with pytest.raises(ValueError):
        step_global(model, np.zeros(4), np.zeros(5))
    with pytest.raises(ValueError):
        step_global(model, np.zeros(5), np.zeros(6))


def test_stage_cost_basics():
    model = model_preset("A5")
    assert stage_cost(model, np.zeros(5), np.zeros(5)) == 0.0
    e1 = np.eye(5)[0]
    assert stage_cost(model, e1, np.zeros(5)) == 1.0


def test_stage_cost_matches_double_sum_oracle():
    rng = np.random.default_rng(7)
    model = model_preset("A5")
    for _ in range(20):
        X = rng.normal(size=5)
        U = rng.normal(size=5)
        want = 0.0
        for i in range(5):
            for j in range(5):
                want += X[i] * model.S[i, j] * X[j] + U[i] * model.R[i, j] * U[j]
        got = stage_cost(model, X, U)
        assert abs(got - want) < 1e-12 * max(1.0, abs(want))


def test_stage_cost_nonnegative_for_psd_weights():
    rng = np.random.default_rng(3)
    model = model_preset("A8")
    for _ in range(1000):
        X = rng.normal(size=8) * 10
        U = rng.normal(size=8) * 10
        assert stage_cost(model, X, U) >= 0.0


def test_dare_scalar_a_zero():
    sol = solve_dare(scalar_model(0.0), tol=1e-12)
    assert abs(sol.P[0, 0] - 1.0) < 1e-12
    assert abs(sol.K.K[0, 0]) < 1e-12


def test_dare_scalar_golden_ratio():
    # Fixed point of P = P - P^2/(1+P) + 1, i.e. P^2 - P - 1 = 0.
    golden = (1.0 + np.sqrt(5.0)) / 2.0
    sol = solve_dare(scalar_model(1.0), tol=1e-14)
    assert abs(sol.P[0, 0] - golden) < 1e-9
    assert abs(sol.K.K[0, 0] - golden / (1.0 + golden)) < 1e-9
    assert abs(sol.K.K[0, 0] - 0.6180340) < 1e-6


@pytest.mark.parametrize("name", ["A5", "A6", "A8"])
def test_dare_presets_residual_and_stability(name):
    model = model_preset(name)
    sol = solve_dare(model, tol=1e-10)
    A, B = model.A, model.B
    P = sol.P
    gram = model.R + B.T @ P @ B
    defect = P - (A.T @ P @ A - A.T @ P @ B @ np.linalg.solve(gram, B.T @ P @ A) + model.S)
    assert np.linalg.norm(defect, "fro") < 1e-9
    assert spectral_radius(A - B @ sol.K.K) < 1.0


def test_dare_nonconvergence_reports_residual():
    with pytest.raises(ConvergenceError) as err:
        solve_dare(scalar_model(1.0), tol=1e-14, max_iter=3)
    assert err.value.residual > 0.0


def test_spectral_radius_identity_and_diagonal():
    assert abs(spectral_radius(np.eye(4)) - 1.0) < 1e-8
    assert abs(spectral_radius(np.diag([0.5, -0.7])) - 0.7) < 1e-8


def test_spectral_radius_complex_pair():
    companion = np.array([[0.0, -0.5], [1.0, 1.0]])  # z^2 - z + 0.5
    assert abs(spectral_radius(companion) - np.sqrt(0.5)) < 1e-8


def test_spectral_radius_scaling():
    rng = np.random.default_rng(5)
    for _ in range(10):
        M = rng.normal(size=(4, 4))
        c = float(rng.normal())
        assert abs(spectral_radius(c * M) - abs(c) * spectral_radius(M)) < 1e-8


def test_spectral_radius_rejects_nonsquare():
    with pytest.raises(ValueError):
        spectral_radius(np.zeros((2, 3)))


def test_rollout_zero_horizon():
    model = model_preset("A5")
    K = GainMatrix(K=np.zeros((5, 5)), L=5)
    traj = rollout(model, K, np.ones(5), T=0)
    assert traj.inputs == []
    assert traj.cost == 0.0
    assert len(traj.states) == 1


def test_rollout_blowup_geometric():
    model = scalar_model(2.0)
    K = GainMatrix(K=np.zeros((1, 1)), L=1)
    traj = rollout(model, K, [1.0], T=20, blowup_threshold=1e3)
    assert traj.blown_up
    # 2^10 = 1024 first exceeds the threshold.
    assert len(traj.inputs) == 10
    assert traj.states[10][0] == 1024.0


def test_rollout_cost_matches_stage_sum_and_value_bound():
    rng = np.random.default_rng(17)
    model = model_preset("A5")
    sol = solve_dare(model, tol=1e-13)
    for _ in range(10):
        X0 = rng.uniform(-1, 1, size=5)
        traj = rollout(model, sol.K, X0, T=60)
        resum = sum(
            stage_cost(model, x, u) for x, u in zip(traj.states, traj.inputs)
        )
        assert abs(traj.cost - resum) < 1e-9
        assert traj.cost <= X0 @ sol.P @ X0 + 1e-6


def test_dare_gain_beats_random_perturbations():
    rng = np.random.default_rng(23)
    model = model_preset("A5")
    sol = solve_dare(model, tol=1e-13)
    wins = 0
    for _ in range(100):
        X0 = rng.uniform(-1, 1, size=5)
        dK = rng.uniform(-0.05, 0.05, size=(5, 5))
        base = rollout(model, sol.K, X0, T=50).cost
        pert = rollout(model, GainMatrix(K=sol.K.K + dK, L=5), X0, T=50).cost
        if base <= pert:
            wins += 1
    assert wins >= 95


def test_model_validation_rejects_asymmetric_weights():
    with pytest.raises(ValueError):
        MasModel(L=2, A=np.eye(2), B=np.eye(2), S=[[1, 0.5], [0, 1]], R=np.eye(2))
    with pytest.raises(ValueError):
        MasModel(L=2, A=np.eye(2), B=np.eye(2), S=np.eye(2), R=-np.eye(2))


def test_gain_matrix_blocks_partition():
    K = GainMatrix(K=np.arange(8.0).reshape(2, 4), L=2, n=2, m=1)
    stacked = np.vstack([K.block(ell) for ell in range(2)])
    assert np.array_equal(stacked, K.K)
    with pytest.raises(ValueError):
        K.block(2)
