"""Distributed state tracking baseline: quadratic Q-fit and gain extraction.

Each agent approximates its undiscounted action-value function with all
degree-2 monomials over [z; u], where z is the agent's (uncompensated)
global-state observation.  The coefficient vector theta solves

    min_theta  sum_t ((y(t) - y(t+1)) . theta - c(t))^2,

after which theta folds into the symmetric matrix H with v'Hv = basis(v).theta
and the greedy policy u = K z follows from K = -H22^-1 H21.  The method has
no noise or delay compensation: under imperfect links it consumes the raw
received observations as-is.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .dynamics import GainMatrix, MasModel
from .graph import NetworkGraph, RoutingTable, compute_routes
from .messaging import NetworkEnv


class FitError(RuntimeError):
    pass


def basis_length(dim: int) -> int:
    return dim * (dim + 1) // 2


def quadratic_basis(z, u) -> np.ndarray:
    """All products v_i v_j (i <= j) of v = [z; u], ordered lexicographically."""
    v = np.concatenate([np.atleast_1d(np.asarray(z, float)),
                        np.atleast_1d(np.asarray(u, float))])
    d = v.shape[0]
    out = np.empty(basis_length(d))
    k = 0
    for i in range(d):
        out[k : k + d - i] = v[i] * v[i:]
        k += d - i
    return out


def fit_theta(regressors: np.ndarray, costs: np.ndarray, step_size: float = 1e-3,
              max_passes: int = 10_000, lstsq_below: int = 5000) -> tuple[np.ndarray, float]:
    """Least-squares fit of theta against basis-difference regressors.

    regressors rows are y(t) - y(t+1); costs are the per-step quadratic
    costs c(t).  Small datasets solve the normal equations directly;
    otherwise plain gradient descent on the mean squared residual runs with
    a divergence guard (failure if the residual grows for 100 consecutive
    passes).  Returns (theta, rms_residual).
    """
    D = np.asarray(regressors, dtype=float)
    c = np.asarray(costs, dtype=float).reshape(-1)
    if D.ndim != 2 or D.shape[0] != c.shape[0]:
        raise ValueError("regressor/cost shapes do not conform")
    N = D.shape[0]
    if N < lstsq_below:
        theta, *_ = np.linalg.lstsq(D, c, rcond=None)
        res = float(np.sqrt(np.mean((D @ theta - c) ** 2)))
        return theta, res
    theta = np.zeros(D.shape[1])
    prev = np.inf
    growth = 0
    for _ in range(max_passes):
        err = D @ theta - c
        res = float(np.mean(err**2))
        if res > prev:
            growth += 1
            if growth >= 100:
                raise FitError(
                    f"gradient descent diverging (residual {res:.3e} after "
                    f"100 consecutive increases)"
                )
        else:
            growth = 0
        prev = res
        theta -= step_size * (2.0 / N) * (D.T @ err)
    return theta, float(np.sqrt(prev))


def theta_to_H(theta: np.ndarray, dim: int) -> np.ndarray:
    """Fold basis coefficients into the symmetric H with v'Hv = basis(v).theta."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != basis_length(dim):
        raise ValueError(
            f"theta length {theta.shape[0]} does not match dim {dim} "
            f"(expected {basis_length(dim)})"
        )
    H = np.zeros((dim, dim))
    k = 0
    for i in range(dim):
        H[i, i] = theta[k]
        for j in range(i + 1, dim):
            H[i, j] = H[j, i] = theta[k + j - i] / 2.0
        k += dim - i
    return H


def h_to_theta(H: np.ndarray) -> np.ndarray:
    """Read H back into basis coefficients (inverse of theta_to_H)."""
    H = np.asarray(H, dtype=float)
    dim = H.shape[0]
    theta = np.empty(basis_length(dim))
    k = 0
    for i in range(dim):
        theta[k] = H[i, i]
        theta[k + 1 : k + dim - i] = 2.0 * H[i, i + 1 :]
        k += dim - i
    return theta


def dst_gain(H: np.ndarray, state_dim: int) -> np.ndarray:
    """Greedy policy coefficient -H22^-1 H21 for the convention u = K z."""
    H = np.asarray(H, dtype=float)
    H21 = H[state_dim:, :state_dim]
    H22 = H[state_dim:, state_dim:]
    if H22.shape[0] == 0:
        raise FitError("empty input block")
    if np.linalg.matrix_rank(H22) < H22.shape[0]:
        raise FitError("singular H22 block; cannot extract a gain")
    return -np.linalg.solve(H22, H21)


class DstController(BaseEstimator):
    """Policy-iteration state-tracking controller over raw network observations.

    Each round collects closed-loop data under the current per-agent gains
    (with exploratory input noise), fits every agent's quadratic Q-function,
    and extracts improved gains.  fit() exposes the stacked result in the
    plant's feedback convention (U = -K X) as `gains_`.
    """

    def __init__(self, lam: float = 1.0, rounds: int = 8, episodes_per_round: int = 40,
                 steps_per_episode: int = 10, explore_std: float = 0.2,
                 reset_scale: float = np.sqrt(3.0), seed: int = 0,
                 delays_enabled: bool = True, noise_enabled: bool = True,
                 step_size: float = 1e-3, max_passes: int = 10_000):
        self.lam = lam
        self.rounds = rounds
        self.episodes_per_round = episodes_per_round
        self.steps_per_episode = steps_per_episode
        self.explore_std = explore_std
        self.reset_scale = reset_scale
        self.seed = seed
        self.delays_enabled = delays_enabled
        self.noise_enabled = noise_enabled
        self.step_size = step_size
        self.max_passes = max_passes

    def fit(self, model: MasModel, graph: NetworkGraph | None = None,
            table: RoutingTable | None = None):
        if graph is None:
            if model.L != 1:
                raise ValueError("a communication graph is required for L > 1")
            graph = NetworkGraph(1, [])
        if table is None:
            table = compute_routes(graph, self.lam)
        rng = np.random.default_rng(self.seed)
        env = NetworkEnv(
            model, graph, table, rng, mode="raw",
            delays_enabled=self.delays_enabled, noise_enabled=self.noise_enabled,
        )
        L, n, m = model.L, model.n, model.m
        nL = model.state_dim
        # Gains in the local convention u = K z; start from the open loop.
        K = [np.zeros((m, nL)) for _ in range(L)]
        guard = 1e6
        self.residuals_ = []
        for _ in range(self.rounds):
            transitions: list[list[tuple]] = [[] for _ in range(L)]
            for _ in range(self.episodes_per_round):
                env.force_state(rng.uniform(-self.reset_scale, self.reset_scale, nL))
                views = env.observe()
                for _ in range(self.steps_per_episode):
                    U = np.zeros(model.input_dim)
                    acts = []
                    for ell in range(L):
                        u = K[ell] @ views[ell] + rng.normal(0, self.explore_std, m)
                        U[model.input_block(ell)] = u
                        acts.append(u)
                    env.step(U)
                    views_next = env.observe()
                    if np.max(np.abs(env.X)) > guard:
                        break
                    for ell in range(L):
                        transitions[ell].append(
                            (views[ell], acts[ell], views_next[ell])
                        )
                    views = views_next
            new_K = []
            round_res = []
            for ell in range(L):
                R_ell = model.r_block(ell)
                rows, costs = [], []
                for z_t, u_t, z_n in transitions[ell]:
                    u_n = K[ell] @ z_n  # policy action at the successor
                    rows.append(quadratic_basis(z_t, u_t) - quadratic_basis(z_n, u_n))
                    costs.append(z_t @ model.S @ z_t + u_t @ R_ell @ u_t)
                if len(rows) < basis_length(nL + m):
                    raise FitError("not enough usable samples to identify theta")
                theta, res = fit_theta(
                    np.asarray(rows), np.asarray(costs),
                    step_size=self.step_size, max_passes=self.max_passes,
                )
                H = theta_to_H(theta, nL + m)
                new_K.append(dst_gain(H, nL))
                round_res.append(res)
            K = new_K
            self.residuals_.append(round_res)
        self.model_ = model
        # Flip into the plant convention U = -K X.
        self.gains_ = GainMatrix(K=-np.vstack(K), L=L, n=n, m=m)
        return self

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return -(self.gains_.K @ X.T).T
