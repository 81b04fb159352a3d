"""Interconnected LTI multi-agent plant, quadratic costs, and the Riccati/LQR oracle.

The global plant stacks L agents (state dim n, input dim m each) into

    X(t+1) = A X(t) + B U(t),      cost per step  X'SX + U'RU,

with A (nL x nL) and B (nL x mL) allowed to carry inter-agent couplings in
their off-diagonal blocks.  The optimal stationary feedback U = -K X comes
from the discrete-time algebraic Riccati equation, solved here by fixed-point
value iteration from P0 = S.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .validation import as_matrix, as_vector, check_square, check_symmetric_psd


class ConvergenceError(RuntimeError):
    """Riccati iteration failed to reach the requested defect tolerance."""

    def __init__(self, msg: str, residual: float):
        super().__init__(msg)
        self.residual = residual


@dataclass(frozen=True)
class MasModel:
    """Stacked global LTI system with per-agent block structure.

    A: (nL, nL) state matrix, B: (nL, mL) input matrix,
    S: (nL, nL) and R: (mL, mL) PSD cost weights.
    """

    L: int
    A: np.ndarray
    B: np.ndarray
    S: np.ndarray
    R: np.ndarray
    n: int = 1
    m: int = 1

    def __post_init__(self):
        A = check_square(as_matrix(self.A, "A"), "A")
        B = as_matrix(self.B, "B")
        S = check_symmetric_psd(as_matrix(self.S, "S"), "S")
        R = check_symmetric_psd(as_matrix(self.R, "R"), "R")
        nL, mL = self.L * self.n, self.L * self.m
        if A.shape != (nL, nL):
            raise ValueError(f"A must be {(nL, nL)}, got {A.shape}")
        if B.shape != (nL, mL):
            raise ValueError(f"B must be {(nL, mL)}, got {B.shape}")
        if S.shape != (nL, nL) or R.shape != (mL, mL):
            raise ValueError("S/R dimensions do not conform with A/B")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "R", R)

    @property
    def state_dim(self) -> int:
        return self.L * self.n

    @property
    def input_dim(self) -> int:
        return self.L * self.m

    def input_block(self, ell: int) -> slice:
        """Rows of U belonging to agent ell (0-based)."""
        return slice(ell * self.m, (ell + 1) * self.m)

    def r_block(self, ell: int) -> np.ndarray:
        """Agent ell's own input-weight block of R."""
        s = self.input_block(ell)
        return self.R[s, s]


@dataclass(frozen=True)
class GainMatrix:
    """Global feedback gain K (mL x nL); row block ell drives agent ell."""

    K: np.ndarray
    L: int
    n: int = 1
    m: int = 1

    def __post_init__(self):
        K = as_matrix(self.K, "K")
        if K.shape != (self.L * self.m, self.L * self.n):
            raise ValueError(
                f"K must be {(self.L * self.m, self.L * self.n)}, got {K.shape}"
            )
        object.__setattr__(self, "K", K)

    def block(self, ell: int) -> np.ndarray:
        """Agent ell's (m x nL) row block."""
        if not 0 <= ell < self.L:
            raise ValueError(f"agent index {ell} out of range")
        return self.K[ell * self.m : (ell + 1) * self.m, :]


@dataclass(frozen=True)
class RiccatiSolution:
    P: np.ndarray
    K: GainMatrix
    residual: float
    iterations: int


@dataclass
class Trajectory:
    """Closed-loop rollout record; `cost` is the sum of `stage_costs`."""

    states: list = field(default_factory=list)
    inputs: list = field(default_factory=list)
    stage_costs: list = field(default_factory=list)
    blown_up: bool = False

    @property
    def cost(self) -> float:
        return float(sum(self.stage_costs))


def step_global(model: MasModel, X, U) -> np.ndarray:
    """One plant step: A X + B U."""
    X = as_vector(X, "X", model.state_dim)
    U = as_vector(U, "U", model.input_dim)
    return model.A @ X + model.B @ U


def stage_cost(model: MasModel, X, U) -> float:
    """Quadratic stage cost X'SX + U'RU (non-negative for PSD S, R)."""
    X = as_vector(X, "X", model.state_dim)
    U = as_vector(U, "U", model.input_dim)
    return float(X @ model.S @ X + U @ model.R @ U)


def spectral_radius(M) -> float:
    """max |eig(M)| over all (possibly complex) eigenvalues."""
    M = check_square(as_matrix(M, "M"), "M")
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def solve_dare(model: MasModel, tol: float = 1e-12, max_iter: int = 10_000) -> RiccatiSolution:
    """Fixed-point value iteration for P = A'PA - A'PB (R+B'PB)^-1 B'PA + S.

    Starts from P0 = S; converges linearly at rate rho(A-BK)^2 for
    stabilizable (A, B) (assumed, not checked).  The returned gain is
    K = (R + B'PB)^-1 B'PA and `residual` is the Frobenius norm of the
    DARE defect at the returned P.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    A, B, S, R = model.A, model.B, model.S, model.R
    P = S.copy()
    residual = np.inf
    for it in range(1, max_iter + 1):
        BtP = B.T @ P
        gram = R + BtP @ B
        try:
            K = np.linalg.solve(gram, BtP @ A)
        except np.linalg.LinAlgError as exc:  # cannot occur for R > 0
            raise ConvergenceError(f"singular R + B'PB: {exc}", residual) from exc
        P_next = A.T @ P @ A - A.T @ P @ B @ K + S
        P_next = 0.5 * (P_next + P_next.T)
        residual = float(np.linalg.norm(P_next - P, "fro"))
        P = P_next
        if residual < tol:
            return RiccatiSolution(
                P=P,
                K=GainMatrix(K=K, L=model.L, n=model.n, m=model.m),
                residual=residual,
                iterations=it,
            )
    raise ConvergenceError(
        f"DARE iteration did not reach tol={tol} in {max_iter} iterations "
        f"(last residual {residual:.3e})",
        residual,
    )


def rollout(
    model: MasModel,
    K: GainMatrix,
    X0,
    T: int,
    blowup_threshold: float = 1e3,
) -> Trajectory:
    """Closed-loop rollout under U(t) = -K X(t).

    Truncates and flags `blown_up` as soon as ||X||_inf exceeds the
    threshold; the offending state is recorded but contributes no stage cost.
    """
    if T < 0:
        raise ValueError("horizon must be non-negative")
    if blowup_threshold <= 0:
        raise ValueError("blowup_threshold must be positive")
    X = as_vector(X0, "X0", model.state_dim)
    traj = Trajectory()
    traj.states.append(X.copy())
    for _ in range(T):
        if np.max(np.abs(X)) > blowup_threshold:
            traj.blown_up = True
            break
        U = -K.K @ X
        traj.inputs.append(U.copy())
        traj.stage_costs.append(stage_cost(model, X, U))
        X = step_global(model, X, U)
        traj.states.append(X.copy())
    else:
        if np.max(np.abs(X)) > blowup_threshold:
            traj.blown_up = True
    return traj


# ---------------------------------------------------------------------------
# Named model presets (scalar agents, B = S = R = I).

_A5 = np.array(
    [
        [0.63, 0.05, -0.04, 0.03, 0.02],
        [0.04, 0.59, 0.06, -0.03, 0.05],
        [-0.02, 0.03, 0.56, 0.04, -0.02],
        [0.03, -0.02, 0.02, 0.58, 0.06],
        [0.02, 0.03, -0.02, 0.04, 0.57],
    ]
)

_A6 = np.array(
    [
        [0.63, 0.05, -0.04, 0.03, 0.02, -0.01],
        [0.04, 0.59, 0.06, -0.03, 0.05, 0.00],
        [-0.02, 0.03, 0.56, 0.04, -0.02, 0.02],
        [0.03, -0.02, 0.02, 0.58, 0.06, 0.01],
        [0.02, 0.03, -0.02, 0.04, 0.57, 0.01],
        [0.02, 0.00, -0.03, -0.02, -0.02, 0.60],
    ]
)

_A8 = np.array(
    [
        [0.63, 0.05, -0.04, 0.03, 0.02, -0.01, 0.02, -0.01],
        [0.04, 0.59, 0.06, -0.03, 0.05, 0.00, 0.01, 0.00],
        [-0.02, 0.03, 0.56, 0.04, -0.02, 0.02, -0.02, 0.01],
        [0.03, -0.02, 0.02, 0.58, 0.06, 0.01, -0.00, -0.01],
        [0.02, 0.03, -0.02, 0.04, 0.57, 0.01, 0.00, 0.01],
        [0.02, 0.00, -0.03, -0.02, -0.02, 0.60, -0.01, 0.03],
        [-0.02, -0.03, 0.02, -0.00, 0.01, 0.02, 0.58, -0.03],
        [0.01, -0.01, 0.03, 0.02, 0.01, -0.00, -0.03, 0.59],
    ]
)

MODEL_PRESETS = {"A5": _A5, "A6": _A6, "A8": _A8}


def model_preset(name: str) -> MasModel:
    """Scalar-agent preset plants "A5"/"A6"/"A8" with B = S = R = identity."""
    if name not in MODEL_PRESETS:
        raise KeyError(f"unknown model preset {name!r}; choose from {sorted(MODEL_PRESETS)}")
    A = MODEL_PRESETS[name].copy()
    L = A.shape[0]
    I = np.eye(L)
    return MasModel(L=L, A=A, B=I.copy(), S=I.copy(), R=I.copy())


class RiccatiController(BaseEstimator):
    """Analytic LQR controller (the OPT oracle).

    fit() solves the DARE for the given plant; predict() maps states to
    inputs U = -K X row-wise.
    """

    def __init__(self, tol: float = 1e-12, max_iter: int = 10_000):
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, model: MasModel, graph=None):
        self.model_ = model
        self.solution_ = solve_dare(model, tol=self.tol, max_iter=self.max_iter)
        self.gains_ = self.solution_.K
        return self

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return -(self.gains_.K @ X.T).T
