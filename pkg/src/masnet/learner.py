"""Corrective double-critic actor-critic training over networked estimates.

Each agent owns an encoder head, an actor emitting a feedback-gain row, and
a double critic pair with Polyak-averaged target copies; all agents share a
single encoder trunk.  Critics regress onto the pessimistic TD target

    rho = r + gamma * min(Q_tgt(psi+, K+), Q'_tgt(psi+, K+)),  K+ = actor(psi+),

and actors ascend min(Q, Q') through both the gain input and the shared
features.  Rewards are quadratic penalties evaluated on each agent's own
refined global state estimate, so they inherit the network's noise and
staleness; a corrective phase recomputes them on time-aligned reconstructed
states popped from the per-agent FIFO buffers and replays the corrected
pairs at a reduced learning rate.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .dynamics import GainMatrix, MasModel, spectral_radius, stage_cost
from .graph import NetworkGraph, RoutingTable, compute_routes
from .messaging import NetworkEnv, TimeShiftBuffer
from .nn import Adam, DenseNet, NonFiniteError, add_grads, polyak_update, zeros_like_params


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    """Hyperparameters for one training run."""

    lr: float = 1e-4
    gamma: float = 0.95
    replay_capacity: int = 1000
    batch_size: int = 32
    episodes: int = 5000
    steps_per_episode: int = 10
    explore_std_init: float = 0.3
    explore_std_final: float = 0.02
    explore_decay: float = 0.995
    tau: float = 0.005
    corrective_factor: float = 0.1
    gain_bound: float = 2.0
    hidden: int = 64
    ema_window: int = 10
    beta_min: float = 0.05
    beta_max: float = 0.95
    buffer_slack: int = 4
    history_capacity: int | None = None
    reset_scale: float = math.sqrt(3.0)
    blowup_threshold: float = 1e3
    seed: int = 0

    def validate(self) -> "TrainConfig":
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        for name in ("lr", "tau", "explore_std_init", "explore_std_final",
                     "gain_bound", "blowup_threshold", "reset_scale"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.corrective_factor < 0:
            raise ValueError("corrective_factor must be >= 0")
        if self.batch_size > self.replay_capacity:
            raise ValueError("batch_size must not exceed replay_capacity")
        if self.episodes < 0 or self.steps_per_episode < 1:
            raise ValueError("invalid episode counts")
        return self


class CdnetParams:
    """Shared trunk, per-agent heads/actors, and double critics with targets."""

    def __init__(self, L: int, n: int, m: int, hidden: int, gain_bound: float,
                 rng: np.random.Generator):
        self.L, self.n, self.m = L, n, m
        self.hidden = hidden
        self.gain_bound = float(gain_bound)
        self.state_dim = n * L
        self.gain_dim = m * n * L
        self.trunk = DenseNet.build([self.state_dim, hidden, hidden], ["relu", "relu"], rng)
        self.heads = [
            DenseNet.build([hidden, hidden], ["relu"], rng) for _ in range(L)
        ]
        self.actors = [
            DenseNet.build([hidden, hidden, self.gain_dim], ["relu", "tanh"], rng)
            for _ in range(L)
        ]
        qin = hidden + self.gain_dim
        self.critics1 = [DenseNet.build([qin, hidden, 1], ["relu", "linear"], rng) for _ in range(L)]
        self.critics2 = [DenseNet.build([qin, hidden, 1], ["relu", "linear"], rng) for _ in range(L)]
        self.targets1 = [net.copy() for net in self.critics1]
        self.targets2 = [net.copy() for net in self.critics2]

    def gain_block(self, ell: int, flat: np.ndarray) -> np.ndarray:
        """Reshape a flat actor output into agent ell's (m x nL) gain block."""
        return flat.reshape(self.m, self.state_dim)


class CdnetOptimizers:
    def __init__(self, params: CdnetParams, lr: float):
        self.trunk = Adam(params.trunk.parameters(), lr)
        self.heads = [Adam(h.parameters(), lr) for h in params.heads]
        self.actors = [Adam(a.parameters(), lr) for a in params.actors]
        self.critics1 = [Adam(c.parameters(), lr) for c in params.critics1]
        self.critics2 = [Adam(c.parameters(), lr) for c in params.critics2]


def forward_features(params: CdnetParams, X_tilde, ell: int):
    """Agent-specific feature psi_ell = head_ell(trunk(X_tilde))."""
    phi, _ = params.trunk.forward(np.asarray(X_tilde, dtype=float))
    psi, _ = params.heads[ell].forward(phi)
    return psi


def select_gain(params: CdnetParams, psi, ell: int, explore: bool = False,
                explore_std: float = 0.0, rng: np.random.Generator | None = None) -> np.ndarray:
    """Deterministic bounded gain, optionally perturbed by Gaussian exploration."""
    a, _ = params.actors[ell].forward(np.asarray(psi, dtype=float))
    K = params.gain_bound * a
    if explore and explore_std > 0.0:
        if rng is None:
            raise ValueError("exploration requires an rng")
        K = K + rng.normal(0.0, explore_std, size=K.shape)
        K = np.clip(K, -params.gain_bound, params.gain_bound)
    return K


def immediate_reward(x_tilde, u_ell, S, R_ell) -> float:
    """Negative quadratic penalty on the estimated global state and own input."""
    x = np.asarray(x_tilde, dtype=float).reshape(-1)
    u = np.atleast_1d(np.asarray(u_ell, dtype=float))
    return float(-(x @ S @ x) - (u @ R_ell @ u))


def pessimistic_q(q1, q2):
    """Element-wise minimum of the two critic estimates."""
    return np.minimum(q1, q2)


def _critic_input(psi: np.ndarray, K: np.ndarray) -> np.ndarray:
    return np.concatenate([psi, K], axis=-1)


def td_target(params: CdnetParams, ell: int, r, X_next, gamma: float, terminal=False) -> np.ndarray:
    """Pessimistic bootstrap target rho for agent ell.

    Next-step features come from the online trunk/head, the next action from
    the online actor (no exploration), and the value from the two target
    critics via the pessimistic minimum.  Terminal transitions use rho = r.
    """
    X_next = np.atleast_2d(np.asarray(X_next, dtype=float))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    terminal = np.atleast_1d(np.asarray(terminal, dtype=float))
    phi, _ = params.trunk.forward(X_next)
    psi, _ = params.heads[ell].forward(phi)
    a, _ = params.actors[ell].forward(psi)
    K_next = params.gain_bound * a
    qin = _critic_input(psi, K_next)
    q1, _ = params.targets1[ell].forward(qin)
    q2, _ = params.targets2[ell].forward(qin)
    qmin = pessimistic_q(q1, q2)[:, 0]
    return r + gamma * (1.0 - terminal) * qmin


@dataclass
class AgentBatch:
    """One agent's slice of a sampled minibatch."""

    X: np.ndarray  # (B, nL) refined states
    K: np.ndarray  # (B, gain_dim) applied gains
    r: np.ndarray  # (B,) rewards
    X_next: np.ndarray  # (B, nL)
    terminal: np.ndarray  # (B,) floats in {0, 1}


def critic_gradients(params: CdnetParams, ell: int, batch: AgentBatch, rho: np.ndarray):
    """TD losses and exact gradients for agent ell's critic pair.

    rho enters as a constant (semi-gradient TD); head/trunk gradients carry
    the contributions of both critics.  Returns
    (loss1, loss2, g_critic1, g_critic2, g_head, g_trunk).
    """
    B = batch.X.shape[0]
    phi, c_phi = params.trunk.forward(batch.X)
    psi, c_psi = params.heads[ell].forward(phi)
    qin = _critic_input(psi, batch.K)
    q1, c1 = params.critics1[ell].forward(qin)
    q2, c2 = params.critics2[ell].forward(qin)
    e1 = q1[:, 0] - rho
    e2 = q2[:, 0] - rho
    loss1 = float(np.mean(e1**2))
    loss2 = float(np.mean(e2**2))
    if not (np.isfinite(loss1) and np.isfinite(loss2)):
        raise TrainingError(f"non-finite critic loss for agent {ell}")
    g1, gin1 = params.critics1[ell].backward(c1, (2.0 / B) * e1[:, None])
    g2, gin2 = params.critics2[ell].backward(c2, (2.0 / B) * e2[:, None])
    d_psi = gin1[:, : params.hidden] + gin2[:, : params.hidden]
    gh, d_phi = params.heads[ell].backward(c_psi, d_psi)
    gt, _ = params.trunk.backward(c_phi, d_phi)
    return loss1, loss2, g1, g2, gh, gt


def actor_gradients(params: CdnetParams, ell: int, batch: AgentBatch):
    """Loss and exact gradients for ascending min(Q, Q') on agent ell.

    Gradient reaches the actor through the critics' gain input and the
    head/trunk through both the feature input and the actor path; critic
    parameter gradients are discarded by construction.  Returns
    (loss, g_actor, g_head, g_trunk).
    """
    B = batch.X.shape[0]
    phi, c_phi = params.trunk.forward(batch.X)
    psi, c_psi = params.heads[ell].forward(phi)
    a, c_a = params.actors[ell].forward(psi)
    K = params.gain_bound * a
    qin = _critic_input(psi, K)
    q1, c1 = params.critics1[ell].forward(qin)
    q2, c2 = params.critics2[ell].forward(qin)
    qmin = pessimistic_q(q1, q2)
    loss = float(-np.mean(qmin))
    if not np.isfinite(loss):
        raise TrainingError(f"non-finite actor loss for agent {ell}")
    pick1 = (q1 <= q2).astype(float)
    _, gin1 = params.critics1[ell].backward(c1, -pick1 / B)
    _, gin2 = params.critics2[ell].backward(c2, -(1.0 - pick1) / B)
    d_qin = gin1 + gin2
    d_psi_direct = d_qin[:, : params.hidden]
    d_K = d_qin[:, params.hidden :]
    ga, d_psi_actor = params.actors[ell].backward(c_a, params.gain_bound * d_K)
    gh, d_phi = params.heads[ell].backward(c_psi, d_psi_direct + d_psi_actor)
    gt, _ = params.trunk.backward(c_phi, d_phi)
    return loss, ga, gh, gt


def critic_update(params: CdnetParams, opt: CdnetOptimizers,
                  batches: list[tuple[int, AgentBatch]], gamma: float,
                  tau: float, lr_scale: float = 1.0) -> list[tuple[float, float]]:
    """One TD step for each listed agent's critic pair against the shared target.

    Head and trunk gradients accumulate from both critics (and, for the
    trunk, across agents) before a single optimizer step each; afterwards the
    target critics take one Polyak step toward the online critics.
    """
    trunk_acc = zeros_like_params(params.trunk)
    losses = []
    for ell, b in batches:
        rho = td_target(params, ell, b.r, b.X_next, gamma, b.terminal)
        loss1, loss2, g1, g2, gh, gt = critic_gradients(params, ell, b, rho)
        add_grads(trunk_acc, gt)
        opt.critics1[ell].step(g1, lr_scale)
        opt.critics2[ell].step(g2, lr_scale)
        opt.heads[ell].step(gh, lr_scale)
        losses.append((loss1, loss2))
    opt.trunk.step(trunk_acc, lr_scale)
    for ell, _ in batches:
        polyak_update(params.targets1[ell], params.critics1[ell], tau)
        polyak_update(params.targets2[ell], params.critics2[ell], tau)
    return losses


def actor_update(params: CdnetParams, opt: CdnetOptimizers,
                 batches: list[tuple[int, AgentBatch]], lr_scale: float = 1.0) -> list[float]:
    """Ascend the pessimistic critic value through actor, head, and trunk.

    Critic parameters stay untouched; their inputs only route gradient to the
    gain (actor) and feature (head/trunk) paths.
    """
    trunk_acc = zeros_like_params(params.trunk)
    losses = []
    for ell, b in batches:
        loss, ga, gh, gt = actor_gradients(params, ell, b)
        add_grads(trunk_acc, gt)
        opt.actors[ell].step(ga, lr_scale)
        opt.heads[ell].step(gh, lr_scale)
        losses.append(loss)
    opt.trunk.step(trunk_acc, lr_scale)
    return losses


class ReplayBuffer:
    """Uniform-sampling ring buffer over joint multi-agent transitions."""

    def __init__(self, capacity: int, L: int, state_dim: int, gain_dim: int):
        self.capacity = capacity
        self.states = np.zeros((capacity, L, state_dim))
        self.gains = np.zeros((capacity, L, gain_dim))
        self.rewards = np.zeros((capacity, L))
        self.next_states = np.zeros((capacity, L, state_dim))
        self.terminal = np.zeros(capacity)
        self._size = 0
        self._pos = 0

    def __len__(self) -> int:
        return self._size

    def add(self, states, gains, rewards, next_states, terminal: bool) -> None:
        i = self._pos
        self.states[i] = states
        self.gains[i] = gains
        self.rewards[i] = rewards
        self.next_states[i] = next_states
        self.terminal[i] = float(terminal)
        self._pos = (self._pos + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample_indices(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self._size, size=batch_size)

    def agent_batch(self, idx: np.ndarray, ell: int) -> AgentBatch:
        return AgentBatch(
            X=self.states[idx, ell],
            K=self.gains[idx, ell],
            r=self.rewards[idx, ell],
            X_next=self.next_states[idx, ell],
            terminal=self.terminal[idx],
        )


@dataclass
class CorrectedEntry:
    """A reconstructed state with its recomputed reward and action record."""

    ref_time: int
    X_hat: np.ndarray
    gain: np.ndarray
    u: np.ndarray
    r_prime: float
    terminal: bool


class HistoryBuffer:
    """FIFO of corrected pairs awaiting the reduced-rate replay."""

    def __init__(self, capacity: int):
        self.entries: deque[CorrectedEntry] = deque(maxlen=capacity)

    def append(self, entry: CorrectedEntry) -> None:
        self.entries.append(entry)

    def __len__(self) -> int:
        return len(self.entries)

    def drain_pairs(self) -> list[tuple[CorrectedEntry, np.ndarray | None]]:
        """Consume entries, pairing each with its consecutive successor state.

        Terminal entries bootstrap from nothing; non-terminal entries missing
        their successor (skipped pops, stream gaps) are dropped.  The newest
        entry stays queued as the seed for the next pass.
        """
        out = []
        while len(self.entries) > 1:
            e = self.entries.popleft()
            nxt = self.entries[0]
            if e.terminal:
                out.append((e, None))
            elif nxt.ref_time == e.ref_time + 1:
                out.append((e, nxt.X_hat))
        if self.entries and self.entries[0].terminal:
            out.append((self.entries.popleft(), None))
        return out


@dataclass
class EpisodeMetrics:
    episode: int
    cost: float
    blown_up: bool
    spectral_radius: float
    explore_std: float
    corrective_updates: int = 0
    skipped_pops: int = 0


class _AgentCorrector:
    """Per-agent time-shift buffer, action log, and corrected-history state."""

    def __init__(self, ell: int, env: NetworkEnv, cfg: TrainConfig, L: int, n: int):
        delays = {m: env.delay(ell + 1, m) for m in range(1, L + 1)}
        D = max(delays.values())
        self.buffer = TimeShiftBuffer(ell + 1, delays, L, n, capacity=D + cfg.buffer_slack)
        self.readiness = D * self.buffer.capacity
        self.history = HistoryBuffer(cfg.history_capacity or cfg.replay_capacity)
        self.actions: dict[int, tuple[np.ndarray, np.ndarray, bool]] = {}
        self.skipped = 0


def _zero_state_gains(params: CdnetParams) -> GainMatrix:
    """Deterministic gains at the regulation point (zero estimate)."""
    zero = np.zeros(params.state_dim)
    blocks = []
    for ell in range(params.L):
        psi = forward_features(params, zero, ell)
        K = select_gain(params, psi, ell, explore=False)
        blocks.append(params.gain_block(ell, K))
    return GainMatrix(K=np.vstack(blocks), L=params.L, n=params.n, m=params.m)


def corrective_replay(params: CdnetParams, opt: CdnetOptimizers, corr: _AgentCorrector,
                      ell: int, model: MasModel, cfg: TrainConfig) -> int:
    """Drain reconstructed states, recompute rewards, and replay them softly.

    Returns the number of corrected transitions applied; pops whose slot was
    not fully reconstructed are skipped and counted on the corrector.
    """
    while corr.buffer.ready_count:
        X_hat, filled, ref = corr.buffer.pop_reconstructed()
        record = corr.actions.pop(ref, None)
        if not filled or record is None:
            corr.skipped += 1
            continue
        gain, u, terminal = record
        r_prime = immediate_reward(X_hat, u, model.S, model.r_block(ell))
        corr.history.append(
            CorrectedEntry(ref, X_hat.copy(), gain, u, r_prime, terminal)
        )
    pairs = corr.history.drain_pairs()
    if not pairs or cfg.corrective_factor == 0.0:
        return 0
    X = np.stack([p[0].X_hat for p in pairs])
    K = np.stack([p[0].gain for p in pairs])
    r = np.array([p[0].r_prime for p in pairs])
    X_next = np.stack(
        [p[1] if p[1] is not None else np.zeros_like(p[0].X_hat) for p in pairs]
    )
    terminal = np.array([1.0 if p[1] is None else 0.0 for p in pairs])
    batch = AgentBatch(X=X, K=K, r=r, X_next=X_next, terminal=terminal)
    critic_update(params, opt, [(ell, batch)], cfg.gamma, cfg.tau,
                  lr_scale=cfg.corrective_factor)
    actor_update(params, opt, [(ell, batch)], lr_scale=cfg.corrective_factor)
    return len(pairs)


def train(
    model: MasModel,
    graph: NetworkGraph,
    cfg: TrainConfig,
    lam: float = 1.0,
    table: RoutingTable | None = None,
    delays_enabled: bool = True,
    noise_enabled: bool = True,
    debug_sink: dict | None = None,
) -> tuple[GainMatrix, list[EpisodeMetrics], CdnetParams]:
    """Full training loop; deterministic for a fixed config seed.

    Episodes are cost-accounting windows over one continuous simulation: the
    message-passing pipeline, filters, and alignment buffers keep flowing
    across episode resets (only the plant state is redrawn), so delayed
    reconstruction stays live even when an episode is shorter than the
    alignment warm-up.
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    if table is None:
        table = compute_routes(graph, lam)
    env = NetworkEnv(
        model, graph, table, rng, mode="refined",
        delays_enabled=delays_enabled, noise_enabled=noise_enabled,
        ema_window=cfg.ema_window, beta_min=cfg.beta_min, beta_max=cfg.beta_max,
    )
    L, n, m = model.L, model.n, model.m
    params = CdnetParams(L, n, m, cfg.hidden, cfg.gain_bound, rng)
    opt = CdnetOptimizers(params, cfg.lr)
    replay = ReplayBuffer(cfg.replay_capacity, L, params.state_dim, params.gain_dim)
    correctors = [_AgentCorrector(ell, env, cfg, L, n) for ell in range(L)]
    metrics: list[EpisodeMetrics] = []
    global_step = 0
    estimates = None

    for ep in range(cfg.episodes):
        X0 = rng.uniform(-cfg.reset_scale, cfg.reset_scale, size=params.state_dim)
        env.force_state(X0)
        estimates = env.observe()
        explore_std = max(cfg.explore_std_final, cfg.explore_std_init * cfg.explore_decay**ep)
        ep_cost = 0.0
        blown = False
        corrective_count = 0
        try:
            for step in range(cfg.steps_per_episode):
                gains = []
                U = np.zeros(model.input_dim)
                rewards = np.zeros(L)
                for ell in range(L):
                    psi = forward_features(params, estimates[ell], ell)
                    K = select_gain(params, psi, ell, explore=True,
                                    explore_std=explore_std, rng=rng)
                    gains.append(K)
                    u = -params.gain_block(ell, K) @ estimates[ell]
                    U[model.input_block(ell)] = u
                    rewards[ell] = immediate_reward(
                        estimates[ell], u, model.S, model.r_block(ell)
                    )
                ep_cost += stage_cost(model, env.X, U)
                X_next = env.step(U)
                blown = bool(np.max(np.abs(X_next)) > cfg.blowup_threshold)
                terminal = blown or step == cfg.steps_per_episode - 1
                next_estimates = env.observe()
                replay.add(
                    np.stack(estimates), np.stack(gains), rewards,
                    np.stack(next_estimates), terminal,
                )
                for ell in range(L):
                    corr = correctors[ell]
                    corr.buffer.push(estimates[ell])
                    u = U[model.input_block(ell)]
                    corr.actions[global_step] = (gains[ell], u.copy(), terminal)

                if len(replay) >= cfg.batch_size:
                    idx = replay.sample_indices(cfg.batch_size, rng)
                    batches = [(ell, replay.agent_batch(idx, ell)) for ell in range(L)]
                    critic_update(params, opt, batches, cfg.gamma, cfg.tau)
                    actor_update(params, opt, batches)

                for ell in range(L):
                    corr = correctors[ell]
                    if global_step + 1 >= corr.readiness:
                        corrective_count += corrective_replay(
                            params, opt, corr, ell, model, cfg
                        )

                global_step += 1
                estimates = next_estimates
                if blown:
                    break
        except NonFiniteError as exc:
            raise TrainingError(
                f"non-finite values at episode {ep} (seed {cfg.seed}): {exc}"
            ) from exc

        gains0 = _zero_state_gains(params)
        rho_cl = spectral_radius(model.A - model.B @ gains0.K)
        metrics.append(
            EpisodeMetrics(
                episode=ep,
                cost=ep_cost,
                blown_up=blown,
                spectral_radius=rho_cl,
                explore_std=explore_std,
                corrective_updates=corrective_count,
                skipped_pops=sum(c.skipped for c in correctors),
            )
        )

    if debug_sink is not None:
        debug_sink["buffers"] = [c.buffer.peek_slots() for c in correctors]
    return _zero_state_gains(params), metrics, params


def save_params(params: CdnetParams, path: str) -> None:
    """Checkpoint all parameter sets to an .npz archive.

    Keys follow "<group>/<index>/<layer>/<W|b>" with groups trunk, head,
    actor, critic1, critic2, target1, target2; arrays are row-major.
    """
    arrays: dict[str, np.ndarray] = {}

    def put(group: str, idx, net: DenseNet):
        prefix = f"{group}/{idx}" if idx is not None else group
        for li, layer in enumerate(net.layers):
            arrays[f"{prefix}/{li}/W"] = layer.W
            arrays[f"{prefix}/{li}/b"] = layer.b

    put("trunk", None, params.trunk)
    for ell in range(params.L):
        put("head", ell, params.heads[ell])
        put("actor", ell, params.actors[ell])
        put("critic1", ell, params.critics1[ell])
        put("critic2", ell, params.critics2[ell])
        put("target1", ell, params.targets1[ell])
        put("target2", ell, params.targets2[ell])
    arrays["meta"] = np.array(
        [params.L, params.n, params.m, params.hidden, params.gain_bound]
    )
    np.savez(path, **arrays)


def load_params(path: str) -> CdnetParams:
    data = np.load(path)
    L, n, m, hidden, gain_bound = data["meta"]
    params = CdnetParams(int(L), int(n), int(m), int(hidden), float(gain_bound),
                         np.random.default_rng(0))

    def fill(group: str, idx, net: DenseNet):
        prefix = f"{group}/{idx}" if idx is not None else group
        for li, layer in enumerate(net.layers):
            layer.W = data[f"{prefix}/{li}/W"]
            layer.b = data[f"{prefix}/{li}/b"]

    fill("trunk", None, params.trunk)
    for ell in range(params.L):
        fill("head", ell, params.heads[ell])
        fill("actor", ell, params.actors[ell])
        fill("critic1", ell, params.critics1[ell])
        fill("critic2", ell, params.critics2[ell])
        fill("target1", ell, params.targets1[ell])
        fill("target2", ell, params.targets2[ell])
    return params


class CdnetController(BaseEstimator):
    """Estimator wrapper around the corrective double-critic trainer.

    fit(model, graph) trains over the networked plant and exposes the final
    zero-state gains as `gains_`; predict(X) applies U = -K X row-wise.
    """

    def __init__(self, lam: float = 1.0, lr: float = 1e-4, gamma: float = 0.95,
                 replay_capacity: int = 1000, batch_size: int = 32,
                 episodes: int = 5000, steps_per_episode: int = 10,
                 explore_std_init: float = 0.3, explore_std_final: float = 0.02,
                 explore_decay: float = 0.995, tau: float = 0.005,
                 corrective_factor: float = 0.1, gain_bound: float = 2.0,
                 hidden: int = 64, ema_window: int = 10, beta_min: float = 0.05,
                 beta_max: float = 0.95, buffer_slack: int = 4,
                 reset_scale: float = math.sqrt(3.0), blowup_threshold: float = 1e3,
                 seed: int = 0, delays_enabled: bool = True, noise_enabled: bool = True):
        self.lam = lam
        self.lr = lr
        self.gamma = gamma
        self.replay_capacity = replay_capacity
        self.batch_size = batch_size
        self.episodes = episodes
        self.steps_per_episode = steps_per_episode
        self.explore_std_init = explore_std_init
        self.explore_std_final = explore_std_final
        self.explore_decay = explore_decay
        self.tau = tau
        self.corrective_factor = corrective_factor
        self.gain_bound = gain_bound
        self.hidden = hidden
        self.ema_window = ema_window
        self.beta_min = beta_min
        self.beta_max = beta_max
        self.buffer_slack = buffer_slack
        self.reset_scale = reset_scale
        self.blowup_threshold = blowup_threshold
        self.seed = seed
        self.delays_enabled = delays_enabled
        self.noise_enabled = noise_enabled

    def _config(self) -> TrainConfig:
        return TrainConfig(
            lr=self.lr, gamma=self.gamma, replay_capacity=self.replay_capacity,
            batch_size=self.batch_size, episodes=self.episodes,
            steps_per_episode=self.steps_per_episode,
            explore_std_init=self.explore_std_init,
            explore_std_final=self.explore_std_final,
            explore_decay=self.explore_decay, tau=self.tau,
            corrective_factor=self.corrective_factor, gain_bound=self.gain_bound,
            hidden=self.hidden, ema_window=self.ema_window,
            beta_min=self.beta_min, beta_max=self.beta_max,
            buffer_slack=self.buffer_slack, reset_scale=self.reset_scale,
            blowup_threshold=self.blowup_threshold, seed=self.seed,
        )

    def fit(self, model: MasModel, graph: NetworkGraph | None = None):
        if graph is None:
            if model.L != 1:
                raise ValueError("a communication graph is required for L > 1")
            graph = NetworkGraph(1, [])
        gains, metrics, params = train(
            model, graph, self._config(), lam=self.lam,
            delays_enabled=self.delays_enabled, noise_enabled=self.noise_enabled,
        )
        self.model_ = model
        self.gains_ = gains
        self.metrics_ = metrics
        self.params_ = params
        return self

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return -(self.gains_.K @ X.T).T
