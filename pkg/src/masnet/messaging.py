"""Noisy multi-hop state exchange, debiasing/EMA refinement, and time alignment.

Per discrete step, every agent receives each other agent's state over its
static route: the payload is the sender's state as sampled d hops-minus-one
steps ago, plus one fresh Gaussian draw per traversed link.  Receivers
subtract the accumulated link bias, low-pass the result with an adaptive
exponential moving average, and assemble a refined global state estimate
whose own component is exact.

Because hop delays are fixed by routing, each received component can also be
re-aligned to a common time reference after the fact: a FIFO of partially
reconstructed global states absorbs component m of the estimate at local
time t into the slot for reference time t - d_m.  Slots leave the FIFO fully
time-aligned once every delayed component has arrived.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .dynamics import MasModel, step_global
from .graph import NetworkGraph, Route, RoutingTable


class BufferError(RuntimeError):
    pass


@dataclass(frozen=True)
class RawObservation:
    """One received (noisy) state sub-vector at the receiver's local time."""

    sender: int
    receiver: int
    value: np.ndarray
    t: int = 0


def transmit(x_m, route: Route, graph: NetworkGraph, rng: np.random.Generator, t: int = 0) -> RawObservation:
    """Send x_m along `route`, adding one fresh N(mu, sigma2) draw per link.

    Noise draws are independent across links, components, and transmissions.
    """
    x = np.atleast_1d(np.asarray(x_m, dtype=float)).copy()
    for (i, j) in route.edges:
        noise = graph.link_noise(i, j)
        x += rng.normal(noise.mu, np.sqrt(noise.sigma2), size=x.shape)
    return RawObservation(sender=route.sender, receiver=route.receiver, value=x, t=t)


def debias(y, mu_total: float):
    """Remove the accumulated route bias: y - mu_total, element-wise."""
    return np.asarray(y, dtype=float) - mu_total


class EmaChannel:
    """Adaptive first-order low-pass filter for one (receiver, sender) channel.

    The smoothing coefficient follows the steady-state Kalman gain form
    beta = var_x / (var_x + sigma2_route), where var_x is the unbiased
    sample variance of the last W refined-value differences (component-
    averaged for vector states), clamped to [beta_min, beta_max].  Until two
    differences exist the filter trusts fresh data with beta = beta_max; the
    very first observation seeds the state directly.
    """

    def __init__(
        self,
        mu_total: float = 0.0,
        sigma2_total: float = 0.0,
        window: int = 10,
        beta_min: float = 0.05,
        beta_max: float = 0.95,
    ):
        if not 0.0 < beta_min <= beta_max <= 1.0:
            raise ValueError("need 0 < beta_min <= beta_max <= 1")
        self.mu_total = float(mu_total)
        self.sigma2_total = float(sigma2_total)
        self.beta_min = float(beta_min)
        self.beta_max = float(beta_max)
        self.diffs: deque = deque(maxlen=window)
        self.prev: np.ndarray | None = None

    @classmethod
    def for_route(cls, route: Route, **kwargs) -> "EmaChannel":
        return cls(mu_total=route.mu_total, sigma2_total=route.sigma2_total, **kwargs)

    def window_variance(self) -> float:
        """Unbiased variance of windowed differences; 0 with < 2 samples."""
        if len(self.diffs) < 2:
            return 0.0
        d = np.asarray(self.diffs, dtype=float)
        return float(np.var(d, axis=0, ddof=1).mean())

    def adapt_beta(self) -> float:
        if len(self.diffs) < 2:
            return self.beta_max
        var_x = self.window_variance()
        denom = var_x + self.sigma2_total
        if denom <= 0.0:
            return self.beta_max
        return float(np.clip(var_x / denom, self.beta_min, self.beta_max))

    def refine(self, y_bar, beta: float | None = None) -> np.ndarray:
        """beta * y_bar + (1 - beta) * prev; advances window and state."""
        y_bar = np.atleast_1d(np.asarray(y_bar, dtype=float))
        if self.prev is None:
            x = y_bar.copy()
        else:
            if beta is None:
                beta = self.adapt_beta()
            x = beta * y_bar + (1.0 - beta) * self.prev
            self.diffs.append(x - self.prev)
        self.prev = x
        return x


def build_refined_state(ell: int, own_state, refined: dict, L: int, n: int = 1) -> np.ndarray:
    """Assemble the length-nL refined global state for agent ell.

    `refined` maps every other agent id to its refined sub-vector; position
    ell carries the owner's exact state regardless of channel noise.
    """
    X = np.zeros(L * n)
    own = np.atleast_1d(np.asarray(own_state, dtype=float))
    for m in range(1, L + 1):
        if m == ell:
            sub = own
        else:
            if m not in refined:
                raise KeyError(f"missing refined value for sender {m}")
            sub = np.atleast_1d(np.asarray(refined[m], dtype=float))
        X[(m - 1) * n : m * n] = sub
    return X


class _Slot:
    __slots__ = ("values", "filled", "ref_time")

    def __init__(self, L: int, n: int, ref_time: int):
        self.values = np.zeros(L * n)
        self.filled = np.zeros(L, dtype=bool)
        self.ref_time = ref_time


class TimeShiftBuffer:
    """FIFO of partially reconstructed, time-aligned global states.

    Component m of the estimate pushed at local time t lands in the slot at
    depth d_m from the newest end (its sample actually dates from t - d_m).
    Each push then rotates the FIFO: the oldest slot moves to a ready queue
    for consumption via pop_reconstructed(), and a fresh zero slot enters.
    A slot therefore traverses depths 0..P-1 before leaving, which requires
    every delay to be < P.
    """

    def __init__(self, owner: int, delays: dict, L: int, n: int = 1, capacity: int | None = None):
        self.owner = owner
        self.L = L
        self.n = n
        self.delays = {int(m): int(d) for m, d in delays.items()}
        max_delay = max(self.delays.values(), default=0)
        self.capacity = int(capacity) if capacity is not None else max_delay + 4
        if max_delay >= self.capacity:
            raise BufferError(
                f"delay {max_delay} >= buffer capacity {self.capacity}; "
                "capacity must exceed the maximum route delay"
            )
        self.pushes = 0
        # Slot at depth k during the first push has reference time -k.
        self._slots: deque[_Slot] = deque(
            _Slot(L, n, ref_time=-(self.capacity - 1 - i)) for i in range(self.capacity)
        )
        self._ready: deque[_Slot] = deque()

    def push(self, X_tilde) -> None:
        """Scatter one refined global state into its delay-shifted slots."""
        X = np.asarray(X_tilde, dtype=float).reshape(-1)
        if X.shape[0] != self.L * self.n:
            raise ValueError(f"expected state of length {self.L * self.n}")
        top = len(self._slots) - 1
        for m in range(1, self.L + 1):
            d = self.delays.get(m, 0)
            slot = self._slots[top - d]
            slot.values[(m - 1) * self.n : m * self.n] = X[(m - 1) * self.n : m * self.n]
            slot.filled[m - 1] = True
        self._ready.append(self._slots.popleft())
        self.pushes += 1
        self._slots.append(_Slot(self.L, self.n, ref_time=self.pushes))

    @property
    def ready_count(self) -> int:
        return len(self._ready)

    def pop_reconstructed(self) -> tuple[np.ndarray, bool, int]:
        """Oldest reconstructed state, its fully-filled flag, and reference time."""
        if not self._ready:
            raise BufferError("pop from empty reconstruction queue")
        slot = self._ready.popleft()
        return slot.values, bool(slot.filled.all()), slot.ref_time

    def peek_slots(self) -> list[tuple[int, np.ndarray, np.ndarray]]:
        """Snapshot of (ref_time, values, filled) for in-flight slots, oldest first."""
        return [(s.ref_time, s.values.copy(), s.filled.copy()) for s in self._slots]


class NetworkEnv:
    """Closed-loop plant simulation with per-agent networked state estimation.

    Advances all agents synchronously on a global clock; asynchrony shows up
    only through the relative hop delays of the routed payloads.  Estimation
    modes:

    - "exact":   every agent sees the true global state (ideal communication);
    - "raw":     delayed payloads plus accumulated link noise, unprocessed;
    - "refined": debiased and EMA-filtered observations (message passing).

    Delays and noise can be switched off independently to emulate the
    delay-only / noise-only conditions.
    """

    def __init__(
        self,
        model: MasModel,
        graph: NetworkGraph,
        table: RoutingTable,
        rng: np.random.Generator,
        mode: str = "refined",
        delays_enabled: bool = True,
        noise_enabled: bool = True,
        ema_window: int = 10,
        beta_min: float = 0.05,
        beta_max: float = 0.95,
    ):
        if mode not in ("exact", "raw", "refined"):
            raise ValueError(f"unknown estimation mode {mode!r}")
        if graph.L != model.L:
            raise ValueError("graph and model disagree on the number of agents")
        self.model = model
        self.graph = graph
        self.table = table
        self.rng = rng
        self.mode = mode
        self.delays_enabled = delays_enabled
        self.noise_enabled = noise_enabled
        self.L = model.L
        self.n = model.n
        self._channels: dict[tuple[int, int], EmaChannel] = {}
        self._edge_params: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
        for ell in range(1, self.L + 1):
            for m in range(1, self.L + 1):
                if m == ell:
                    continue
                route = table.route(ell, m)
                self._channels[(ell, m)] = EmaChannel.for_route(
                    route, window=ema_window, beta_min=beta_min, beta_max=beta_max
                )
                mus = np.array([graph.link_noise(i, j).mu for (i, j) in route.edges])
                sds = np.array(
                    [np.sqrt(graph.link_noise(i, j).sigma2) for (i, j) in route.edges]
                )
                self._edge_params[(ell, m)] = (mus, sds)
        self.max_delay = max(
            (table.delay(ell, m) for (ell, m) in self._channels), default=0
        )
        self._history: deque[np.ndarray] = deque(maxlen=self.max_delay + 1)
        self.X = np.zeros(model.state_dim)

    def delay(self, ell: int, m: int) -> int:
        if not self.delays_enabled or ell == m:
            return 0
        return self.table.delay(ell, m)

    def receiver_max_delay(self, ell: int) -> int:
        return max(self.delay(ell, m) for m in range(1, self.L + 1))

    def force_state(self, X0) -> None:
        """Teleport the plant (episode reset); in-flight payloads are kept."""
        self.X = np.asarray(X0, dtype=float).reshape(-1).copy()
        if not self._history:
            # Cold start: prime the pipeline so delayed reads are defined.
            for _ in range(self._history.maxlen):
                self._history.append(self.X.copy())
        else:
            self._history.append(self.X.copy())

    def _payload(self, m: int, d: int) -> np.ndarray:
        """Sender m's state as sampled d steps ago."""
        past = self._history[max(len(self._history) - 1 - d, 0)]
        return past[(m - 1) * self.n : m * self.n]

    def observe(self) -> list[np.ndarray]:
        """Per-agent global state estimates for the current step.

        Draws fresh link noise; call exactly once per time step.
        """
        if not self._history:
            self.force_state(self.X)
        if self.mode == "exact":
            return [self.X.copy() for _ in range(self.L)]
        estimates = []
        for ell in range(1, self.L + 1):
            refined: dict[int, np.ndarray] = {}
            for m in range(1, self.L + 1):
                if m == ell:
                    continue
                payload = self._payload(m, self.delay(ell, m)).copy()
                if self.noise_enabled:
                    mus, sds = self._edge_params[(ell, m)]
                    if mus.size:
                        draws = self.rng.normal(
                            mus[:, None], sds[:, None], size=(mus.size, self.n)
                        )
                        payload = payload + draws.sum(axis=0)
                if self.mode == "raw":
                    refined[m] = payload
                else:
                    channel = self._channels[(ell, m)]
                    y_bar = debias(payload, channel.mu_total)
                    if not self.noise_enabled or channel.sigma2_total == 0.0:
                        # Noise-free channel: the Kalman-gain form gives
                        # beta -> 1, so nothing to filter.
                        refined[m] = y_bar
                    else:
                        refined[m] = channel.refine(y_bar)
            own = self.X[(ell - 1) * self.n : ell * self.n]
            estimates.append(build_refined_state(ell, own, refined, self.L, self.n))
        return estimates

    def step(self, U) -> np.ndarray:
        """Apply the global input and advance the plant one step."""
        self.X = step_global(self.model, self.X, U)
        self._history.append(self.X.copy())
        return self.X
