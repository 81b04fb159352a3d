"""Scenario configuration, metric bookkeeping, and the experiment runner.

Scenarios are INI files with [model], [network], [train], and [method]
sections (see `docs/config-schema` in the README).  A run builds the plant
and noisy communication graph, trains or solves per method and seed, rolls
the resulting gains out over the networked plant, and emits a per-episode
CSV plus a JSON summary.
"""

from __future__ import annotations

import configparser
import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .dst import DstController
from .dynamics import (
    GainMatrix,
    MasModel,
    RiccatiController,
    model_preset,
    spectral_radius,
)
from .graph import LinkNoise, NetworkGraph, compute_routes
from .learner import EpisodeMetrics, TrainConfig, train
from .messaging import NetworkEnv


class ConfigError(ValueError):
    pass


TOPOLOGY_KINDS = ("line", "ring", "tree", "degree3", "explicit")


def make_topology(kind: str, L: int) -> NetworkGraph:
    """Deterministic named topologies with noise-free links.

    line: chain 1-2-...-L; ring: the chain closed; tree: breadth-first
    binary tree rooted at node 1; degree3: ring plus antipodal-ish chords
    i <-> i + L//2 (3-regular for even L, one degree-2 node for odd L).
    """
    if L < 2:
        raise ConfigError("topologies need at least 2 agents")
    if kind == "line":
        edges = [(i, i + 1) for i in range(1, L)]
    elif kind == "ring":
        if L < 3:
            raise ConfigError("a ring needs at least 3 agents")
        edges = [(i, i + 1) for i in range(1, L)] + [(L, 1)]
    elif kind == "tree":
        edges = []
        for i in range(1, L + 1):
            for child in (2 * i, 2 * i + 1):
                if child <= L:
                    edges.append((i, child))
    elif kind == "degree3":
        if L < 4:
            raise ConfigError("degree3 needs at least 4 agents")
        edges = [(i, i + 1) for i in range(1, L)] + [(L, 1)]
        half = L // 2
        for i in range(1, half + 1):
            j = i + half
            if j <= L and (i, j) not in edges:
                edges.append((i, j))
    else:
        raise ConfigError(f"unknown topology kind {kind!r}")
    return NetworkGraph(L, edges)


def sample_link_noise(graph: NetworkGraph, rng: np.random.Generator) -> NetworkGraph:
    """Independent mu, sigma2 ~ Uniform[0, 0.1] per edge, symmetric by construction."""
    noise = {}
    for key in graph.edges:
        mu = rng.uniform(0.0, 0.1)
        s2 = rng.uniform(0.0, 0.1)
        noise[key] = LinkNoise(mu=mu, sigma2=s2)
    return graph.with_noise(noise)


def constant_link_noise(graph: NetworkGraph, mu: float, sigma2: float) -> NetworkGraph:
    noise = {key: LinkNoise(mu=mu, sigma2=sigma2) for key in graph.edges}
    return graph.with_noise(noise)


def cumulative_regret(costs, blown=None) -> np.ndarray:
    """Cumulative excess over the best-so-far cost, blown episodes excluded."""
    costs = np.asarray(costs, dtype=float)
    if blown is not None:
        keep = ~np.asarray(blown, dtype=bool)
        costs = costs[keep]
    out = np.empty(costs.shape[0])
    best = math.inf
    cum = 0.0
    for i, g in enumerate(costs):
        best = min(best, g)
        cum += g - best
        out[i] = cum
    return out


@dataclass
class MetricsRecord:
    scenario_id: str
    seed: int
    episode: int
    cost: float
    best_so_far: float
    regret: float
    spectral_radius: float
    blown_up: bool


CSV_COLUMNS = list(MetricsRecord.__dataclass_fields__)


def metrics_to_records(scenario_id: str, seed: int,
                       metrics: list[EpisodeMetrics]) -> list[MetricsRecord]:
    """Attach best-so-far/regret bookkeeping to raw per-episode metrics."""
    rows = []
    best = math.inf
    cum = 0.0
    for m in metrics:
        if not m.blown_up:
            best = min(best, m.cost)
            cum += m.cost - best
        rows.append(
            MetricsRecord(
                scenario_id=scenario_id,
                seed=seed,
                episode=m.episode,
                cost=m.cost,
                best_so_far=best,
                regret=cum,
                spectral_radius=m.spectral_radius,
                blown_up=m.blown_up,
            )
        )
    return rows


def write_metrics_csv(path, rows: list[MetricsRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow(
                [r.scenario_id, r.seed, r.episode, repr(r.cost), repr(r.best_so_far),
                 repr(r.regret), repr(r.spectral_radius), r.blown_up]
            )


def read_metrics_csv(path) -> list[MetricsRecord]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            rows.append(
                MetricsRecord(
                    scenario_id=rec["scenario_id"],
                    seed=int(rec["seed"]),
                    episode=int(rec["episode"]),
                    cost=float(rec["cost"]),
                    best_so_far=float(rec["best_so_far"]),
                    regret=float(rec["regret"]),
                    spectral_radius=float(rec["spectral_radius"]),
                    blown_up=rec["blown_up"] == "True",
                )
            )
    return rows


# ---------------------------------------------------------------------------
# Scenario configuration


@dataclass
class Scenario:
    scenario_id: str
    method: str
    model: MasModel
    graph: NetworkGraph
    lam: float
    seeds: list[int]
    train_cfg: TrainConfig
    horizon: int = 20
    eval_rollouts: int = 50
    delays_enabled: bool = True
    noise_enabled: bool = True
    out_dir: str = "."
    dst_rounds: int = 8
    dst_episodes_per_round: int = 40
    dst_explore_std: float = 0.2


def load_config(path) -> dict:
    """Parse an INI scenario file into {section: {key: value-string}}."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    return {s: dict(parser.items(s)) for s in parser.sections()}


def _get(conf: dict, section: str, key: str, cast, default=None):
    raw = conf.get(section, {}).get(key)
    if raw is None:
        if default is None:
            raise ConfigError(f"missing [{section}] {key}")
        return default
    try:
        if cast is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for [{section}] {key}: {raw!r} ({exc})") from exc


_TRAIN_FIELDS = {
    "lr": float, "gamma": float, "replay_capacity": int, "batch_size": int,
    "episodes": int, "steps_per_episode": int, "explore_std_init": float,
    "explore_std_final": float, "explore_decay": float, "tau": float,
    "corrective_factor": float, "gain_bound": float, "hidden": int,
    "ema_window": int, "beta_min": float, "beta_max": float,
    "buffer_slack": int, "reset_scale": float, "blowup_threshold": float,
    "seed": int,
}


def build_scenario(conf: dict, out_dir: str = ".", overrides: dict | None = None) -> Scenario:
    """Resolve a parsed config (plus optional {section: {key: val}} overrides)."""
    conf = {s: dict(kv) for s, kv in conf.items()}
    for section, kv in (overrides or {}).items():
        conf.setdefault(section, {}).update({k: str(v) for k, v in kv.items()})

    preset = conf.get("model", {}).get("preset")
    if preset:
        model = model_preset(preset.strip())
    else:
        try:
            A = np.array(json.loads(conf["model"]["a"]), dtype=float)
        except KeyError as exc:
            raise ConfigError("[model] needs `preset` or an inline `A` matrix") from exc
        L = A.shape[0]
        B = np.array(json.loads(conf["model"].get("b", "null")) or np.eye(L))
        S = np.array(json.loads(conf["model"].get("s", "null")) or np.eye(L))
        R = np.array(json.loads(conf["model"].get("r", "null")) or np.eye(L))
        model = MasModel(L=L, A=A, B=B, S=S, R=R)

    topology = _get(conf, "network", "topology", str, "ring").strip()
    if topology == "explicit":
        edge_spec = json.loads(_get(conf, "network", "edges", str))
        edges = []
        for item in edge_spec:
            if len(item) == 2:
                edges.append((int(item[0]), int(item[1])))
            else:
                i, j, mu, s2 = item
                edges.append((int(i), int(j), LinkNoise(float(mu), float(s2))))
        graph = NetworkGraph(model.L, edges)
    elif topology in TOPOLOGY_KINDS:
        graph = make_topology(topology, model.L)
    else:
        raise ConfigError(f"unknown topology {topology!r}")

    noise_kind = _get(conf, "network", "noise", str, "sampled").strip()
    noise_enabled = True
    if noise_kind == "sampled":
        noise_rng = np.random.default_rng(_get(conf, "network", "noise_seed", int, 0))
        graph = sample_link_noise(graph, noise_rng)
    elif noise_kind == "constant":
        graph = constant_link_noise(
            graph,
            _get(conf, "network", "noise_mu", float, 0.0),
            _get(conf, "network", "noise_sigma2", float, 0.02),
        )
    elif noise_kind == "none":
        graph = constant_link_noise(graph, 0.0, 0.0)
        noise_enabled = False
    elif noise_kind != "explicit":
        raise ConfigError(f"unknown noise spec {noise_kind!r}")

    train_kwargs = {}
    for key, raw in conf.get("train", {}).items():
        if key not in _TRAIN_FIELDS:
            raise ConfigError(f"unknown [train] field {key!r}")
        train_kwargs[key] = _get(conf, "train", key, _TRAIN_FIELDS[key])
    train_cfg = TrainConfig(**train_kwargs).validate()

    method = _get(conf, "method", "name", str, "cdnet").strip()
    if method not in ("cdnet", "dst", "opt"):
        raise ConfigError(f"unknown method {method!r}")
    seeds_raw = conf.get("method", {}).get("seeds", "0")
    try:
        seeds = [int(s) for s in seeds_raw.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"bad [method] seeds: {seeds_raw!r}") from exc

    lam = _get(conf, "network", "lambda", float, 1.0)
    scenario_id = conf.get("model", {}).get(
        "id", f"{method}-{preset or 'inline'}-{topology}-lam{lam:g}"
    )
    return Scenario(
        scenario_id=scenario_id,
        method=method,
        model=model,
        graph=graph,
        lam=lam,
        seeds=seeds,
        train_cfg=train_cfg,
        horizon=_get(conf, "method", "horizon", int, 20),
        eval_rollouts=_get(conf, "method", "eval_rollouts", int, 50),
        delays_enabled=_get(conf, "network", "delays", bool, True),
        noise_enabled=noise_enabled,
        out_dir=str(out_dir),
        dst_rounds=_get(conf, "method", "rounds", int, 8),
        dst_episodes_per_round=_get(conf, "method", "episodes_per_round", int, 40),
        dst_explore_std=_get(conf, "method", "explore_std", float, 0.2),
    )


def load_scenario(path, out_dir: str = ".", overrides: dict | None = None) -> Scenario:
    return build_scenario(load_config(path), out_dir=out_dir, overrides=overrides)


# ---------------------------------------------------------------------------
# Evaluation and the runner


def evaluate_gains(
    model: MasModel,
    gains: GainMatrix,
    graph: NetworkGraph,
    table,
    mode: str,
    delays_enabled: bool,
    noise_enabled: bool,
    horizon: int,
    n_eval: int,
    rng: np.random.Generator,
    reset_scale: float,
    blowup_threshold: float = 1e3,
) -> dict:
    """Roll constant gains out over the networked plant from random resets.

    Every agent computes its own input from its own (mode-dependent) view of
    the global state; costs accumulate on the true states.
    """
    costs = []
    blown = 0
    for _ in range(n_eval):
        env = NetworkEnv(
            model, graph, table, rng, mode=mode,
            delays_enabled=delays_enabled, noise_enabled=noise_enabled,
        )
        env.force_state(rng.uniform(-reset_scale, reset_scale, model.state_dim))
        total = 0.0
        for _ in range(horizon):
            views = env.observe()
            U = np.zeros(model.input_dim)
            for ell in range(model.L):
                U[model.input_block(ell)] = -gains.block(ell) @ views[ell]
            total += float(env.X @ model.S @ env.X + U @ model.R @ U)
            env.step(U)
            if np.max(np.abs(env.X)) > blowup_threshold:
                blown += 1
                break
        costs.append(total)
    return {"costs": np.array(costs), "blown": blown}


def _summary_window(episodes: int) -> int:
    return 1000 if episodes >= 1000 else max(1, episodes // 2)


def run_scenario(scenario: Scenario, verbose: bool = False) -> dict:
    """Train/solve per seed, evaluate, and write CSV + JSON artifacts."""
    out = Path(scenario.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = compute_routes(scenario.graph, scenario.lam)
    eval_mode = "refined" if scenario.method == "cdnet" else "raw"
    if not scenario.noise_enabled and not scenario.delays_enabled:
        eval_mode = "exact"

    rows: list[MetricsRecord] = []
    per_seed: dict[str, dict] = {}
    debug_rows: list[dict] = []
    for seed in scenario.seeds:
        eval_rng = np.random.default_rng([seed, 0xE7A1])
        seed_info: dict = {}
        if scenario.method == "opt":
            ctl = RiccatiController().fit(scenario.model)
            gains = ctl.gains_
            seed_info["dare_residual"] = ctl.solution_.residual
        elif scenario.method == "dst":
            ctl = DstController(
                lam=scenario.lam,
                rounds=scenario.dst_rounds,
                episodes_per_round=scenario.dst_episodes_per_round,
                steps_per_episode=scenario.train_cfg.steps_per_episode,
                explore_std=scenario.dst_explore_std,
                reset_scale=scenario.train_cfg.reset_scale,
                seed=seed,
                delays_enabled=scenario.delays_enabled,
                noise_enabled=scenario.noise_enabled,
            ).fit(scenario.model, scenario.graph, table=table)
            gains = ctl.gains_
        else:
            cfg = TrainConfig(**{**asdict(scenario.train_cfg), "seed": seed})
            debug_sink: dict = {}
            gains, metrics, _ = train(
                scenario.model, scenario.graph, cfg, lam=scenario.lam, table=table,
                delays_enabled=scenario.delays_enabled,
                noise_enabled=scenario.noise_enabled,
                debug_sink=debug_sink if verbose else None,
            )
            seed_rows = metrics_to_records(scenario.scenario_id, seed, metrics)
            rows.extend(seed_rows)
            window = _summary_window(len(metrics))
            tail = [m.cost for m in metrics[-window:] if not m.blown_up]
            seed_info["final_cost_mean"] = float(np.mean(tail)) if tail else math.inf
            seed_info["final_regret"] = seed_rows[-1].regret if seed_rows else 0.0
            seed_info["blown_episodes"] = int(sum(m.blown_up for m in metrics))
            if verbose and debug_sink:
                for ell, snap in enumerate(debug_sink.get("buffers", [])):
                    for ref, values, filled in snap:
                        debug_rows.append(
                            {"seed": seed, "agent": ell + 1, "ref_time": ref,
                             "values": values.tolist(), "filled": filled.tolist()}
                        )

        rho = spectral_radius(scenario.model.A - scenario.model.B @ gains.K)
        ev = evaluate_gains(
            scenario.model, gains, scenario.graph, table, eval_mode,
            scenario.delays_enabled, scenario.noise_enabled,
            scenario.horizon, scenario.eval_rollouts, eval_rng,
            scenario.train_cfg.reset_scale, scenario.train_cfg.blowup_threshold,
        )
        seed_info.update(
            {
                "spectral_radius": rho,
                "eval_cost_mean": float(np.mean(ev["costs"])),
                "eval_cost_std": float(np.std(ev["costs"])),
                "eval_blown": ev["blown"],
                "gains": gains.K.tolist(),
            }
        )
        if "final_cost_mean" not in seed_info:
            seed_info["final_cost_mean"] = seed_info["eval_cost_mean"]
        per_seed[str(seed)] = seed_info

    finals = [info["final_cost_mean"] for info in per_seed.values()]
    evals = [info["eval_cost_mean"] for info in per_seed.values()]
    radii = [info["spectral_radius"] for info in per_seed.values()]
    summary = {
        "scenario_id": scenario.scenario_id,
        "method": scenario.method,
        "lambda": scenario.lam,
        "agents": scenario.model.L,
        "seeds": scenario.seeds,
        "cost_mean": float(np.mean(finals)),
        "cost_std": float(np.std(finals)),
        "eval_cost_mean": float(np.mean(evals)),
        "eval_cost_std": float(np.std(evals)),
        "spectral_radius_mean": float(np.mean(radii)),
        "per_seed": per_seed,
    }

    if scenario.method == "cdnet":
        write_metrics_csv(out / f"{scenario.scenario_id}_episodes.csv", rows)
    if verbose and debug_rows:
        with open(out / f"{scenario.scenario_id}_buffers.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["seed", "agent", "ref_time", "values", "filled"])
            writer.writeheader()
            writer.writerows(debug_rows)
    with open(out / f"{scenario.scenario_id}_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    return summary


SWEEP_AXES = ("lambda", "size", "topology")


def sweep(conf: dict, axis: str, values: list, out_dir: str = ".",
          verbose: bool = False) -> dict:
    """Run one scenario per axis value and aggregate steady-state costs."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    results = {}
    for value in values:
        if axis == "lambda":
            overrides = {"network": {"lambda": value}}
        elif axis == "size":
            overrides = {"model": {"preset": f"A{int(value)}"}}
        else:
            overrides = {"network": {"topology": value}}
        sub_dir = Path(out_dir) / f"{axis}_{value}"
        scenario = build_scenario(conf, out_dir=str(sub_dir), overrides=overrides)
        scenario.scenario_id = f"{scenario.scenario_id}-{axis}{value}"
        summary = run_scenario(scenario, verbose=verbose)
        results[str(value)] = {
            "cost_mean": summary["cost_mean"],
            "cost_std": summary["cost_std"],
            "summary": summary,
        }
    aggregate = {"axis": axis, "values": [str(v) for v in values], "results": results}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"sweep_{axis}.json", "w") as fh:
        json.dump(aggregate, fh, indent=2, sort_keys=True)
    return aggregate
