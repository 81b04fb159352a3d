"""Distributed LQR control of multi-agent systems over noisy, delayed networks."""

from .dynamics import (
    GainMatrix,
    MasModel,
    RiccatiController,
    RiccatiSolution,
    Trajectory,
    model_preset,
    rollout,
    solve_dare,
    spectral_radius,
    stage_cost,
    step_global,
)
from .dst import DstController, dst_gain, fit_theta, quadratic_basis, theta_to_H
from .experiments import (
    Scenario,
    build_scenario,
    cumulative_regret,
    load_scenario,
    make_topology,
    run_scenario,
    sample_link_noise,
    sweep,
)
from .graph import (
    LinkNoise,
    NetworkGraph,
    Route,
    RoutingTable,
    aggregate_route_noise,
    compute_routes,
    neighbors,
    route_cost,
)
from .learner import (
    CdnetController,
    CdnetParams,
    TrainConfig,
    load_params,
    save_params,
    train,
)
from .messaging import EmaChannel, NetworkEnv, TimeShiftBuffer, debias, transmit

__all__ = [
    "CdnetController",
    "CdnetParams",
    "DstController",
    "EmaChannel",
    "GainMatrix",
    "LinkNoise",
    "MasModel",
    "NetworkEnv",
    "NetworkGraph",
    "RiccatiController",
    "RiccatiSolution",
    "Route",
    "RoutingTable",
    "Scenario",
    "TimeShiftBuffer",
    "TrainConfig",
    "Trajectory",
    "aggregate_route_noise",
    "build_scenario",
    "compute_routes",
    "cumulative_regret",
    "debias",
    "dst_gain",
    "fit_theta",
    "load_params",
    "load_scenario",
    "make_topology",
    "model_preset",
    "neighbors",
    "quadratic_basis",
    "rollout",
    "route_cost",
    "run_scenario",
    "sample_link_noise",
    "save_params",
    "solve_dare",
    "spectral_radius",
    "stage_cost",
    "step_global",
    "sweep",
    "theta_to_H",
    "train",
    "transmit",
]
