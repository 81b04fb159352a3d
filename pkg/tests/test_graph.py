import numpy as np
import pytest

from conftest import random_connected_graph
from masnet.graph import (
    GraphError,
    LinkNoise,
    NetworkGraph,
    Route,
    aggregate_route_noise,
    compute_routes,
    neighbors,
    route_cost,
)


def enumerate_simple_paths(graph, src, dst):
    """All simple paths src -> dst as node tuples (brute force)."""
    out = []

    def walk(path):
        node = path[-1]
        if node == dst:
            out.append(tuple(path))
            return
        for nxt in sorted(graph.neighbors(node)):
            if nxt not in path:
                walk(path + [nxt])

    walk([src])
    return out


def path_cost(graph, path, lam):
    total = 0.0
    for a, b in zip(path, path[1:]):
        total += 1.0 + lam * graph.link_noise(a, b).sigma2
    return total


def test_route_cost_direct_link(detour_graph):
    table = compute_routes(detour_graph, lam=1.0)
    route = table.route(1, 4)
    assert route.edges == ((4, 1),) or route.edges == ((1, 4),)
    assert route_cost(detour_graph, route, 1.0) == pytest.approx(1.05, abs=1e-12)


def test_route_cost_lambda_zero_is_hop_count(detour_graph):
    route = Route(receiver=1, sender=4, edges=((4, 5), (5, 6), (6, 1)))
    assert route_cost(detour_graph, route, 0.0) == 3.0


def test_route_cost_quiet_detour_at_large_lambda(detour_graph):
    table = compute_routes(detour_graph, lam=500.0)
    route = table.route(1, 4)
    assert route.hops == 3
    assert route_cost(detour_graph, route, 500.0) == pytest.approx(14.0, abs=1e-9)


def test_route_switches_with_lambda(detour_graph):
    # hop counts 1 -> 2 -> 3 as lambda grows; costs 1.05, 5, 14.
    expect = {1.0: (1, 1.05), 100.0: (2, 5.0), 500.0: (3, 14.0)}
    for lam, (hops, cost) in expect.items():
        table = compute_routes(detour_graph, lam)
        route = table.route(1, 4)
        assert route.hops == hops
        assert table.costs[(1, 4)] == pytest.approx(cost, abs=1e-9)


def test_compute_routes_two_node_graph():
    g = NetworkGraph(2, [(1, 2, LinkNoise(0.0, 0.3))])
    for lam in (0.0, 1.0, 100.0):
        table = compute_routes(g, lam)
        assert table.route(1, 2).edges == ((2, 1),)
        assert table.route(2, 1).edges == ((1, 2),)


def test_compute_routes_matches_bruteforce_oracle():
    rng = np.random.default_rng(41)
    for _ in range(100):
        g = random_connected_graph(rng, max_nodes=7)
        lam = float(rng.choice([0.0, 1.0, 100.0]))
        table = compute_routes(g, lam)
        for recv in range(1, g.L + 1):
            for send in range(1, g.L + 1):
                if recv == send:
                    route = table.route(recv, send)
                    assert route.edges == () and route.delay == 0
                    continue
                best = min(
                    path_cost(g, p, lam)
                    for p in enumerate_simple_paths(g, send, recv)
                )
                assert table.costs[(recv, send)] == best


def test_routes_symmetric_under_symmetric_noise():
    rng = np.random.default_rng(97)
    for _ in range(20):
        g = random_connected_graph(rng, max_nodes=6)
        table = compute_routes(g, lam=float(rng.uniform(0, 50)))
        for i in range(1, g.L + 1):
            for j in range(i + 1, g.L + 1):
                fwd = table.route(i, j)
                rev = table.route(j, i)
                assert fwd.edges == tuple((b, a) for (a, b) in reversed(rev.edges))
                assert fwd.mu_total == rev.mu_total
                assert fwd.sigma2_total == rev.sigma2_total
                assert table.costs[(i, j)] == pytest.approx(table.costs[(j, i)], rel=1e-15)


def test_route_delay_is_hops_minus_one():
    rng = np.random.default_rng(13)
    for _ in range(10):
        g = random_connected_graph(rng)
        table = compute_routes(g, lam=1.0)
        for (recv, send), route in table.routes.items():
            if recv == send:
                assert route.delay == 0
            else:
                assert route.delay == route.hops - 1
                if route.hops == 1:
                    assert route.delay == 0


def test_aggregate_route_noise_fixture(detour_graph):
    mu, s2 = aggregate_route_noise(detour_graph, [(1, 2), (2, 4)])
    assert mu == pytest.approx(-0.01, abs=1e-15)
    assert s2 == pytest.approx(0.03, abs=1e-15)
    assert aggregate_route_noise(detour_graph, []) == (0.0, 0.0)


def test_aggregate_route_noise_monte_carlo(detour_graph):
    rng = np.random.default_rng(2024)
    edges = [(1, 6), (6, 5), (5, 4)]
    mu, s2 = aggregate_route_noise(detour_graph, edges)
    trials = 100_000
    draws = np.zeros(trials)
    for (i, j) in edges:
        noise = detour_graph.link_noise(i, j)
        draws += rng.normal(noise.mu, np.sqrt(noise.sigma2), size=trials)
    se_mean = np.sqrt(s2 / trials)
    assert abs(draws.mean() - mu) < 4 * se_mean
    assert abs(draws.var(ddof=1) - s2) < 0.05 * s2


def test_neighbors_six_node_example(six_node_graph):
    assert neighbors(six_node_graph, 2) == {1, 3, 6}


def test_neighbors_line_endpoint_and_complete():
    line = NetworkGraph(4, [(1, 2), (2, 3), (3, 4)])
    assert neighbors(line, 1) == {2}
    L = 5
    complete = NetworkGraph(L, [(i, j) for i in range(1, L + 1) for j in range(i + 1, L + 1)])
    for i in range(1, L + 1):
        assert neighbors(complete, i) == set(range(1, L + 1)) - {i}


def test_neighbors_unknown_node(six_node_graph):
    with pytest.raises(GraphError):
        neighbors(six_node_graph, 9)


def test_graph_construction_errors():
    with pytest.raises(GraphError):
        NetworkGraph(3, [(1, 2)])  # disconnected
    with pytest.raises(GraphError):
        NetworkGraph(2, [(1, 1)])  # self loop
    with pytest.raises(GraphError):
        NetworkGraph(2, [(1, 2), (2, 1)])  # duplicate edge
    with pytest.raises(GraphError):
        LinkNoise(mu=0.0, sigma2=-0.1)
