"""Static communication graph with per-link Gaussian noise and noise-aware routing.

Links are undirected and carry a non-zero-mean Gaussian noise model
N(mu, sigma2), identical in both directions.  Routing minimises the
Lagrangian cost

    J(route) = sum over links of (1 + lambda * sigma2),

so lambda = 0 recovers plain hop-count shortest paths while large lambda
prefers longer but quieter routes.  Ties are broken deterministically by
(fewer hops, lexicographically smallest node sequence), and the route for
an unordered pair is computed once from its smaller endpoint and mirrored,
which makes routes direction-symmetric by construction.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class LinkNoise:
    """Per-link noise moments; sigma2 >= 0, same for both directions."""

    mu: float = 0.0
    sigma2: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.mu) and np.isfinite(self.sigma2)):
            raise GraphError("link noise moments must be finite")
        if self.sigma2 < 0:
            raise GraphError(f"link variance must be >= 0, got {self.sigma2}")


def _edge_key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


class NetworkGraph:
    """Undirected connected graph over agents 1..L with LinkNoise per edge."""

    def __init__(self, L: int, edges):
        """edges: iterable of (i, j) or (i, j, LinkNoise)."""
        if L < 1:
            raise GraphError("need at least one node")
        self.L = L
        self._adj: dict[int, set[int]] = {i: set() for i in range(1, L + 1)}
        self._noise: dict[tuple[int, int], LinkNoise] = {}
        for e in edges:
            if len(e) == 2:
                i, j = e
                noise = LinkNoise()
            else:
                i, j, noise = e
                if not isinstance(noise, LinkNoise):
                    noise = LinkNoise(*noise)
            if i == j:
                raise GraphError(f"self-loop at node {i}")
            if not (1 <= i <= L and 1 <= j <= L):
                raise GraphError(f"edge ({i},{j}) references unknown node")
            key = _edge_key(i, j)
            if key in self._noise:
                raise GraphError(f"duplicate edge {key}")
            self._noise[key] = noise
            self._adj[i].add(j)
            self._adj[j].add(i)
        if not self._connected():
            raise GraphError("communication graph must be connected")

    def _connected(self) -> bool:
        seen = {1}
        stack = [1]
        while stack:
            for v in self._adj[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.L

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted(self._noise)

    def link_noise(self, i: int, j: int) -> LinkNoise:
        return self._noise[_edge_key(i, j)]

    def neighbors(self, ell: int) -> set[int]:
        """Nodes sharing an edge with ell."""
        if ell not in self._adj:
            raise GraphError(f"unknown node id {ell}")
        return set(self._adj[ell])

    def with_noise(self, noise_map: dict) -> "NetworkGraph":
        """Copy of this graph with edge noise replaced from {edge_key: LinkNoise}."""
        edges = []
        for (i, j) in self.edges:
            edges.append((i, j, noise_map.get((i, j), self._noise[(i, j)])))
        return NetworkGraph(self.L, edges)


@dataclass(frozen=True)
class Route:
    """Simple path from sender to receiver with aggregated noise moments.

    `edges` are the traversed links in order; delay d = hops - 1 (a direct
    link forwards with zero relative timing offset).  The self-route has no
    edges and zero moments.
    """

    receiver: int
    sender: int
    edges: tuple = ()
    mu_total: float = 0.0
    sigma2_total: float = 0.0

    @property
    def hops(self) -> int:
        return len(self.edges)

    @property
    def delay(self) -> int:
        return max(self.hops - 1, 0)


def aggregate_route_noise(graph: NetworkGraph, edges) -> tuple[float, float]:
    """Sum of link means and variances along a route (independent links).

    Summation runs in canonical edge-key order so that a route and its
    reverse produce bit-identical moments.
    """
    mu = 0.0
    s2 = 0.0
    for key in sorted(_edge_key(i, j) for (i, j) in edges):
        noise = graph.link_noise(*key)
        mu += noise.mu
        s2 += noise.sigma2
    return mu, s2


def route_cost(graph: NetworkGraph, route: Route, lam: float) -> float:
    """Lagrangian route cost sum(1 + lambda * sigma2); lambda=0 gives hops."""
    if lam < 0:
        raise GraphError("lambda must be >= 0")
    total = 0.0
    for (i, j) in route.edges:
        total += 1.0 + lam * graph.link_noise(i, j).sigma2
    return total


@dataclass
class RoutingTable:
    """Per receiver, the minimum-cost route from every sender."""

    lam: float
    routes: dict = field(default_factory=dict)  # (receiver, sender) -> Route
    costs: dict = field(default_factory=dict)  # (receiver, sender) -> J

    def route(self, receiver: int, sender: int) -> Route:
        return self.routes[(receiver, sender)]

    def delay(self, receiver: int, sender: int) -> int:
        return self.routes[(receiver, sender)].delay

    def max_delay(self, receiver: int) -> int:
        """D_ell: worst relative timing offset into `receiver`."""
        return max(
            (r.delay for (recv, _), r in self.routes.items() if recv == receiver),
            default=0,
        )


def _dijkstra_tree(graph: NetworkGraph, source: int, lam: float):
    """Min-cost simple paths from `source`, tie-broken by (hops, node sequence).

    Edge weights 1 + lambda*sigma2 >= 1 are strictly positive, so shortest
    paths are automatically simple.  The heap key carries the full node
    sequence to make equal-cost selections deterministic.
    """
    best: dict[int, tuple] = {source: (0.0, 0, (source,))}
    heap = [(0.0, 0, (source,))]
    while heap:
        cost, hops, path = heapq.heappop(heap)
        node = path[-1]
        if (cost, hops, path) != best.get(node):
            continue
        for nxt in sorted(graph._adj[node]):
            if nxt in path:
                continue
            w = 1.0 + lam * graph.link_noise(node, nxt).sigma2
            cand = (cost + w, hops + 1, path + (nxt,))
            if nxt not in best or cand < best[nxt]:
                best[nxt] = cand
                heapq.heappush(heap, cand)
    return best


def _path_to_route(graph: NetworkGraph, receiver: int, path: tuple) -> Route:
    """Route object for a node path written sender -> ... -> receiver."""
    edges = tuple((path[k], path[k + 1]) for k in range(len(path) - 1))
    mu, s2 = aggregate_route_noise(graph, edges)
    return Route(
        receiver=receiver,
        sender=path[0],
        edges=edges,
        mu_total=mu,
        sigma2_total=s2,
    )


def compute_routes(graph: NetworkGraph, lam: float) -> RoutingTable:
    """Noise-aware routing table for every ordered (receiver, sender) pair.

    Each unordered pair is solved once from its smaller endpoint and the
    resulting path mirrored for the opposite direction, so symmetric link
    noise yields symmetric routes under the deterministic tie-break.
    """
    if lam < 0:
        raise GraphError("lambda must be >= 0")
    table = RoutingTable(lam=lam)
    for src in range(1, graph.L + 1):
        tree = _dijkstra_tree(graph, src, lam)
        if len(tree) != graph.L:
            raise GraphError("graph is not connected")
        for dst in range(1, graph.L + 1):
            if dst < src:
                continue
            _, _, path = tree[dst]
            # Path reads src..dst.  Receiver src hears dst along the reverse.
            fwd = _path_to_route(graph, src, tuple(reversed(path)))
            table.routes[(src, dst)] = fwd
            table.costs[(src, dst)] = route_cost(graph, fwd, lam)
            if dst != src:
                rev = _path_to_route(graph, dst, path)
                table.routes[(dst, src)] = rev
                table.costs[(dst, src)] = route_cost(graph, rev, lam)
    return table


def neighbors(graph: NetworkGraph, ell: int) -> set[int]:
    return graph.neighbors(ell)
