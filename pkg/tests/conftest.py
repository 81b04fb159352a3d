import numpy as np
import pytest

from masnet.graph import LinkNoise, NetworkGraph

# Six-agent fixture with a noisy direct link 1-4 and two quieter detours.
# Route costs at lambda: direct {1-4} = 1 + 0.05*lam, {1-2,2-4} = 2 + 0.03*lam,
# {1-2,2-3,3-4} = 3 + 0.05*lam, {1-6,6-5,5-4} = 3 + 0.022*lam.
FIXTURE_EDGES = [
    (1, 4, LinkNoise(mu=0.0, sigma2=0.05)),
    (1, 2, LinkNoise(mu=-0.02, sigma2=0.02)),
    (2, 4, LinkNoise(mu=0.01, sigma2=0.01)),
    (2, 3, LinkNoise(mu=0.0, sigma2=0.02)),
    (3, 4, LinkNoise(mu=0.0, sigma2=0.01)),
    (1, 6, LinkNoise(mu=0.0, sigma2=0.01)),
    (6, 5, LinkNoise(mu=0.0, sigma2=0.006)),
    (5, 4, LinkNoise(mu=0.0, sigma2=0.006)),
]


@pytest.fixture
def detour_graph() -> NetworkGraph:
    return NetworkGraph(6, FIXTURE_EDGES)


@pytest.fixture
def six_node_graph() -> NetworkGraph:
    # Agent 2's neighbors are exactly {1, 3, 6}; 2->4 can run 2-3-5-4.
    return NetworkGraph(6, [(1, 2), (2, 3), (2, 6), (3, 5), (4, 5)])


def random_connected_graph(rng: np.random.Generator, max_nodes: int = 7) -> NetworkGraph:
    """Random spanning tree plus random extra edges, random link noise."""
    L = int(rng.integers(2, max_nodes + 1))
    edges = set()
    nodes = list(range(1, L + 1))
    rng.shuffle(nodes)
    for k in range(1, L):
        attach = nodes[int(rng.integers(0, k))]
        edges.add(tuple(sorted((nodes[k], attach))))
    extra = int(rng.integers(0, L))
    for _ in range(extra):
        i, j = rng.choice(range(1, L + 1), size=2, replace=False)
        edges.add(tuple(sorted((int(i), int(j)))))
    spec = [
        (i, j, LinkNoise(mu=float(rng.uniform(-0.1, 0.1)), sigma2=float(rng.uniform(0, 0.1))))
        for (i, j) in sorted(edges)
    ]
    return NetworkGraph(L, spec)
