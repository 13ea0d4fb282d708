"""Random graph generators shared by the tests."""

from aivip.graph import MixedGraph, bidirected, directed
from aivip.projection import ProjectionSpec


def random_dag(rng, n_nodes, density, prefix="V"):
    names = [f"{prefix}{i}" for i in range(n_nodes)]
    order = rng.permutation(n_nodes)
    pairs = [(names[order[i]], names[order[j]])
             for i in range(n_nodes) for j in range(i + 1, n_nodes) if rng.random() < density]
    return MixedGraph(names, directed(*pairs))


def random_ancestral(rng, n_nodes, density, p_bidirected=0.4):
    """Random DAG, then bidirected edges between ancestrally unrelated pairs."""
    names = [f"V{i}" for i in range(n_nodes)]
    order = rng.permutation(n_nodes)
    di, cand = [], []
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if rng.random() < density:
                pair = (names[order[i]], names[order[j]])
                (cand if rng.random() < p_bidirected else di).append(pair)
    g = MixedGraph(names, directed(*di))
    bi = [(a, b) for a, b in cand if a not in g.ancestors(b)]
    return MixedGraph(names, directed(*di) + bidirected(*bi))


def random_latent_dag(rng, max_observed=5, max_latent=2):
    n_obs = int(rng.integers(2, max_observed + 1))
    n_lat = int(rng.integers(0, max_latent + 1))
    obs = [f"V{i}" for i in range(n_obs)]
    lat = [f"L{i}" for i in range(n_lat)]
    nodes = obs + lat
    order = rng.permutation(len(nodes))
    p = rng.uniform(0.25, 0.7)
    pairs = [(nodes[order[i]], nodes[order[j]])
             for i in range(len(nodes)) for j in range(i + 1, len(nodes)) if rng.random() < p]
    return ProjectionSpec.from_latent(MixedGraph(nodes, directed(*pairs)), lat)
