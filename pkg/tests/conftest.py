import numpy as np
import pytest

from goaltalk import embeddings as emb
from goaltalk import kg
from goaltalk.worldgen import SyntheticWorldSpec, generate_world


def path_graph(n):
    """0-1-2-...-(n-1)."""
    return kg.load_triples([f"n{i}\tr\tn{i + 1}" for i in range(n - 1)])


def star_graph(leaves):
    return kg.load_triples([f"hub\tr\tleaf{i}" for i in range(leaves)])


@pytest.fixture(scope="session")
def small_world():
    """A 60-node preferential-attachment world with id pairs resolved."""
    spec = SyntheticWorldSpec(node_count=60, pair_count=16, seed=11)
    triples, train_labels, test_labels = generate_world(spec)
    graph = kg.load_triples(triples)
    to_ids = lambda pairs: [(graph.topic_id(a), graph.topic_id(b)) for a, b in pairs]
    return {
        "graph": graph,
        "train_pairs": to_ids(train_labels),
        "test_pairs": to_ids(test_labels),
    }


@pytest.fixture(scope="session")
def small_table(small_world):
    params = emb.WalkParams(walks_per_node=4, walk_length=10, window=3,
                            negatives=5, epochs=1, seed=4)
    return emb.train_embeddings(small_world["graph"], 16, params)


def bfs_oracle(graph, source):
    """Plain BFS distances, independent of the kernel implementations."""
    dist = {source: 0}
    frontier = [source]
    while frontier:
        nxt = []
        for v in frontier:
            for w in graph.adjacency[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


def random_connected_graph(n, extra_edges, seed):
    """Random spanning tree plus extra random edges."""
    rng = np.random.default_rng(seed)
    lines = []
    for v in range(1, n):
        u = int(rng.integers(v))
        lines.append(f"v{u}\te\tv{v}")
    for _ in range(extra_edges):
        a, b = rng.integers(n, size=2)
        if a != b:
            lines.append(f"v{int(a)}\te\tv{int(b)}")
    return kg.load_triples(lines)
