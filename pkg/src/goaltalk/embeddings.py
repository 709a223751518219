"""Topic embeddings: random-walk skip-gram trainer and TSV file I/O.

The trainer runs uniform random walks over the graph and fits skip-gram
with negative sampling. Rows are L2-normalized after training so that
downstream dot products live on a common scale.
"""

from dataclasses import dataclass

import numpy as np

from goaltalk.errors import ConfigError, DataError, ParseError
from goaltalk import kernels


@dataclass
class WalkParams:
    walks_per_node: int = 10
    walk_length: int = 20
    window: int = 3
    negatives: int = 5
    learning_rate: float = 0.025
    epochs: int = 3
    seed: int = 0


@dataclass
class EmbeddingTable:
    labels: list
    rows: np.ndarray  # shape (n_topics, dim), float64

    @property
    def dim(self):
        return self.rows.shape[1]

    def row(self, topic):
        return self.rows[topic]


def _random_walks(graph, params, rng):
    """Uniform random walks, `walks_per_node` per start node."""
    walks = []
    nodes = np.arange(graph.n_topics)
    for _ in range(params.walks_per_node):
        order = rng.permutation(nodes)
        for start in order:
            walk = [int(start)]
            for _ in range(params.walk_length - 1):
                nbrs = graph.adjacency[walk[-1]]
                if not nbrs:
                    break
                walk.append(nbrs[rng.integers(len(nbrs))])
            walks.append(walk)
    return walks


def _skipgram_pairs(walks, window):
    centers = []
    contexts = []
    for walk in walks:
        L = len(walk)
        for i in range(L):
            lo = max(0, i - window)
            hi = min(L, i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    centers.append(walk[i])
                    contexts.append(walk[j])
    return np.asarray(centers, dtype=np.int64), np.asarray(contexts, dtype=np.int64)


def train_embeddings(graph, dim, params=None):
    """Train topic embeddings; deterministic for a fixed seed.

    Returns an EmbeddingTable with one L2-normalized row per topic.
    """
    if dim <= 0:
        raise ConfigError(f"embedding dim must be >= 1, got {dim}")
    if graph.n_topics == 0:
        raise ConfigError("cannot train embeddings on an empty graph")
    params = params or WalkParams()

    rng = np.random.default_rng(params.seed)
    n = graph.n_topics
    emb_in = (rng.random((n, dim)) - 0.5) / dim
    emb_out = np.zeros((n, dim), dtype=np.float64)

    walks = _random_walks(graph, params, rng)
    centers, contexts = _skipgram_pairs(walks, params.window)
    for epoch in range(params.epochs):
        order = rng.permutation(len(centers))
        negatives = rng.integers(0, n, size=(len(centers), params.negatives), dtype=np.int64)
        lr = params.learning_rate * (1.0 - epoch / max(1, params.epochs)) + 1e-4
        kernels.sgns_train_epoch(emb_in, emb_out, centers[order], contexts[order],
                                 negatives, lr)

    norms = np.linalg.norm(emb_in, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    rows = emb_in / norms
    return EmbeddingTable(list(graph.labels), rows)


def save_embeddings(table, path):
    """Write `label v1 .. vd` TSV, full float precision."""
    with open(path, "w", encoding="utf-8") as fh:
        for label, row in zip(table.labels, table.rows):
            fh.write(label + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")


def load_embeddings(source, graph):
    """Parse a `label v1 .. vd` TSV covering every graph topic exactly once."""
    rows_by_id = {}
    dim = None
    for lineno, line in enumerate(source, start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) < 2:
            raise ParseError("expected `label v1 ... vd`", lineno)
        label = fields[0].strip()
        if label not in graph.label_to_id:
            raise ParseError(f"label {label!r} is not a graph topic", lineno)
        try:
            values = [float(f) for f in fields[1:]]
        except ValueError as exc:
            raise ParseError(f"non-numeric value ({exc})", lineno) from None
        if dim is None:
            dim = len(values)
        elif len(values) != dim:
            raise ParseError(f"dimension {len(values)} != expected {dim}", lineno)
        tid = graph.label_to_id[label]
        if tid in rows_by_id:
            raise ParseError(f"duplicate embedding for {label!r}", lineno)
        rows_by_id[tid] = values

    missing = [graph.labels[i] for i in range(graph.n_topics) if i not in rows_by_id]
    if missing:
        raise DataError("embeddings missing for topics: " + ", ".join(missing))
    rows = np.array([rows_by_id[i] for i in range(graph.n_topics)], dtype=np.float64)
    if not np.isfinite(rows).all():
        raise DataError("embedding file contains non-finite values")
    return EmbeddingTable(list(graph.labels), rows)
