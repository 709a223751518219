"""Synthetic desk-scale worlds: preferential-attachment graphs plus
distance-verified start-goal pairs with a train/test split."""

from collections import deque
from dataclasses import dataclass

import numpy as np

from goaltalk.errors import ConfigError, DataError


@dataclass(frozen=True)
class SyntheticWorldSpec:
    node_count: int = 300
    edges_per_node: int = 2
    seed: int = 0
    pair_count: int = 100
    min_pair_distance: int = 2
    max_pair_distance: int = 6
    train_fraction: float = 0.8
    relation_count: int = 5

    def __post_init__(self):
        if self.node_count < 10:
            raise ConfigError(f"node count must be >= 10, got {self.node_count}")
        if self.edges_per_node < 1:
            raise ConfigError("edges per node must be >= 1")
        if not 1 <= self.min_pair_distance <= self.max_pair_distance:
            raise ConfigError("pair distance bounds must satisfy 1 <= min <= max")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train fraction must lie in (0, 1)")


def _bfs_distances(adj, source):
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def generate_world(spec):
    """Returns (triple lines, train pairs, test pairs) as label tuples.

    Each new node attaches to min(m, existing) distinct nodes drawn with
    degree-proportional probability, which keeps the graph connected.
    """
    rng = np.random.default_rng(spec.seed)
    n, m = spec.node_count, spec.edges_per_node
    labels = [f"t{i:04d}" for i in range(n)]
    adj = [set() for _ in range(n)]
    edges = []
    degree_bag = [0]  # node ids repeated by degree; node 0 seeds the bag
    for new in range(1, n):
        k = min(m, new)
        chosen = set()
        while len(chosen) < k:
            pick = int(degree_bag[int(rng.integers(len(degree_bag)))])
            chosen.add(pick)
        for tgt in sorted(chosen):
            edges.append((new, tgt))
            adj[new].add(tgt)
            adj[tgt].add(new)
            degree_bag.extend((new, tgt))
    triples = [
        f"{labels[h]}\trel{int(rng.integers(spec.relation_count))}\t{labels[t]}"
        for h, t in edges
    ]

    pairs = []
    seen = set()
    attempts = 0
    max_attempts = spec.pair_count * 200
    while len(pairs) < spec.pair_count:
        attempts += 1
        if attempts > max_attempts:
            raise DataError(
                f"could not sample {spec.pair_count} pairs with distance in "
                f"[{spec.min_pair_distance}, {spec.max_pair_distance}] after {max_attempts} tries")
        s = int(rng.integers(n))
        g = int(rng.integers(n))
        if s == g or (s, g) in seen:
            continue
        dist = _bfs_distances(adj, s).get(g)
        if dist is None or not spec.min_pair_distance <= dist <= spec.max_pair_distance:
            continue
        seen.add((s, g))
        pairs.append((labels[s], labels[g]))

    n_train = int(round(spec.train_fraction * len(pairs)))
    n_train = min(max(n_train, 1), len(pairs) - 1)
    return triples, pairs[:n_train], pairs[n_train:]


def write_world(spec, out_dir):
    """Write triples.tsv, pairs_train.tsv, pairs_test.tsv under out_dir."""
    import os

    triples, train_pairs, test_pairs = generate_world(spec)
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "triples": os.path.join(out_dir, "triples.tsv"),
        "pairs_train": os.path.join(out_dir, "pairs_train.tsv"),
        "pairs_test": os.path.join(out_dir, "pairs_test.tsv"),
    }
    with open(paths["triples"], "w", encoding="utf-8") as fh:
        fh.write("\n".join(triples) + "\n")
    for key, pairs in (("pairs_train", train_pairs), ("pairs_test", test_pairs)):
        with open(paths[key], "w", encoding="utf-8") as fh:
            for s, g in pairs:
                fh.write(f"{s}\t{g}\n")
    return paths


def load_pairs(path, graph):
    """Read `start goal` label pairs into topic-id tuples."""
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise DataError(f"{path} line {lineno}: expected `start<TAB>goal`")
            pairs.append((graph.topic_id(fields[0].strip()), graph.topic_id(fields[1].strip())))
    if not pairs:
        raise DataError(f"{path}: no pairs found")
    return pairs
