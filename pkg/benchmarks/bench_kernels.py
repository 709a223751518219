"""Benchmark the compiled kernels against the pure-Python fallback.

Run: python benchmarks/bench_kernels.py

Covers the three hot paths: BFS balls, pairwise ball-intersection distance,
and one skip-gram SGD epoch.
"""

import time

import numpy as np

from goaltalk import kernels
from goaltalk.kg import load_triples
from goaltalk.worldgen import SyntheticWorldSpec, generate_world


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(nodes=300, pairs=20000, sg_pairs=100000, repeats=3):
    triples, _, _ = generate_world(SyntheticWorldSpec(node_count=nodes, pair_count=10, seed=0))
    graph = load_triples(triples)
    indptr, indices = graph.csr()
    rng = np.random.default_rng(0)

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (active: {kernels.BACKEND})")
    print(f"world: {nodes} nodes, {len(indices) // 2} edges")
    rows = []

    for name in backends:
        impl = kernels.get_backend(name)

        def bench_bfs():
            for center in range(nodes):
                impl.bfs_ball(indptr, indices, center, 3)

        balls = [impl.bfs_ball(indptr, indices, c, 3) for c in range(nodes)]
        idx = rng.integers(0, nodes, size=(pairs, 2))

        def bench_pairs():
            for a, b in idx:
                impl.pair_ball_distance(balls[a], balls[b])

        dim = 50
        ein = (rng.random((nodes, dim)) - 0.5) / dim
        eout = np.zeros((nodes, dim))
        centers = rng.integers(0, nodes, sg_pairs).astype(np.int64)
        contexts = rng.integers(0, nodes, sg_pairs).astype(np.int64)
        negs = rng.integers(0, nodes, (sg_pairs, 5)).astype(np.int64)

        def bench_sgns():
            impl.sgns_train_epoch(ein.copy(), eout.copy(), centers, contexts, negs, 0.025)

        rows.append((name, _time(bench_bfs, repeats), _time(bench_pairs, repeats),
                     _time(bench_sgns, repeats)))

    print(f"{'backend':>8} {'bfs_ball':>12} {'pair_dist':>12} {'sgns_epoch':>12}")
    for name, t_bfs, t_pair, t_sg in rows:
        print(f"{name:>8} {t_bfs * 1e3:>10.1f}ms {t_pair * 1e3:>10.1f}ms {t_sg * 1e3:>10.1f}ms")
    if len(rows) == 2:
        c, py = rows[0], rows[1]
        print(f"{'speedup':>8} {py[1] / c[1]:>11.1f}x {py[2] / c[2]:>11.1f}x {py[3] / c[3]:>11.1f}x")


if __name__ == "__main__":
    main()
