import numpy as np
import pytest

from goaltalk import kernels

from conftest import random_connected_graph


needs_both = pytest.mark.skipif(
    "c" not in kernels.available_backends(),
    reason="compiled kernel extension not built; fallback-only environment")


def csr_of(graph):
    return graph.csr()


def test_active_backend_exports():
    assert kernels.BACKEND in ("c", "py")
    assert callable(kernels.bfs_ball)
    assert callable(kernels.pair_ball_distance)
    assert callable(kernels.sgns_train_epoch)


@needs_both
def test_bfs_ball_backends_identical():
    g = random_connected_graph(80, 60, seed=1)
    indptr, indices = csr_of(g)
    c = kernels.get_backend("c")
    py = kernels.get_backend("py")
    for center in range(0, 80, 11):
        for radius in (0, 1, 3, 5):
            assert np.array_equal(c.bfs_ball(indptr, indices, center, radius),
                                  py.bfs_ball(indptr, indices, center, radius))


@needs_both
def test_pair_ball_distance_backends_identical():
    g = random_connected_graph(60, 40, seed=2)
    indptr, indices = csr_of(g)
    c = kernels.get_backend("c")
    py = kernels.get_backend("py")
    rng = np.random.default_rng(0)
    for _ in range(60):
        a, b = (int(x) for x in rng.integers(60, size=2))
        ba = c.bfs_ball(indptr, indices, a, 3)
        bb = c.bfs_ball(indptr, indices, b, 3)
        assert c.pair_ball_distance(ba, bb) == py.pair_ball_distance(ba, bb)


@needs_both
def test_sgns_backends_agree():
    rng = np.random.default_rng(3)
    n, dim, pairs = 40, 12, 500
    ein = (rng.random((n, dim)) - 0.5) / dim
    eout = np.zeros((n, dim))
    centers = rng.integers(0, n, pairs).astype(np.int64)
    contexts = rng.integers(0, n, pairs).astype(np.int64)
    negs = rng.integers(0, n, (pairs, 5)).astype(np.int64)

    ein_c, eout_c = ein.copy(), eout.copy()
    ein_p, eout_p = ein.copy(), eout.copy()
    kernels.get_backend("c").sgns_train_epoch(ein_c, eout_c, centers, contexts, negs, 0.025)
    kernels.get_backend("py").sgns_train_epoch(ein_p, eout_p, centers, contexts, negs, 0.025)
    assert np.allclose(ein_c, ein_p, atol=1e-12)
    assert np.allclose(eout_c, eout_p, atol=1e-12)


def test_benchmark_script_smoke(capsys):
    import importlib.util
    import os

    path = os.path.join(os.path.dirname(__file__), "..", "benchmarks", "bench_kernels.py")
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    mod.main(nodes=60, pairs=150, sg_pairs=400, repeats=1)
    out = capsys.readouterr().out
    assert "bfs_ball" in out and "sgns" in out
