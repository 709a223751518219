"""Pure-Python/numpy reference kernels.

Mirrors the compiled `_ckern` module operation for operation. Integer
kernels (BFS, ball intersection) are exact twins of the C versions; the
skip-gram pass follows the same update order, so the two backends agree
to float rounding.
"""

from collections import deque

import numpy as np


def bfs_ball(indptr, indices, center, radius):
    """Hop distances from `center` up to `radius`; -1 marks out-of-ball nodes.

    `indptr`/`indices` are CSR adjacency over n nodes. Returns int32[n].
    """
    n = len(indptr) - 1
    dist = np.full(n, -1, dtype=np.int32)
    dist[center] = 0
    if radius == 0:
        return dist
    queue = deque([center])
    while queue:
        v = queue.popleft()
        dv = dist[v]
        if dv == radius:
            continue
        for w in indices[indptr[v]:indptr[v + 1]]:
            if dist[w] < 0:
                dist[w] = dv + 1
                queue.append(w)
    return dist


def pair_ball_distance(ball_i, ball_j):
    """min over overlap of d_i[k] + d_j[k]; -1 when the balls are disjoint."""
    both = (ball_i >= 0) & (ball_j >= 0)
    if not both.any():
        return -1
    return int((ball_i[both] + ball_j[both]).min())


def sgns_train_epoch(emb_in, emb_out, centers, contexts, negatives, lr):
    """One sequential pass of skip-gram SGD with negative sampling.

    Updates `emb_in` / `emb_out` in place, pair by pair, in array order.
    `negatives[p]` holds the negative sample ids for pair p; a negative
    equal to the pair's context id is skipped.
    """
    for p in range(len(centers)):
        c = centers[p]
        o = contexts[p]
        h = emb_in[c]
        grad_h = np.zeros_like(h)

        v = emb_out[o]
        s = 1.0 / (1.0 + np.exp(-np.dot(h, v)))
        g = lr * (s - 1.0)
        grad_h += g * v
        emb_out[o] = v - g * h

        for k in negatives[p]:
            if k == o:
                continue
            v = emb_out[k]
            s = 1.0 / (1.0 + np.exp(-np.dot(h, v)))
            g = lr * s
            grad_h += g * v
            emb_out[k] = v - g * h

        emb_in[c] = h - grad_h
