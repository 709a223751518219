# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: BFS balls, ball-intersection distance, skip-gram SGD.

Signatures match `pyref` exactly; see that module for semantics.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def bfs_ball(cnp.int64_t[::1] indptr, cnp.int32_t[::1] indices, int center, int radius):
    cdef int n = indptr.shape[0] - 1
    cdef cnp.ndarray[cnp.int32_t, ndim=1] dist_arr = np.full(n, -1, dtype=np.int32)
    cdef cnp.int32_t[::1] dist = dist_arr
    cdef cnp.ndarray[cnp.int32_t, ndim=1] queue_arr = np.empty(n, dtype=np.int32)
    cdef cnp.int32_t[::1] queue = queue_arr
    cdef int head = 0, tail = 0
    cdef int v, w, dv
    cdef cnp.int64_t e

    dist[center] = 0
    if radius == 0:
        return dist_arr
    queue[tail] = center
    tail += 1
    while head < tail:
        v = queue[head]
        head += 1
        dv = dist[v]
        if dv == radius:
            continue
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            if dist[w] < 0:
                dist[w] = dv + 1
                queue[tail] = w
                tail += 1
    return dist_arr


def pair_ball_distance(cnp.int32_t[::1] ball_i, cnp.int32_t[::1] ball_j):
    cdef int n = ball_i.shape[0]
    cdef int best = -1
    cdef int k, s
    for k in range(n):
        if ball_i[k] >= 0 and ball_j[k] >= 0:
            s = ball_i[k] + ball_j[k]
            if best < 0 or s < best:
                best = s
    return best


def sgns_train_epoch(cnp.float64_t[:, ::1] emb_in, cnp.float64_t[:, ::1] emb_out,
                     cnp.int64_t[::1] centers, cnp.int64_t[::1] contexts,
                     cnp.int64_t[:, ::1] negatives, double lr):
    cdef Py_ssize_t n_pairs = centers.shape[0]
    cdef Py_ssize_t n_neg = negatives.shape[1]
    cdef Py_ssize_t dim = emb_in.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] grad_arr = np.empty(dim, dtype=np.float64)
    cdef cnp.float64_t[::1] grad_h = grad_arr
    cdef Py_ssize_t p, d, j
    cdef cnp.int64_t c, o, k
    cdef double dot, s, g

    for p in range(n_pairs):
        c = centers[p]
        o = contexts[p]
        for d in range(dim):
            grad_h[d] = 0.0

        dot = 0.0
        for d in range(dim):
            dot += emb_in[c, d] * emb_out[o, d]
        s = 1.0 / (1.0 + exp(-dot))
        g = lr * (s - 1.0)
        for d in range(dim):
            grad_h[d] += g * emb_out[o, d]
            emb_out[o, d] -= g * emb_in[c, d]

        for j in range(n_neg):
            k = negatives[p, j]
            if k == o:
                continue
            dot = 0.0
            for d in range(dim):
                dot += emb_in[c, d] * emb_out[k, d]
            s = 1.0 / (1.0 + exp(-dot))
            g = lr * s
            for d in range(dim):
                grad_h[d] += g * emb_out[k, d]
                emb_out[k, d] -= g * emb_in[c, d]

        for d in range(dim):
            emb_in[c, d] -= grad_h[d]
