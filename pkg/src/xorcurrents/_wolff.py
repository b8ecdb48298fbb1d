"""Numba kernels for Wolff single-cluster Ising updates on generic graphs.

The graph is given in CSR form (``indptr``/``indices``), possibly with
parallel edges (they act as independent bonds).  A ``+`` boundary is
handled by the caller through a ghost vertex; the kernels themselves treat
all spins as free.

Randomness is an explicit xoshiro128+ state so that runs are reproducible
from a seed and independent streams can be split by the caller.
"""

import numpy as np
from numba import njit

_U64 = np.uint64


@njit(inline="always")
def _rotl(x, k):
    return _U64((x << _U64(k)) | (x >> _U64(64 - k)))


@njit(inline="always")
def _next_u64(state):
    s0 = state[0]
    s1 = state[1]
    result = _U64(s0 + s1)
    s1 ^= s0
    state[0] = _U64(_rotl(s0, 55) ^ s1 ^ _U64(s1 << _U64(14)))
    state[1] = _rotl(s1, 36)
    return result


@njit(inline="always")
def _next_unit(state):
    return float(_next_u64(state) >> _U64(11)) * (1.0 / 9007199254740992.0)


def make_state(seed: int) -> np.ndarray:
    """Seed an xoshiro state via splitmix64."""
    mask = (1 << 64) - 1
    state = np.empty(2, dtype=np.uint64)
    x = (int(seed) + 0x9E3779B97F4A7C15) & mask
    for i in range(2):
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        state[i] = _U64(z ^ (z >> 31))
        x = (x + 0x9E3779B97F4A7C15) & mask
    if state[0] == 0 and state[1] == 0:
        state[0] = _U64(1)
    return state


@njit
def wolff_updates(spins, indptr, indices, p_add, n_updates, state, stack):
    """Run exactly ``n_updates`` Wolff cluster updates.

    Mutates ``spins`` in place; returns the total number of visited sites.
    The update count is fixed in advance: stopping on a visit budget would
    be a path-dependent stopping time and bias the sampled states.
    """
    n = spins.shape[0]
    visits = 0
    for _ in range(n_updates):
        v0 = int(_next_unit(state) * n)
        if v0 >= n:
            v0 = n - 1
        s0 = spins[v0]
        spins[v0] = -s0
        stack[0] = v0
        top = 1
        while top > 0:
            top -= 1
            v = stack[top]
            visits += 1
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if spins[w] == s0 and _next_unit(state) < p_add:
                    spins[w] = -s0
                    if top < stack.shape[0]:
                        stack[top] = w
                        top += 1
    return visits


@njit
def wolff_series(spins, indptr, indices, p_add, updates_between, n_samples,
                 state, stack, out):
    """Collect ``n_samples`` configurations, a fixed update count apart."""
    for s in range(n_samples):
        wolff_updates(spins, indptr, indices, p_add, updates_between, state,
                      stack)
        for v in range(spins.shape[0]):
            out[s, v] = spins[v]


def build_csr(n_vertices: int, edges: np.ndarray):
    """CSR adjacency (with parallel edges kept) from an (E, 2) edge array."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    deg = np.zeros(n_vertices + 1, dtype=np.int64)
    for a, b in edges:
        deg[a + 1] += 1
        deg[b + 1] += 1
    indptr = np.cumsum(deg)
    indices = np.empty(indptr[-1], dtype=np.int64)
    fill = indptr[:-1].copy()
    for a, b in edges:
        indices[fill[a]] = b
        fill[a] += 1
        indices[fill[b]] = a
        fill[b] += 1
    return indptr, indices
