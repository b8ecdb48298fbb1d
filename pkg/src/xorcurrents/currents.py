"""Sourceless single and double random currents (trace level).

Only the trace of a current is materialized: per-edge ``occupied``
(multiplicity > 0) and ``odd`` (multiplicity odd) bits.  The odd part of a
sourceless current is an even subgraph with weight ``tanh(beta)^|O|`` and is
sampled exactly as the interface set of a dual Ising configuration at the
dual inverse temperature (Kramers-Wannier):

* wired: spins on the faces of the domain graph with the unbounded face
  fixed to ``+1`` (``+`` boundary conditions via a ghost), one bond per
  primal edge having an interior endpoint; edges between two boundary
  vertices are forced to multiplicity 2 (occupied, even).
* free: the model lives on the interior subgraph; spins on its inner faces
  plus one free vertex for the unbounded face, parallel bonds allowed.

Conditionally on the odd part, every other non-forced edge is occupied with
an even positive multiplicity independently with probability
``(cosh(beta) - 1) / cosh(beta)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import ising
from .errors import (ContractViolation, InvalidParameter,
                     OracleCapacityExceeded)
from .lattice import OUTER, DiscreteDomain, PlanarGraph

_ORACLE_EDGE_CAP = 16
_ORACLE_TABLE_CAP = 1 << 21


@dataclass(frozen=True)
class EdgeWeightTriple:
    """Per-edge partial weights of the parity classes of a current."""

    w_zero: float
    w_odd: float
    w_even_pos: float


def edge_weights(beta: float) -> EdgeWeightTriple:
    """Exact per-edge weights ``(1, sinh(beta), cosh(beta) - 1)``."""
    if beta <= 0:
        raise InvalidParameter("beta must be positive")
    return EdgeWeightTriple(1.0, math.sinh(beta), math.cosh(beta) - 1.0)


@dataclass
class CurrentTrace:
    """Trace of a sourceless current on ``graph``.

    ``occupied[e]`` and ``odd[e]`` are indexed by ``graph.edges``; under
    wired bc the graph is the full domain graph, under free bc the interior
    subgraph.
    """

    occupied: np.ndarray
    odd: np.ndarray
    bc: str
    beta: float
    graph: PlanarGraph


def trace_graph(dom_or_graph, bc: str) -> PlanarGraph:
    """The graph a current with the given boundary condition lives on."""
    if bc not in ("wired", "free"):
        raise InvalidParameter(f"unknown boundary condition {bc!r}")
    if isinstance(dom_or_graph, DiscreteDomain):
        if bc == "wired":
            return dom_or_graph.full_graph()
        return dom_or_graph.interior_graph()[0]
    return dom_or_graph


def forced_edge_mask(g: PlanarGraph, bc: str) -> np.ndarray:
    """Edges frozen to multiplicity 2 by the wired convention."""
    if bc == "wired":
        return g.boundary_edge_mask()
    return np.zeros(g.n_edges, dtype=bool)


def _dual_setup(g: PlanarGraph, bc: str, beta: float):
    """Dual Ising sampler whose interfaces are the odd part.

    Returns ``(sampler, side1, side2, const_col)`` where ``side1/side2`` map
    every edge to a spin column of the sampled array (column ``const_col``
    is an appended constant ``+1``, used for forced and unbounded sides).
    """
    forced = forced_edge_mask(g, bc)
    f1 = g.edge_faces[:, 0].astype(np.int64).copy()
    f2 = g.edge_faces[:, 1].astype(np.int64).copy()
    bdual = ising.dual_beta(beta)
    if bc == "wired":
        const = g.n_faces
        bonds, ghost = [], []
        for e in range(g.n_edges):
            if forced[e]:
                f1[e] = f2[e] = const
                continue
            a, b = f1[e], f2[e]
            if a == OUTER and b == OUTER:
                f1[e] = f2[e] = const
            elif a == OUTER or b == OUTER:
                ghost.append(int(b if a == OUTER else a))
                if a == OUTER:
                    f1[e] = const
                else:
                    f2[e] = const
            else:
                bonds.append((int(a), int(b)))
        sampler = ising.GraphSampler(g.n_faces, bonds, bdual,
                                     ghost_sites=ghost)
        return sampler, f1, f2, const
    # free: the unbounded face is one more free spin
    outer = g.n_faces
    f1[f1 == OUTER] = outer
    f2[f2 == OUTER] = outer
    bonds = [(int(a), int(b)) for a, b in zip(f1, f2) if a != b]
    sampler = ising.GraphSampler(g.n_faces + 1, bonds, bdual)
    # append a constant column so the side maps share one convention
    return sampler, f1, f2, g.n_faces + 1


def sample_trace_batch(dom_or_graph, bc, beta, seed, n_samples,
                       sweeps_between=4, warmup_sweeps=500):
    """``(odd, occupied)`` boolean arrays of shape ``(n_samples, E)``."""
    g = trace_graph(dom_or_graph, bc)
    forced = forced_edge_mask(g, bc)
    sampler, f1, f2, const = _dual_setup(g, bc, beta)
    s1, s2, s3 = np.random.SeedSequence(seed).generate_state(3)
    spins = sampler.run(int(s1), n_samples, sweeps_between=sweeps_between,
                        warmup_sweeps=warmup_sweeps)
    spins = np.concatenate(
        [spins, np.ones((n_samples, 1), dtype=np.int8)], axis=1)
    odd = spins[:, f1] != spins[:, f2]
    q = 1.0 - 1.0 / math.cosh(beta)
    rng = np.random.default_rng([int(s2), int(s3)])
    even_fill = rng.random((n_samples, g.n_edges)) < q
    occupied = odd | even_fill
    if forced.any():
        odd[:, forced] = False
        occupied[:, forced] = True
    return odd, occupied


def sample_current_trace(dom_or_graph, bc, beta, seed,
                         warmup_sweeps=1000) -> CurrentTrace:
    """One sourceless current trace, deterministic given the seed."""
    g = trace_graph(dom_or_graph, bc)
    odd, occ = sample_trace_batch(dom_or_graph, bc, beta, seed, 1,
                                  warmup_sweeps=warmup_sweeps)
    return CurrentTrace(occ[0], odd[0], bc, float(beta), g)


def sample_drc_batch(dom_or_graph, bc, beta, seed, n_samples,
                     sweeps_between=4, warmup_sweeps=500):
    """Double random current batch: union / symmetric difference of two."""
    s1, s2 = np.random.SeedSequence([seed, 7]).generate_state(2)
    o1, t1 = sample_trace_batch(dom_or_graph, bc, beta, int(s1), n_samples,
                                sweeps_between, warmup_sweeps)
    o2, t2 = sample_trace_batch(dom_or_graph, bc, beta, int(s2), n_samples,
                                sweeps_between, warmup_sweeps)
    return o1 ^ o2, t1 | t2


def sample_drc_trace(dom_or_graph, bc, beta, seed,
                     warmup_sweeps=1000) -> CurrentTrace:
    """Trace of the sum of two independent sourceless currents."""
    g = trace_graph(dom_or_graph, bc)
    odd, occ = sample_drc_batch(dom_or_graph, bc, beta, seed, 1,
                                warmup_sweeps=warmup_sweeps)
    return CurrentTrace(occ[0], odd[0], bc, float(beta), g)


def verify_sourceless(trace: CurrentTrace) -> None:
    """Raise ContractViolation unless the odd part is sourceless.

    Under wired bc the boundary is identified to one ghost vertex first.
    """
    g = trace.graph
    vid = np.arange(g.n_vertices, dtype=np.int64)
    if trace.bc == "wired":
        vid[g.boundary] = -1
        vid = np.where(vid < 0, g.n_vertices, vid)
    deg = np.zeros(g.n_vertices + 1, dtype=np.int64)
    oe = g.edges[trace.odd]
    np.add.at(deg, vid[oe[:, 0]], 1)
    np.add.at(deg, vid[oe[:, 1]], 1)
    if (deg % 2).any():
        raise ContractViolation("odd part has a vertex of odd degree")
    if (trace.odd & ~trace.occupied).any():
        raise ContractViolation("odd edge not occupied")


# -- exact enumeration oracle ----------------------------------------------

def _sourceless_odd_sets(g: PlanarGraph, bc: str):
    """All sourceless odd sets over the non-forced edges.

    Returns ``(active_idx, odd_keys)`` where keys are bitmasks over the full
    edge index (forced edges always 0).
    """
    forced = forced_edge_mask(g, bc)
    active = np.where(~forced)[0]
    a = len(active)
    if a > _ORACLE_EDGE_CAP:
        raise OracleCapacityExceeded(
            f"{a} non-forced edges exceeds the enumeration cap")
    vid = np.arange(g.n_vertices, dtype=np.int64)
    if bc == "wired":
        vid[g.boundary] = g.n_vertices  # collapse the wired boundary
    # per-active-edge vertex-parity mask
    masks = []
    for e in active:
        u, v = g.edges[e]
        m = (1 << int(vid[u])) ^ (1 << int(vid[v]))
        masks.append(m)
    keys = []
    for sub in range(1 << a):
        par = 0
        s = sub
        while s:
            b = (s & -s).bit_length() - 1
            par ^= masks[b]
            s &= s - 1
        if par == 0:
            key = 0
            for b in range(a):
                if (sub >> b) & 1:
                    key |= 1 << int(active[b])
            keys.append(key)
    return active, keys


def enumerate_odd_distribution(dom_or_graph, bc, beta, double=False):
    """Exact law of the odd part as a dict ``bitmask -> probability``."""
    g = trace_graph(dom_or_graph, bc)
    active, keys = _sourceless_odd_sets(g, bc)
    t = math.tanh(beta)
    probs = np.array([t ** bin(k).count("1") for k in keys])
    probs /= probs.sum()
    table = dict(zip(keys, probs))
    if double:
        conv = {}
        for k1, p1 in table.items():
            for k2, p2 in table.items():
                conv[k1 ^ k2] = conv.get(k1 ^ k2, 0.0) + p1 * p2
        table = conv
    return table


def enumerate_trace_distribution(dom_or_graph, bc, beta, double=False):
    """Exact joint law of ``(odd set, occupied set)`` on a small graph.

    Returns a dict ``(odd_bitmask, occupied_bitmask) -> probability``;
    forced wired edges appear occupied-even in every key.
    """
    g = trace_graph(dom_or_graph, bc)
    forced = forced_edge_mask(g, bc)
    forced_key = 0
    for e in np.where(forced)[0]:
        forced_key |= 1 << int(e)
    active, keys = _sourceless_odd_sets(g, bc)
    t = math.tanh(beta)
    w = np.array([t ** bin(k).count("1") for k in keys])
    w /= w.sum()
    q = 1.0 - 1.0 / math.cosh(beta)

    if double:
        # the even fill of the sum only depends on the union of the two
        # odd parts: an edge outside the union stays empty with
        # probability (1 - q)^2, so convolve (odd, union) first and
        # expand the fill once
        base = {}
        for k1, p1 in zip(keys, w):
            for k2, p2 in zip(keys, w):
                kk = (k1 ^ k2, k1 | k2)
                base[kk] = base.get(kk, 0.0) + p1 * p2
        q_fill = 1.0 - (1.0 - q) ** 2
    else:
        base = {(k, k): p for k, p in zip(keys, w)}
        q_fill = q

    size = sum(1 << sum(1 for e in active if not (u >> int(e)) & 1)
               for (_, u) in base)
    if size > _ORACLE_TABLE_CAP:
        raise OracleCapacityExceeded("joint trace table too large")

    table = {}
    for (key, base_occ), p_base in base.items():
        rest = [int(e) for e in active if not (base_occ >> int(e)) & 1]
        r = len(rest)
        for sub in range(1 << r):
            fill = 0
            nfill = 0
            for b in range(r):
                if (sub >> b) & 1:
                    fill |= 1 << rest[b]
                    nfill += 1
            p = p_base * q_fill ** nfill * (1.0 - q_fill) ** (r - nfill)
            k = (key, base_occ | fill | forced_key)
            table[k] = table.get(k, 0.0) + p
    return table


def trace_keys(odd: np.ndarray, occupied: np.ndarray):
    """Encode boolean edge rows as ``(odd, occupied)`` bitmask integers."""
    odd = np.atleast_2d(odd)
    occupied = np.atleast_2d(occupied)
    powers = 1 << np.arange(odd.shape[1], dtype=np.int64)
    return odd @ powers, occupied @ powers
