"""Ising and XOR-Ising sampling plus exact small-graph oracles.

Monte Carlo sampling uses Wolff single-cluster updates on arbitrary graphs;
``+`` boundary conditions are realized through a ghost spin wired to the
boundary and gauge-fixed to ``+1`` afterwards.  Exact expectations come from
either full enumeration of the free spins (bit-sliced, up to 24 spins) or a
transfer matrix over grid columns (strip width up to 12), both supporting
per-bond couplings and external fields so that disorder insertions
(sign-flipped couplings along a dual path) reuse the same code path.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _wolff
from .errors import (InvalidParameter, InvalidVertex, OracleCapacityExceeded,
                     ShapeMismatch)
from .lattice import DiscreteDomain

_ENUM_CAP = 24
_TM_WIDTH_CAP = 12


def critical_beta() -> float:
    """Self-dual inverse temperature of the square-lattice Ising model."""
    return 0.5 * math.log(1.0 + math.sqrt(2.0))


def dual_beta(beta: float) -> float:
    """Dual inverse temperature: tanh(dual_beta(b)) = exp(-2 b)."""
    if beta <= 0:
        raise InvalidParameter("beta must be positive")
    return math.atanh(math.exp(-2.0 * beta))


@dataclass
class SpinConfig:
    """A spin configuration on a discrete domain.

    ``spins`` is indexed by the domain's vertices.  Under ``plus`` boundary
    conditions boundary entries are ``+1``; under ``free`` the model lives on
    the interior subgraph and boundary entries are filler (``+1``), ignored
    by all consumers.
    """

    spins: np.ndarray
    bc: str
    beta: float
    domain: DiscreteDomain

    def interior(self) -> np.ndarray:
        return self.spins[~self.domain.is_boundary]


class GraphSampler:
    """Wolff sampler for an Ising model on an arbitrary finite graph.

    Parameters
    ----------
    n_sites : int
        Number of free spins.
    bonds : array-like of (int, int)
        Ferromagnetic couplings of strength ``beta``; parallel bonds allowed
        and act independently.
    beta : float
        Inverse temperature.
    ghost_sites : array-like of int, optional
        Sites bonded (once per entry) to an auxiliary ghost spin; after
        sampling, configurations are gauged so the ghost is ``+1``, which
        realizes ``+`` boundary conditions on those sites.
    """

    def __init__(self, n_sites, bonds, beta, ghost_sites=None):
        if beta <= 0:
            raise InvalidParameter("beta must be positive")
        bonds = np.asarray(bonds, dtype=np.int64).reshape(-1, 2)
        self.n_sites = int(n_sites)
        self.beta = float(beta)
        self.has_ghost = ghost_sites is not None and len(ghost_sites) > 0
        n = self.n_sites + (1 if self.has_ghost else 0)
        if self.has_ghost:
            gb = np.stack([np.asarray(ghost_sites, dtype=np.int64),
                           np.full(len(ghost_sites), self.n_sites,
                                   dtype=np.int64)], axis=1)
            bonds = np.concatenate([bonds, gb]) if len(bonds) else gb
        self.n_total = n
        self.indptr, self.indices = _wolff.build_csr(n, bonds)
        self.p_add = 1.0 - math.exp(-2.0 * self.beta)
        self._stack = np.empty(max(n, 1), dtype=np.int64)

    def run(self, seed, n_samples, sweeps_between=2, warmup_sweeps=200):
        """Return an ``(n_samples, n_sites)`` int8 array of configurations.

        A "sweep" is the fixed number of cluster updates whose expected
        visit total covers the graph, calibrated once from a probe run;
        consecutive rows are ``sweeps_between`` sweeps apart.  The update
        count between samples never depends on the sampled states (a
        visit-budget stopping rule would bias the chain).
        """
        n = self.n_total
        spins = np.ones(n, dtype=np.int8)
        state = _wolff.make_state(seed)
        probe = 64
        visits = _wolff.wolff_updates(spins, self.indptr, self.indices,
                                      self.p_add, probe, state, self._stack)
        per_sweep = max(1, -(-probe * n // max(visits, 1)))
        if warmup_sweeps > 0:
            _wolff.wolff_updates(spins, self.indptr, self.indices,
                                 self.p_add, warmup_sweeps * per_sweep,
                                 state, self._stack)
        out = np.empty((n_samples, n), dtype=np.int8)
        _wolff.wolff_series(spins, self.indptr, self.indices, self.p_add,
                            sweeps_between * per_sweep, n_samples, state,
                            self._stack, out)
        if self.has_ghost:
            out *= out[:, -1:]
            return np.ascontiguousarray(out[:, :-1])
        return out

    def run_stream(self, seed, n_samples, chunk=1000, sweeps_between=2,
                   warmup_sweeps=200):
        """Yield batches of at most ``chunk`` rows from one warmed-up chain.

        Equivalent to :meth:`run` but bounds peak memory; the chain state
        carries across chunks, so the concatenation of the yields is one
        contiguous time series.
        """
        n = self.n_total
        spins = np.ones(n, dtype=np.int8)
        state = _wolff.make_state(seed)
        probe = 64
        visits = _wolff.wolff_updates(spins, self.indptr, self.indices,
                                      self.p_add, probe, state, self._stack)
        per_sweep = max(1, -(-probe * n // max(visits, 1)))
        if warmup_sweeps > 0:
            _wolff.wolff_updates(spins, self.indptr, self.indices,
                                 self.p_add, warmup_sweeps * per_sweep,
                                 state, self._stack)
        left = int(n_samples)
        while left > 0:
            b = min(chunk, left)
            out = np.empty((b, n), dtype=np.int8)
            _wolff.wolff_series(spins, self.indptr, self.indices, self.p_add,
                                sweeps_between * per_sweep, b, state,
                                self._stack, out)
            if self.has_ghost:
                out *= out[:, -1:]
                out = np.ascontiguousarray(out[:, :-1])
            yield out
            left -= b


def _domain_sampler(dom: DiscreteDomain, bc: str, beta: float):
    """(GraphSampler, vertex_map) for a domain under plus/free bc."""
    if bc == "plus":
        keep = np.where(~dom.is_boundary)[0]
        remap = -np.ones(dom.n_vertices, dtype=np.int64)
        remap[keep] = np.arange(len(keep))
        e0, e1 = dom.edges[:, 0], dom.edges[:, 1]
        b = dom.is_boundary
        ii = ~b[e0] & ~b[e1]
        bonds = remap[dom.edges[ii]]
        ghost = []
        ib = b[e0] ^ b[e1]
        for a, c in dom.edges[ib]:
            ghost.append(remap[c] if b[a] else remap[a])
        return GraphSampler(len(keep), bonds, beta, ghost_sites=ghost), keep
    if bc == "free":
        g, keep = dom.interior_graph()
        return GraphSampler(g.n_vertices, g.edges, beta), keep
    raise InvalidParameter(f"unknown boundary condition {bc!r}")


def sample_ising(dom, bc, beta, seed, warmup_sweeps=1000) -> SpinConfig:
    """One Gibbs-distributed spin configuration (deterministic in seed)."""
    batch = sample_ising_batch(dom, bc, beta, seed, 1,
                               warmup_sweeps=warmup_sweeps)
    spins = np.ones(dom.n_vertices, dtype=np.int8)
    spins[~dom.is_boundary] = batch[0]
    return SpinConfig(spins, bc, float(beta), dom)


def sample_ising_batch(dom, bc, beta, seed, n_samples, sweeps_between=2,
                       warmup_sweeps=1000) -> np.ndarray:
    """``(n_samples, n_interior)`` array of interior spin rows."""
    sampler, keep = _domain_sampler(dom, bc, beta)
    return sampler.run(seed, n_samples, sweeps_between=sweeps_between,
                       warmup_sweeps=warmup_sweeps)


def xor_field(sigma: SpinConfig, sigma2: SpinConfig) -> np.ndarray:
    """Pointwise product of two spin configurations on the same domain."""
    if sigma.spins.shape != sigma2.spins.shape or sigma.bc != sigma2.bc \
            or sigma.domain is not sigma2.domain:
        raise ShapeMismatch("configurations live on different models")
    return (sigma.spins * sigma2.spins).astype(np.int8)


# -- exact oracles ----------------------------------------------------------

def _signed_enum(n, bonds, J, h, A):
    """(mantissa, log-scale) of sum_s exp(sum J ss' + sum h s) prod_A s.

    Bit-sliced over all 2^n configurations; ``A`` may repeat vertices
    (repeats cancel pairwise).
    """
    if n > _ENUM_CAP:
        raise OracleCapacityExceeded(f"{n} spins exceeds enumeration cap")
    m = np.uint64(1) << np.uint64(n)
    codes = np.arange(m, dtype=np.uint64)
    energy = np.zeros(int(m))
    for (a, b), j in zip(bonds, J):
        if j == 0.0:
            continue
        bits = ((codes >> np.uint64(a)) ^ (codes >> np.uint64(b))) \
            & np.uint64(1)
        energy += j * (1.0 - 2.0 * bits.astype(np.float64))
    for v in range(n):
        if h[v] != 0.0:
            bits = (codes >> np.uint64(v)) & np.uint64(1)
            energy += h[v] * (1.0 - 2.0 * bits.astype(np.float64))
    shift = float(energy.max())
    w = np.exp(energy - shift)
    if len(A):
        par = np.zeros(int(m), dtype=np.uint64)
        for v in A:
            par ^= (codes >> np.uint64(v)) & np.uint64(1)
        w = w * (1.0 - 2.0 * par.astype(np.float64))
    return float(w.sum()), shift


def _tm_signed(W, C, Jv, Jh, h, A):
    """(mantissa, log-scale) of the signed partition sum on a W x C grid.

    Sites are (row r, column c); ``Jv[r, c]`` couples (r, c)-(r+1, c),
    ``Jh[r, c]`` couples (r, c)-(r, c+1), ``h`` is an external field and
    ``A`` a list of (r, c) spin insertions.
    """
    if W > _TM_WIDTH_CAP:
        raise OracleCapacityExceeded(f"strip width {W} exceeds cap")
    m = 1 << W
    codes = np.arange(m, dtype=np.uint64)
    srow = [1.0 - 2.0 * ((codes >> np.uint64(r)) & np.uint64(1))
            .astype(np.float64) for r in range(W)]
    ins = {}
    for r, c in A:
        ins.setdefault(c, []).append(r)

    v = np.ones(m)
    logscale = 0.0
    for c in range(C):
        col = np.zeros(m)
        for r in range(W - 1):
            col += Jv[r, c] * srow[r] * srow[r + 1]
        for r in range(W):
            if h[r, c] != 0.0:
                col += h[r, c] * srow[r]
        v = v * np.exp(col - col.max())
        logscale += float(col.max())
        for r in ins.get(c, []):
            v = v * srow[r]
        if c < C - 1:
            # horizontal transfer is a tensor product of 2x2 bond matrices
            for r in range(W):
                jr = Jh[r, c]
                ep, em = math.exp(jr), math.exp(-jr)
                vr = v.reshape(1 << (W - 1 - r), 2, 1 << r)
                new = np.empty_like(vr)
                new[:, 0, :] = ep * vr[:, 0, :] + em * vr[:, 1, :]
                new[:, 1, :] = em * vr[:, 0, :] + ep * vr[:, 1, :]
                v = new.reshape(m)
        scale = float(np.abs(v).max())
        if scale > 0:
            v /= scale
            logscale += math.log(scale)
    return float(v.sum()), logscale


class _GridModel:
    """Free spins of a domain model arranged on a rectangular grid."""

    def __init__(self, W, C, Jv, Jh, h, site_of_vertex, log_const):
        self.W, self.C = W, C
        self.Jv, self.Jh, self.h = Jv, Jh, h
        self.site_of_vertex = site_of_vertex
        self.log_const = log_const

    def signed_sum(self, A_vertices):
        A = [self.site_of_vertex[v] for v in A_vertices]
        mant, scale = _tm_signed(self.W, self.C, self.Jv, self.Jh, self.h, A)
        return mant, scale + self.log_const


def _grid_model(dom, bc, beta, flipped=()):
    """Arrange the free spins on a grid, or return None if not a grid."""
    b = dom.is_boundary
    keep = np.where(~b)[0]
    coords = dom.verts[keep]
    xs = np.unique(coords[:, 0])
    ys = np.unique(coords[:, 1])
    if len(keep) != len(xs) * len(ys):
        return None
    pos = {(int(i), int(j)): k for k, (i, j) in enumerate(coords)}
    if len(pos) != len(keep):
        return None
    x0, y0 = int(xs[0]), int(ys[0])
    if xs[-1] - x0 != len(xs) - 1 or ys[-1] - y0 != len(ys) - 1:
        return None
    # rows along the shorter direction
    transpose = len(ys) > len(xs)
    W = int(min(len(xs), len(ys)))
    C = int(max(len(xs), len(ys)))

    if transpose:
        def site(i, j):  # rows along x
            return (i - x0, j - y0)
    else:
        def site(i, j):  # rows along y
            return (j - y0, i - x0)

    flipped = set(int(e) for e in flipped)
    Jv = np.zeros((max(W - 1, 0), C))
    Jh = np.zeros((W, max(C - 1, 0)))
    h = np.zeros((W, C))
    log_const = 0.0
    for ei, (a, c2) in enumerate(dom.edges):
        sgn = -1.0 if ei in flipped else 1.0
        ba, bb = b[a], b[c2]
        if ba and bb:
            if bc == "plus":
                log_const += sgn * beta
            continue
        if ba or bb:
            if bc == "plus":
                v = c2 if ba else a
                i, j = dom.verts[v]
                r, cc = site(int(i), int(j))
                h[r, cc] += sgn * beta
            continue
        ia, ja = map(int, dom.verts[a])
        ib, jb = map(int, dom.verts[c2])
        ra, ca = site(ia, ja)
        rb, cb = site(ib, jb)
        if ca == cb:
            Jv[min(ra, rb), ca] += sgn * beta
        else:
            Jh[ra, min(ca, cb)] += sgn * beta
    site_of_vertex = {}
    for k, v in enumerate(keep):
        i, j = map(int, dom.verts[v])
        site_of_vertex[int(v)] = site(i, j)
    return _GridModel(W, C, Jv, Jh, h, site_of_vertex, log_const)


def _domain_model(dom, bc, beta, flipped=()):
    """(n_free, bonds, J, h, free_index, log_const) for enumeration."""
    b = dom.is_boundary
    keep = np.where(~b)[0]
    remap = -np.ones(dom.n_vertices, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    flipped = set(int(e) for e in flipped)
    bonds, J = [], []
    h = np.zeros(len(keep))
    log_const = 0.0
    for ei, (a, c) in enumerate(dom.edges):
        sgn = -1.0 if ei in flipped else 1.0
        ba, bb = b[a], b[c]
        if ba and bb:
            if bc == "plus":
                log_const += sgn * beta
            continue
        if ba or bb:
            if bc == "plus":
                h[remap[c if ba else a]] += sgn * beta
            continue
        bonds.append((int(remap[a]), int(remap[c])))
        J.append(sgn * beta)
    return len(keep), bonds, J, h, remap, log_const


def _exact_signed_pair(dom, A, bc, beta, flipped=()):
    """(numerator, denominator) as (mantissa, log-scale) pairs."""
    n_free, bonds, J, h, remap, log_const = _domain_model(dom, bc, beta,
                                                          flipped)
    A_free = []
    for v in A:
        if dom.is_boundary[v]:
            if bc == "plus":
                continue  # boundary spin is the constant +1
            raise InvalidVertex("free bc correlation on a boundary vertex")
        A_free.append(int(remap[v]))
    if n_free <= _ENUM_CAP:
        num = _signed_enum(n_free, bonds, J, h, A_free)
        den = _signed_enum(n_free, bonds, J, h, [])
        return ((num[0], num[1] + log_const), (den[0], den[1] + log_const))
    grid = _grid_model(dom, bc, beta, flipped)
    if grid is None:
        raise OracleCapacityExceeded(
            f"{n_free} free spins and the interior is not a grid strip")
    A_verts = [v for v in A if not dom.is_boundary[v]]
    return grid.signed_sum(A_verts), grid.signed_sum([])


def exact_correlation(dom, A, bc, beta) -> float:
    """Exact E[prod_{v in A} sigma(v)] on a discrete domain.

    ``A`` is a sequence of domain vertex indices (repeats cancel pairwise;
    boundary vertices are the constant +1 under plus bc).  Uses full
    enumeration up to 24 free spins, otherwise a transfer matrix when the
    interior is a grid strip of width <= 12.
    """
    if beta <= 0:
        raise InvalidParameter("beta must be positive")
    (mn, sn), (md, sd) = _exact_signed_pair(dom, list(A), bc, float(beta))
    return mn / md * math.exp(sn - sd)


def exact_disorder_correlation(dom, A, gamma_edges, beta) -> float:
    """Exact E^+[prod_A sigma * exp(-2 beta sum_{e in gamma} sigma sigma')].

    The disorder insertion is evaluated by flipping the coupling sign on the
    primal edges ``gamma_edges``; the result is the flipped-model signed
    partition sum divided by the unflipped partition function.
    """
    if beta <= 0:
        raise InvalidParameter("beta must be positive")
    num = _exact_signed_pair(dom, list(A), "plus", float(beta),
                             flipped=gamma_edges)[0]
    den = _exact_signed_pair(dom, [], "plus", float(beta))[1]
    return num[0] / den[0] * math.exp(num[1] - den[1])


def exact_graph_correlation(n_sites, bonds, couplings, A,
                            field=None) -> float:
    """Exact E[prod_A s] for an arbitrary small graph with given couplings."""
    n = int(n_sites)
    couplings = np.asarray(couplings, dtype=float)
    h = np.zeros(n) if field is None else np.asarray(field, dtype=float)
    mn, sn = _signed_enum(n, list(bonds), couplings, h, list(A))
    md, sd = _signed_enum(n, list(bonds), couplings, h, [])
    return mn / md * math.exp(sn - sd)
