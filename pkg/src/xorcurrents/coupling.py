"""The master coupling: nested currents, cluster signs, spins and height.

One sample couples
  * a wired primal double random current (trace level),
  * i.i.d. symmetric cluster signs (boundary cluster forced ``+1``) giving
    the primal spin field ``tau``,
  * the dual spin field ``tau_dual`` on faces, built from the crossing
    parity of the primal odd part relative to the unbounded face times one
    global symmetric coin (the parity field alone has a fixed sign at the
    boundary; the coin restores the spin-flip symmetry of the dual model),
  * a dual current whose odd part is the interface set of ``tau`` and
    whose even part fills non-crossing dual edges independently,
  * the height function ``h`` (stored as integers ``2h``) integrated from
    ``h = 0`` on the boundary cluster through the incidence relation
    ``h(face) - h(vertex) = tau(vertex) * tau_dual(face) / 2``.

The construction is flat rather than recursive: the parity field makes
every nesting level consistent in one pass, and all coupling identities
(non-crossing, cos/sin spin identities, gradient law, interface identity,
boundary-zero height) hold deterministically on every sample and are
asserted when ``check=True``.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from . import currents, decomposition, ising
from .errors import (CouplingViolation, InvalidParameter, InvalidVertex,
                     OracleCapacityExceeded, ParityInconsistency)
from .lattice import OUTER, DiscreteDomain, PlanarGraph

# -- cached per-domain structure -------------------------------------------

def _structure(dom: DiscreteDomain):
    """Face-parity BFS levels and the height integration tree (cached)."""
    cached = getattr(dom, "_coupling_structure", None)
    if cached is not None:
        return cached
    n, F, E = dom.n_vertices, dom.n_faces, len(dom.edges)
    root = F  # virtual node for the unbounded face

    # Face adjacency across "active" primal edges only (at least one
    # interior endpoint).  The wired odd part is an even subgraph of the
    # boundary-collapsed graph, so crossing parity is path-independent
    # exactly along such paths; edges between two boundary vertices carry
    # no odd current and are excluded.  When the unbounded face is not
    # reachable this way the parity reference is an arbitrary face — the
    # global coin of the coupling absorbs the choice.
    b = dom.is_boundary
    active = ~(b[dom.edges[:, 0]] & b[dom.edges[:, 1]])
    adj = [[] for _ in range(F + 1)]
    for e in np.where(active)[0]:
        a, c = dom.edge_faces[e]
        a = root if a == OUTER else int(a)
        c = root if c == OUTER else int(c)
        adj[a].append((c, int(e)))
        adj[c].append((a, int(e)))
    seen = np.zeros(F + 1, dtype=bool)
    face_levels = []
    for start in [root] + list(range(F)):
        if seen[start]:
            continue
        seen[start] = True
        frontier = [start]
        while frontier:
            faces, parents, edges, nxt = [], [], [], []
            for p in frontier:
                for f, e in adj[p]:
                    if not seen[f]:
                        seen[f] = True
                        faces.append(f)
                        parents.append(p)
                        edges.append(e)
                        nxt.append(f)
            if faces:
                face_levels.append((np.array(faces), np.array(parents),
                                    np.array(edges)))
            frontier = nxt
    fmap1 = np.where(dom.edge_faces[:, 0] == OUTER, root,
                     dom.edge_faces[:, 0]).astype(np.int64)
    fmap2 = np.where(dom.edge_faces[:, 1] == OUTER, root,
                     dom.edge_faces[:, 1]).astype(np.int64)
    active_idx = np.where(active)[0]

    # incidence (vertex, face) pairs and a BFS tree over them
    iv, iface = [], []
    for k, (i, j) in enumerate(dom.faces):
        for ci, cj in ((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)):
            iv.append(dom.vindex[(int(ci), int(cj))])
            iface.append(k)
    iv = np.array(iv, dtype=np.int64)
    iface = np.array(iface, dtype=np.int64)
    nodes = n + F  # vertices then faces
    inc_adj = [[] for _ in range(nodes)]
    for v, f in zip(iv, iface):
        inc_adj[v].append(n + f)
        inc_adj[n + f].append(v)
    # anchor at a boundary vertex that actually touches a face; vertices
    # touching no face (thin boundary slivers) stay at height zero
    has_face = np.zeros(n, dtype=bool)
    has_face[iv] = True
    anchors = np.where(dom.is_boundary & has_face)[0]
    if len(anchors) == 0:
        raise CouplingViolation("no boundary vertex touches a face")
    hroot = int(anchors[0])
    seen2 = np.zeros(nodes, dtype=bool)
    seen2[hroot] = True
    frontier = [hroot]
    h_levels = []
    while frontier:
        child, parent, nxt = [], [], []
        for p in frontier:
            for c in inc_adj[p]:
                if not seen2[c]:
                    seen2[c] = True
                    child.append(c)
                    parent.append(p)
                    nxt.append(c)
        if child:
            h_levels.append((np.array(child), np.array(parent)))
        frontier = nxt
    if not seen2[n:].all():
        raise CouplingViolation("face incidence graph is disconnected")
    unreached = ~seen2[:n]
    if (unreached & ~dom.is_boundary).any():
        raise CouplingViolation(
            "interior vertex disconnected from the face structure")

    s = (face_levels, fmap1, fmap2, active_idx, iv, iface, h_levels, hroot)
    dom._coupling_structure = s
    return s


# -- batched construction ---------------------------------------------------

def face_parity_batch(dom, odd_batch, check=True):
    """Crossing-parity field on faces: ``(B, F)`` values in {-1, +1}.

    Entry ``[b, f]`` is ``+1`` iff a dual path from the unbounded face to
    ``f`` crosses an even number of odd edges of sample ``b``; the odd
    part being sourceless (after boundary collapse) makes this
    path-independent along active edges, which is verified across every
    such edge when ``check`` is set.
    """
    face_levels, fmap1, fmap2, active_idx, *_ = _structure(dom)
    odd_batch = np.atleast_2d(odd_batch)
    B = odd_batch.shape[0]
    F = dom.n_faces
    s = np.ones((B, F + 1), dtype=np.int8)
    flip = (1 - 2 * odd_batch.astype(np.int8))
    for faces, parents, edges in face_levels:
        s[:, faces] = s[:, parents] * flip[:, edges]
    if check:
        ok = (s[:, fmap1[active_idx]] * s[:, fmap2[active_idx]]
              == flip[:, active_idx])
        if not ok.all():
            raise ParityInconsistency(
                "face parity is path-dependent (odd part not sourceless?)")
    return s[:, :F]


def height_batch(dom, tau_b, taud_b, check=True):
    """Integrate the gradient law; returns ``(h2_vertex, h2_face)``.

    ``2h`` is integer-valued: even on vertices, odd on faces.  With
    ``check`` the law is verified on every incidence pair and the height
    is asserted to vanish on the boundary (cycle failures raise
    CouplingViolation; they indicate an inconsistent spin input).
    """
    _, _, _, _, iv, iface, h_levels, hroot = _structure(dom)
    tau_b = np.atleast_2d(tau_b)
    taud_b = np.atleast_2d(taud_b)
    B = tau_b.shape[0]
    n, F = dom.n_vertices, dom.n_faces
    inc = (tau_b[:, iv] * taud_b[:, iface]).astype(np.int32)
    # per-incidence-slot value tau(v) tau_dual(f), indexed like iv/iface;
    # build per-node increments via a lookup from node ids to one incidence
    h2 = np.zeros((B, n + F), dtype=np.int32)
    slot_of = {}
    for slot, (v, f) in enumerate(zip(iv, iface)):
        slot_of[(int(v), int(f))] = slot
    for child, parent in h_levels:
        vs = np.where(child >= n, parent, child)
        fs = np.where(child >= n, child - n, parent - n)
        slots = np.array([slot_of[(int(v), int(f))]
                          for v, f in zip(vs, fs)])
        sign = np.where(child >= n, 1, -1).astype(np.int32)
        h2[:, child] = h2[:, parent] + sign * inc[:, slots]
    if check:
        if not np.array_equal(h2[:, n + iface] - h2[:, iv], inc):
            raise CouplingViolation("gradient law fails on a cycle")
        if h2[:, np.where(dom.is_boundary)[0]].any():
            raise CouplingViolation("height nonzero on the boundary cluster")
    return h2[:, :n], h2[:, n:]


def sample_coupling_batch(dom, beta, seed, n_samples, check=True,
                          with_height=True, sweeps_between=4,
                          warmup_sweeps=500):
    """Vectorized master-coupling samples; returns a dict of arrays.

    Keys: ``odd``/``occupied`` (primal trace), ``tau``, ``tau_dual``,
    ``labels``/``ghost``/``signs`` (primal partition), ``eps`` (global
    dual coin), ``odd_dual``/``occupied_dual`` (dual trace on the weak
    dual), and with ``with_height`` also ``h2_vertex``/``h2_face``.
    """
    if beta <= 0:
        raise InvalidParameter("beta must be positive")
    ss = np.random.SeedSequence([seed, 0x1C0])
    s_drc, s_sign, s_eps, s_fill = (int(x) for x in ss.generate_state(4))
    g = dom.full_graph()
    odd, occ = currents.sample_drc_batch(dom, "wired", beta, s_drc,
                                         n_samples, sweeps_between,
                                         warmup_sweeps)
    labels, ncomp, ghost = decomposition.batch_partition(g, occ, wired=True)
    rng = np.random.default_rng(s_sign)
    signs = decomposition.batch_cluster_signs(ncomp, ghost, rng)
    tau = signs[labels]
    s = face_parity_batch(dom, odd, check=check)
    eps = np.random.default_rng(s_eps).choice(
        np.array([-1, 1], dtype=np.int8), size=(n_samples, 1))
    taud = eps * s

    # dual current on the weak dual: interfaces of tau, plus an even part
    # only on dual edges whose primal partner is unoccupied
    pe = dom.dual_edge_of_primal
    pv = dom.edges[pe]
    odd_dual = tau[:, pv[:, 0]] != tau[:, pv[:, 1]]
    q = 1.0 - 1.0 / math.cosh(ising.dual_beta(beta))
    fill = np.random.default_rng(s_fill).random(odd_dual.shape) < q
    occ_dual = odd_dual | (fill & ~occ[:, pe])
    out = {"odd": odd, "occupied": occ, "labels": labels, "ghost": ghost,
           "signs": signs, "tau": tau, "parity": s, "eps": eps[:, 0],
           "tau_dual": taud, "odd_dual": odd_dual, "occupied_dual": occ_dual}
    if check:
        if (odd_dual & occ[:, pe]).any() or (occ_dual & occ[:, pe]).any():
            raise CouplingViolation("primal and dual traces cross")
        if (odd & ~occ).any():
            raise CouplingViolation("odd primal edge not occupied")
        if (tau[:, g.boundary] != 1).any():
            raise CouplingViolation("boundary spin not +1")
    if with_height:
        h2v, h2f = height_batch(dom, tau, taud, check=check)
        out["h2_vertex"], out["h2_face"] = h2v, h2f
        if check:
            if (h2v % 2).any() or (1 - (h2f % 2)).any():
                raise CouplingViolation("height parity broken")
            if not np.array_equal(1 - 2 * ((h2v // 2) % 2).astype(np.int8),
                                  tau):
                raise CouplingViolation("tau != cos(pi h)")
            if not np.array_equal(
                    1 - 2 * ((((h2f - 1) // 2) % 2)).astype(np.int8), taud):
                raise CouplingViolation("tau_dual != sin(pi h)")
    return out


def sample_height_batch(dom, beta, seed, n_samples, vertices=None,
                        chunk=256):
    """Height values ``2h`` at selected vertices, sampled in chunks."""
    sel = np.arange(dom.n_vertices) if vertices is None \
        else np.asarray(vertices)
    seeds = np.random.SeedSequence([seed, 0x48]).generate_state(
        -(-n_samples // chunk))
    rows = []
    done = 0
    for s in seeds:
        b = min(chunk, n_samples - done)
        out = sample_coupling_batch(dom, beta, int(s), b, check=False)
        rows.append(out["h2_vertex"][:, sel])
        done += b
    return np.concatenate(rows, axis=0)


# -- single-sample object ---------------------------------------------------

@dataclass
class CouplingSample:
    """One master-coupling sample with all coupled layers."""

    domain: DiscreteDomain
    beta: float
    seed: int
    primal_trace: currents.CurrentTrace
    dual_trace: currents.CurrentTrace
    tau: np.ndarray               # (n_vertices,) +-1
    tau_dual: np.ndarray          # (n_faces,) +-1
    h2_vertex: np.ndarray         # 2h on vertices (even integers)
    h2_face: np.ndarray           # 2h on faces (odd integers)
    cluster_index: np.ndarray     # partition label per vertex
    xi: np.ndarray                # per-cluster sign (indexed by label)
    dual_cluster_index: np.ndarray
    xi_dual: np.ndarray
    epsilon: int

    def h(self, kind, k) -> float:
        arr = self.h2_vertex if kind == "vertex" else self.h2_face
        return float(arr[k]) / 2.0

    def to_json(self) -> str:
        def bits(a):
            return "".join("1" if x else "0" for x in a)
        return json.dumps({
            "domain": self.domain.descriptor(),
            "beta": self.beta, "seed": self.seed,
            "epsilon": self.epsilon,
            "primal_odd": bits(self.primal_trace.odd),
            "primal_occupied": bits(self.primal_trace.occupied),
            "dual_odd": bits(self.dual_trace.odd),
            "dual_occupied": bits(self.dual_trace.occupied),
            "tau": self.tau.tolist(),
            "tau_dual": self.tau_dual.tolist(),
            "h2_vertex": self.h2_vertex.tolist(),
            "h2_face": self.h2_face.tolist(),
            "xi": self.xi.tolist(),
            "xi_dual": self.xi_dual.tolist(),
        }, sort_keys=True)


def _dual_planar_graph(dom: DiscreteDomain) -> PlanarGraph:
    """Weak dual as a bare planar graph (faces unused downstream)."""
    E = len(dom.dual_edges)
    return PlanarGraph(dom.n_faces, dom.dual_edges.astype(np.int32),
                       np.full((E, 2), OUTER, dtype=np.int32), 0,
                       np.zeros(dom.n_faces, dtype=bool))


def sample_master_coupling(dom, beta, seed, check=True) -> CouplingSample:
    """One fully checked master-coupling sample (deterministic in seed)."""
    out = sample_coupling_batch(dom, beta, seed, 1, check=check)
    g = dom.full_graph()
    primal = currents.CurrentTrace(out["occupied"][0], out["odd"][0],
                                   "wired", float(beta), g)
    dual_g = _dual_planar_graph(dom)
    dual = currents.CurrentTrace(out["occupied_dual"][0], out["odd_dual"][0],
                                 "free", ising.dual_beta(beta), dual_g)
    if check:
        currents.verify_sourceless(primal)
    dlabels, dncomp, _ = decomposition.partition(dual_g,
                                                 out["occupied_dual"][0],
                                                 wired=False)
    xi_dual = np.ones(dncomp, dtype=np.int8)
    taud = out["tau_dual"][0]
    for lab in range(dncomp):
        members = np.where(dlabels == lab)[0]
        vals = taud[members]
        if (vals != vals[0]).any():
            raise CouplingViolation("dual spin not constant on dual cluster")
        xi_dual[lab] = vals[0]
    return CouplingSample(
        domain=dom, beta=float(beta), seed=seed,
        primal_trace=primal, dual_trace=dual,
        tau=out["tau"][0], tau_dual=taud,
        h2_vertex=out["h2_vertex"][0], h2_face=out["h2_face"][0],
        cluster_index=out["labels"][0], xi=out["signs"],
        dual_cluster_index=dlabels, xi_dual=xi_dual,
        epsilon=int(out["eps"][0]))


def height_from_spins(tau, tau_dual, dom):
    """Reconstruct ``(h2_vertex, h2_face)`` from the two spin fields.

    The unique height vanishing on the boundary cluster; cycle
    inconsistencies (spins not arising from one coupling) raise
    CouplingViolation.
    """
    return height_batch(dom, np.asarray(tau, dtype=np.int8),
                        np.asarray(tau_dual, dtype=np.int8), check=True)


def parity_labels(trace, cluster, dom, check_paths=True):
    """Inner-boundary parity labels of one cluster.

    ``+1`` iff a dual path from a face enclosed by the inner boundary to
    the unbounded face crosses the cluster's odd edges an odd number of
    times.  With ``check_paths`` the parity field is verified to be
    locally consistent across every primal edge (path independence).
    """
    g = trace.graph
    coords = decomposition.trace_vertex_coords(trace, dom)
    # odd edges of this cluster (both endpoints in the cluster; for the
    # boundary cluster the wired boundary belongs to it)
    in_cl = np.zeros(g.n_vertices, dtype=bool)
    in_cl[cluster.vertices] = True
    if cluster.is_boundary_cluster:
        in_cl[g.boundary] = True
    cl_odd = trace.odd & in_cl[g.edges[:, 0]] & in_cl[g.edges[:, 1]]

    if trace.bc == "wired":
        s = face_parity_batch(dom, cl_odd[None, :], check=check_paths)[0]
        face_of = dom.findex
    else:
        s, face_of = _free_face_parity(g, coords, cl_odd, check_paths)

    labels = []
    for hole in cluster.inner_regions:
        lab = None
        for (i, j) in map(tuple, hole):
            for corner in ((i - 1, j - 1), (i, j - 1), (i - 1, j), (i, j)):
                f = face_of.get(corner)
                if f is not None:
                    val = -int(s[f])  # +1 iff crossing count is odd
                    if lab is None:
                        lab = val
                    elif lab != val and check_paths:
                        raise ParityInconsistency(
                            "hole faces disagree on the parity label")
        labels.append(lab if lab is not None else -1)
    return labels


def _free_face_parity(g, coords, odd, check_paths):
    """Crossing parity on the faces of a free (interior) trace graph."""
    root = g.n_faces
    adj = [[] for _ in range(g.n_faces + 1)]
    for e in range(g.n_edges):
        a, b = g.edge_faces[e]
        a = root if a == OUTER else int(a)
        b = root if b == OUTER else int(b)
        adj[a].append((b, e))
        adj[b].append((a, e))
    s = np.zeros(g.n_faces + 1, dtype=np.int8)
    s[root] = 1
    frontier = [root]
    while frontier:
        nxt = []
        for p in frontier:
            for f, e in adj[p]:
                if s[f] == 0:
                    s[f] = s[p] * (1 - 2 * int(odd[e]))
                    nxt.append(f)
        frontier = nxt
    if check_paths:
        for e in range(g.n_edges):
            a, b = g.edge_faces[e]
            a = root if a == OUTER else int(a)
            b = root if b == OUTER else int(b)
            if int(s[a]) * int(s[b]) != 1 - 2 * int(odd[e]):
                raise ParityInconsistency("face parity path-dependent")
    # recover each face's lattice-square corner from its incident edges
    corner_map = {}
    for e in range(g.n_edges):
        va, vb = g.edges[e]
        (ia, ja), (ib, jb) = coords[va], coords[vb]
        for f in g.edge_faces[e]:
            if f == OUTER:
                continue
            corner_map.setdefault(int(f), []).append(
                (min(ia, ib), min(ja, jb)))
    out = {}
    for f, cands in corner_map.items():
        # the square corner appears for each of its 4 edges; horizontal
        # edges vote (i, j) or (i, j+1), vertical (i, j) or (i+1, j) --
        # the true corner is the lexicographic minimum of the votes
        out[min(cands)] = f
    return s[:g.n_faces], out


def verify_bosonisation(dom, primal_points, dual_points, samples, seed):
    """Monte Carlo vs exact check of the spin/disorder product identity.

    lhs: MC estimate of E[prod cos(pi h(v)) prod sin(pi h(u))] (equal to
    the product of coupled spins).  rhs: squared exact plus-bc Ising
    correlation with a disorder line pairing up the dual points (zero by
    symmetry when their number is odd).
    """
    primal_points = [int(v) for v in primal_points]
    dual_points = [int(u) for u in dual_points]
    for v in primal_points:
        if dom.is_boundary[v]:
            raise InvalidVertex("primal insertion on the boundary")
    beta = ising.critical_beta()
    out = sample_coupling_batch(dom, beta, seed, samples, check=False,
                                with_height=False)
    prod = np.ones(samples, dtype=np.float64)
    for v in primal_points:
        prod *= out["tau"][:, v]
    for u in dual_points:
        prod *= out["tau_dual"][:, u]
    mc = float(prod.mean())
    se = float(prod.std(ddof=1) / math.sqrt(samples))

    if len(dual_points) % 2 == 1:
        rhs = 0.0
    else:
        gamma = _pair_disorder_edges(dom, dual_points)
        rhs = ising.exact_disorder_correlation(dom, primal_points, gamma,
                                               beta) ** 2
    return {"lhs_mc": mc, "rhs_exact": float(rhs), "se": se,
            "n_samples": samples, "seed": seed,
            "pass": bool(abs(mc - rhs) < 4 * max(se, 1e-12))}


def _pair_disorder_edges(dom, dual_points):
    """Primal edges crossed by disorder lines pairing the dual points.

    Faces are paired consecutively and joined by paths in the weak dual;
    the crossed primal edges are accumulated mod 2.
    """
    # BFS parents on the face graph (any spanning structure works: the
    # disorder expectation is path-independent)
    face_levels, *_ = _structure(dom)
    parent = {}
    via = {}
    for faces, parents, edges in face_levels:
        for f, p, e in zip(faces, parents, edges):
            parent[int(f)] = int(p)
            via[int(f)] = int(e)
    flip = np.zeros(len(dom.edges), dtype=bool)
    for u in dual_points:
        f = int(u)
        while f in parent:  # stop at the tree root of f's component
            flip[via[f]] ^= True
            f = parent[f]
    return np.where(flip)[0]
