"""Cluster extraction and the signed excursion decomposition.

Clusters are connected components of the occupied graph of a current trace
(wired: the boundary is merged through a ghost).  Each cluster owns the
closed region ``C`` given by the union of the mesh squares centred at its
vertices; its boundary is traced into simple corner-coordinate loops (one
outer, possibly several inner loops around holes), and its diameter is the
Euclidean diameter of ``C``.

The decomposition writes the coupled spin field as ``mu_0 + sum_k xi_k
mu_k`` where ``mu_k`` is the renormalized indicator area measure of the
k-th cluster and the clusters are ordered by decreasing diameter
(ties broken by the lexicographically smallest vertex coordinate).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.spatial import ConvexHull, QhullError

from . import currents, ising
from .errors import (ContractViolation, InvalidParameter,
                     OverlappingSupports, ShapeMismatch, SignCountMismatch)
from .lattice import DiscreteDomain, TestFunction, build_domain

# -- partitions ------------------------------------------------------------

def partition(g, occupied, wired):
    """Component labels of the occupied graph.

    Returns ``(labels, n_components, ghost_label)``; under wired bc all
    boundary vertices share the ghost's component even without occupied
    edges, and ``ghost_label`` is that component (else -1).
    """
    n = g.n_vertices
    total = n + 1 if wired else n
    e = g.edges[np.asarray(occupied, dtype=bool)]
    rows, cols = e[:, 0], e[:, 1]
    if wired:
        bidx = np.where(g.boundary)[0]
        rows = np.concatenate([rows, bidx])
        cols = np.concatenate([cols, np.full(len(bidx), n, dtype=rows.dtype)])
    m = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)),
                          shape=(total, total))
    ncomp, labels = connected_components(m, directed=False)
    ghost = int(labels[n]) if wired else -1
    return labels[:n], ncomp, ghost


def batch_partition(g, occ_batch, wired):
    """Vectorized partition of many samples at once.

    Stacks the samples as one block-diagonal graph so a single
    connected-components call labels every sample.  Returns
    ``(labels (B, n), n_components, ghost_labels (B,) or None)``; labels
    are global across the batch (each sample uses its own label range).
    """
    occ_batch = np.atleast_2d(occ_batch)
    B = occ_batch.shape[0]
    n = g.n_vertices
    stride = n + 1 if wired else n
    b_idx, e_idx = np.nonzero(occ_batch)
    rows = g.edges[e_idx, 0].astype(np.int64) + b_idx * stride
    cols = g.edges[e_idx, 1].astype(np.int64) + b_idx * stride
    if wired:
        bidx = np.where(g.boundary)[0]
        off = np.arange(B, dtype=np.int64)[:, None] * stride
        rows = np.concatenate([rows, (bidx[None, :] + off).ravel()])
        cols = np.concatenate(
            [cols, np.broadcast_to(off + n, (B, len(bidx))).ravel()])
    m = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)),
                          shape=(B * stride, B * stride))
    ncomp, labels = connected_components(m, directed=False)
    labels = labels.reshape(B, stride)
    ghost = labels[:, n].copy() if wired else None
    return labels[:, :n], ncomp, ghost


def batch_cluster_signs(ncomp, ghost_labels, rng):
    """I.i.d. symmetric signs per component; ghost components forced +1."""
    signs = rng.choice(np.array([-1, 1], dtype=np.int8), size=ncomp)
    if ghost_labels is not None:
        signs[ghost_labels] = 1
    return signs


def even_intersection_mask(labels, A, ghost_labels):
    """Rows where every cluster meets ``A`` an even number of times.

    ``labels``: (B, n) component labels; ``A``: vertex indices.  When |A|
    is odd the ghost/boundary component counts as one extra member.  Only
    components intersecting A can have odd counts, so it suffices that the
    multiset of labels over A (plus the ghost label when |A| is odd) pairs
    up exactly.
    """
    A = list(A)
    cols = [labels[:, v] for v in A]
    if len(A) % 2 == 1:
        if ghost_labels is None:
            return np.zeros(labels.shape[0], dtype=bool)
        cols.append(ghost_labels)
    if not cols:
        return np.ones(labels.shape[0], dtype=bool)
    arr = np.sort(np.stack(cols, axis=1), axis=1)
    return np.all(arr[:, 0::2] == arr[:, 1::2], axis=1)


# -- cluster geometry ------------------------------------------------------

def trace_vertex_coords(trace, dom):
    """Integer lattice coordinates of the trace-graph vertices."""
    if trace.bc == "wired":
        return dom.verts
    _, keep = dom.interior_graph()
    return dom.verts[keep]


def _square_diameter(coords):
    """Euclidean diameter (in lattice units) of a union of unit squares."""
    pts = set()
    for i, j in coords:
        pts.update(((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)))
    pts = np.array(sorted(pts), dtype=float)
    if len(pts) > 8:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except QhullError:
            pass
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    return math.sqrt(float(d2.max()))


_DIRS = {(1, 0): 0, (0, 1): 1, (-1, 0): 2, (0, -1): 3}
_STEP = [(1, 0), (0, 1), (-1, 0), (0, -1)]


def _trace_loops(squares):
    """Boundary loops of a set of unit squares, region kept on the left.

    Squares are integer coords; square (i, j) spans corners (i, j) to
    (i+1, j+1).  Returns ``(outer_loops, inner_loops)`` as lists of corner
    arrays; at pinch corners the rightmost turn is taken, which closes
    holes touching the outside only at a corner as separate inner loops.
    """
    sq = set(map(tuple, squares))
    out = {}  # corner -> list of (next_corner)
    for i, j in sq:
        if (i, j - 1) not in sq:
            out.setdefault((i, j), []).append((i + 1, j))
        if (i + 1, j) not in sq:
            out.setdefault((i + 1, j), []).append((i + 1, j + 1))
        if (i, j + 1) not in sq:
            out.setdefault((i + 1, j + 1), []).append((i, j + 1))
        if (i - 1, j) not in sq:
            out.setdefault((i, j + 1), []).append((i, j))
    used = set()
    outer, inner = [], []
    for start, nexts in sorted(out.items()):
        for nxt in nexts:
            if (start, nxt) in used:
                continue
            loop = [start]
            cur, prv = nxt, start
            used.add((start, nxt))
            area2 = (prv[0] * cur[1] - cur[0] * prv[1])
            while cur != start:
                loop.append(cur)
                dx, dy = cur[0] - prv[0], cur[1] - prv[1]
                d = _DIRS[(dx, dy)]
                cands = out.get(cur, [])
                chosen = None
                # rightmost turn first: right, straight, left
                for turn in (3, 0, 1):
                    sx, sy = _STEP[(d + turn) % 4]
                    target = (cur[0] + sx, cur[1] + sy)
                    if target in cands and (cur, target) not in used:
                        chosen = target
                        break
                if chosen is None:
                    raise ContractViolation("open boundary walk")
                used.add((cur, chosen))
                area2 += cur[0] * chosen[1] - chosen[0] * cur[1]
                prv, cur = cur, chosen
            arr = np.array(loop, dtype=np.int64)
            (outer if area2 > 0 else inner).append(arr)
    return outer, inner


def _holes(squares_set, coords):
    """Connected components of the complement enclosed by the squares."""
    i0 = coords[:, 0].min() - 1
    i1 = coords[:, 0].max() + 1
    j0 = coords[:, 1].min() - 1
    j1 = coords[:, 1].max() + 1
    seen = set()
    holes = []
    for i in range(i0, i1 + 1):
        for j in range(j0, j1 + 1):
            c = (i, j)
            if c in squares_set or c in seen:
                continue
            comp, stack, escapes = [], [c], False
            seen.add(c)
            while stack:
                x, y = stack.pop()
                comp.append((x, y))
                if x in (i0, i1) or y in (j0, j1):
                    escapes = True
                for dx, dy in _STEP:
                    nb = (x + dx, y + dy)
                    if (i0 <= nb[0] <= i1 and j0 <= nb[1] <= j1
                            and nb not in squares_set and nb not in seen):
                        seen.add(nb)
                        stack.append(nb)
            if not escapes:
                holes.append(comp)
    return holes


@dataclass
class Cluster:
    """One cluster of a current trace with its region geometry."""

    index: int
    vertices: np.ndarray          # trace-graph vertex indices
    coords: np.ndarray            # (k, 2) lattice coordinates
    diameter: float               # Euclidean diameter of C (physical units)
    is_boundary_cluster: bool
    outer_boundary: list = field(default_factory=list)
    inner_boundaries: list = field(default_factory=list)
    inner_regions: list = field(default_factory=list)  # hole coords arrays

    def lex_min_coord(self):
        k = np.lexsort((self.coords[:, 1], self.coords[:, 0]))[0]
        return tuple(self.coords[k])


def clusters(trace, dom, trace_boundaries=True):
    """Clusters of ``trace`` with boundary loops, holes and diameters."""
    g = trace.graph
    coords = trace_vertex_coords(trace, dom)
    wired = trace.bc == "wired"
    labels, ncomp, ghost = partition(g, trace.occupied, wired)
    out = []
    for lab in range(ncomp):
        verts = np.where(labels == lab)[0]
        if len(verts) == 0:
            continue  # the bare ghost component without vertices
        cc = coords[verts]
        cl = Cluster(index=lab, vertices=verts, coords=cc,
                     diameter=dom.delta * _square_diameter(cc),
                     is_boundary_cluster=(lab == ghost))
        if trace_boundaries:
            sqset = set(map(tuple, cc))
            outer, inner = _trace_loops(cc)
            cl.outer_boundary = outer
            cl.inner_boundaries = inner
            cl.inner_regions = [np.array(h, dtype=np.int64)
                                for h in _holes(sqset, cc)]
        out.append(cl)
    return out


# -- decomposition ---------------------------------------------------------

@dataclass
class ExcursionDecomposition:
    """Signed excursion decomposition of a coupled spin field."""

    clusters: list                # ordered: boundary cluster first, then
    signs: np.ndarray             # by decreasing diameter
    delta: float
    domain: DiscreteDomain
    n_vertices: int               # of the trace graph
    interior_mask: np.ndarray     # interior vertices of the trace graph
    centers: np.ndarray           # (n, 2) physical centers

    def measure_pairing(self, k, f: TestFunction) -> float:
        """``(mu_k, f)``: renormalized area pairing of cluster k."""
        cl = self.clusters[k]
        vs = cl.vertices[self.interior_mask[cl.vertices]]
        if len(vs) == 0:
            return 0.0
        vals = np.array([f(complex(x, y)) for x, y in self.centers[vs]])
        return float(self.delta ** (-0.25) * vals.sum() * self.delta ** 2)


def _ordering_key(cl: Cluster):
    return (-cl.diameter, cl.lex_min_coord())


def decompose(sample_or_pair, dom) -> ExcursionDecomposition:
    """Build the ordered signed decomposition from a coupling sample.

    Accepts either a master-coupling sample (``.primal_trace``, ``.tau``,
    ``.cluster_index``, ``.xi``) or a ``(trace, signs)`` pair with signs
    indexed by partition label.
    """
    if hasattr(sample_or_pair, "primal_trace"):
        trace = sample_or_pair.primal_trace
        labels, ncomp, ghost = partition(trace.graph, trace.occupied,
                                         trace.bc == "wired")
        # translate per-vertex tau into per-partition-label signs
        signs = np.ones(ncomp, dtype=np.int8)
        first = np.full(ncomp, -1, dtype=np.int64)
        for v in range(len(labels)):
            if first[labels[v]] < 0:
                first[labels[v]] = v
        for lab in range(ncomp):
            if first[lab] >= 0:
                signs[lab] = sample_or_pair.tau[first[lab]]
    else:
        trace, signs = sample_or_pair
        labels, ncomp, ghost = partition(trace.graph, trace.occupied,
                                         trace.bc == "wired")
        signs = np.asarray(signs, dtype=np.int8)
        if len(signs) != ncomp:
            raise SignCountMismatch(
                f"{len(signs)} signs for {ncomp} clusters")
        if ghost >= 0 and signs[ghost] != 1:
            raise SignCountMismatch("boundary cluster sign must be +1")
    cls = clusters(trace, dom, trace_boundaries=False)
    bnd = [c for c in cls if c.is_boundary_cluster]
    rest = sorted([c for c in cls if not c.is_boundary_cluster],
                  key=_ordering_key)
    ordered = bnd + rest
    coords = trace_vertex_coords(trace, dom)
    if trace.bc == "wired":
        interior = ~dom.is_boundary
    else:
        interior = np.ones(len(coords), dtype=bool)
    return ExcursionDecomposition(
        clusters=ordered,
        signs=np.array([signs[c.index] for c in ordered], dtype=np.int8),
        delta=dom.delta, domain=dom, n_vertices=len(coords),
        interior_mask=interior, centers=coords * dom.delta)


def reconstruct(dec: ExcursionDecomposition) -> np.ndarray:
    """Recombine the signed indicators into the spin field (exact)."""
    covered = np.zeros(dec.n_vertices, dtype=bool)
    out = np.zeros(dec.n_vertices, dtype=np.int8)
    for cl, s in zip(dec.clusters, dec.signs):
        if covered[cl.vertices].any():
            raise OverlappingSupports("cluster supports overlap")
        covered[cl.vertices] = True
        out[cl.vertices] = s
    if not covered.all():
        raise OverlappingSupports("clusters do not cover the graph")
    return out


def partial_sums(dec: ExcursionDecomposition, f: TestFunction, ordering,
                 n_max=None):
    """Partial sums ``S_N`` of the signed pairings under an ordering.

    ``ordering`` is ``"diameter"`` (the stored order), ``"random:<seed>"``
    (geometry-blind shuffle), or an explicit permutation of cluster
    indices.  Orderings may depend on cluster geometry only; sign-based
    specifications are rejected.
    """
    k = len(dec.clusters)
    if isinstance(ordering, str):
        if ordering == "diameter":
            perm = np.arange(k)
        elif ordering.startswith("random:"):
            rng = np.random.default_rng(int(ordering.split(":", 1)[1]))
            perm = rng.permutation(k)
        else:
            raise ContractViolation(
                f"ordering {ordering!r} is not geometry-measurable")
    else:
        perm = np.asarray(ordering, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(k)):
            raise ContractViolation("ordering is not a permutation")
    n_max = k if n_max is None else min(n_max, k)
    sums, acc = [], 0.0
    for i in range(n_max):
        j = int(perm[i])
        acc += float(dec.signs[j]) * dec.measure_pairing(j, f)
        sums.append(acc)
    return np.array(sums)


def diameter_census(dec: ExcursionDecomposition, rho_list):
    """Number of clusters with diameter exceeding each threshold."""
    diams = np.array([c.diameter for c in dec.clusters])
    return np.array([(diams > rho).sum() for rho in rho_list])


def census_from_partition(labels, coords, delta, rho_list):
    """Diameter census from a raw partition (no Cluster objects).

    Bounding boxes prefilter the clusters: only those whose box diagonal
    reaches the threshold get an exact convex-hull diameter.
    """
    labs = np.asarray(labels)
    ncomp = labs.max() + 1
    huge = np.iinfo(np.int64).max
    lo = np.full((ncomp, 2), huge)
    hi = np.full((ncomp, 2), -huge)
    np.minimum.at(lo, labs, coords)
    np.maximum.at(hi, labs, coords)
    present = lo[:, 0] != huge
    side = (hi - lo + 1).astype(float)
    diag = delta * np.sqrt((side ** 2).sum(axis=1))
    maxside = delta * side.max(axis=1)
    rho_list = np.asarray(rho_list, dtype=float)
    counts = np.zeros(len(rho_list), dtype=np.int64)
    refine = {}
    for ri, rho in enumerate(rho_list):
        sure = present & (maxside > rho)
        maybe = present & ~sure & (diag > rho)
        counts[ri] = int(sure.sum())
        for lab in np.where(maybe)[0]:
            if lab not in refine:
                refine[lab] = delta * _square_diameter(coords[labs == lab])
            if refine[lab] > rho:
                counts[ri] += 1
    return counts


def nesting_tree(cls):
    """Parent index per cluster (-1 for roots) from hole containment.

    Cluster ``B`` is a child of ``A`` when ``B`` sits inside a hole of
    ``A``; the parent is the cluster with the smallest such hole.
    """
    hole_of = {}  # coord -> list of (hole_size, owner index)
    for k, cl in enumerate(cls):
        for hole in cl.inner_regions:
            for c in map(tuple, hole):
                hole_of.setdefault(c, []).append((len(hole), k))
    parents = np.full(len(cls), -1, dtype=np.int64)
    for k, cl in enumerate(cls):
        c = tuple(cl.coords[0])
        owners = [o for o in hole_of.get(c, []) if o[1] != k]
        if owners:
            parents[k] = min(owners)[1]
    return parents


# -- statistical verifications ---------------------------------------------

def verify_switching(dom, A, beta, samples, seed):
    """Monte Carlo check of the even-intersection connectivity identity.

    The probability that every cluster of a wired DRC meets ``A`` (plus
    the boundary for odd |A|) evenly is compared against the exact squared
    Ising correlation from the enumeration oracle.
    """
    A = [int(a) for a in A]
    exact = ising.exact_correlation(dom, A, "plus", beta) ** 2
    g = dom.full_graph()
    odd, occ = currents.sample_drc_batch(dom, "wired", beta, seed, samples)
    labels, ncomp, ghost = batch_partition(g, occ, wired=True)
    hits = even_intersection_mask(labels, A, ghost)
    mc = float(hits.mean())
    se = float(hits.std(ddof=1) / math.sqrt(samples))
    return {"mc_prob": mc, "exact_corr": float(exact), "se": se,
            "n_samples": samples, "seed": seed,
            "pass": bool(abs(mc - exact) < 4 * max(se, 1e-12))}


def _stream_site_means(dom, beta, seed, n_samples, columns):
    """Per-sample means of selected spin products from one plus-bc chain.

    ``columns`` is a list of interior-index arrays; for each array the
    per-sample mean of the referenced spins (or, for ``(a, b)`` tuples,
    of the products ``spin[a] * spin[b]``) is recorded.  Returns one
    ``(n_samples,)`` float array per entry, sampled memory-boundedly.
    """
    sampler, _ = ising._domain_sampler(dom, "plus", beta)
    chunk = max(64, min(2000, int(2e8 // max(dom.n_interior, 1))))
    outs = [np.empty(n_samples) for _ in columns]
    pos = 0
    for batch in sampler.run_stream(seed, n_samples, chunk=chunk,
                                    sweeps_between=2, warmup_sweeps=200):
        b = batch.shape[0]
        for k, col in enumerate(columns):
            if isinstance(col, tuple):
                a, c = col
                vals = (batch[:, a] * batch[:, c]).mean(axis=1)
            else:
                vals = batch[:, col].astype(np.float64).mean(axis=1)
            outs[k][pos:pos + b] = vals
        pos += b
    return outs


def _n_for(samples, size):
    return int(samples[size] if isinstance(samples, dict) else samples)


def scaling_study(sizes, beta, samples, seed, parts=("two_point",),
                  height_size=None, boundary_size=None, height_samples=None):
    """Critical-exponent fits and the height-covariance ratio.

    ``parts`` selects any of ``two_point`` (XOR bulk pair decay across
    ``sizes``), ``boundary`` (one-point decay with distance to the
    boundary), ``height`` (height covariance against the continuum disk
    Green's function).  ``samples`` may be a per-size dict.  Returns a
    dict of tables and fitted values.

    The XOR field is a product of two independent Ising copies, so its
    correlations are squared Ising correlations; each Ising mean is
    estimated from a single chain (translation-averaged over a fixed set
    of relative positions) and squared, which is much tighter than a
    direct two-copy product estimator at the same cost.
    """
    rng_root = np.random.SeedSequence(seed)
    out = {"seed": seed}
    if "two_point" in parts:
        rows = []
        for size, ss in zip(sizes, rng_root.spawn(len(sizes))):
            dom = build_domain("unit_square", 1.0 / (size + 1))
            remap = -np.ones(dom.n_vertices, dtype=np.int64)
            remap[~dom.is_boundary] = np.arange(dom.n_interior)
            q = max(1, (size + 1) // 4)
            shifts = sorted({int(round(r * q))
                             for r in (-0.4, -0.2, 0.0, 0.2, 0.4)})
            pa = np.array([remap[dom.vindex[(q + j, q + j)]]
                           for j in shifts])
            pb = np.array([remap[dom.vindex[(3 * q + j, 3 * q + j)]]
                           for j in shifts])
            n = _n_for(samples, size)
            (vals,) = _stream_site_means(dom, beta,
                                         int(ss.generate_state(1)[0]),
                                         n, [(pa, pb)])
            m = float(vals.mean())
            se_m = float(vals.std(ddof=1) / math.sqrt(n))
            rows.append({"size": size, "delta": dom.delta,
                         "estimate": m * m, "se": 2.0 * abs(m) * se_m,
                         "n_samples": n})
        out["two_point"] = rows
        if len(rows) >= 2:
            xs = np.log([r["delta"] for r in rows])
            ys = np.log([max(r["estimate"], 1e-300) for r in rows])
            out["two_point_exponent"] = float(np.polyfit(xs, ys, 1)[0])
    if "boundary" in parts:
        size = boundary_size or max(sizes)
        dom = build_domain("unit_square", 1.0 / (size + 1))
        remap = -np.ones(dom.n_vertices, dtype=np.int64)
        remap[~dom.is_boundary] = np.arange(dom.n_interior)
        # keep d well below the size so the far boundaries stay negligible
        lo, hi = max(3, size // 64), max(8, size // 8)
        span = range((size + 1) // 3, 2 * (size + 1) // 3 + 1)
        dists = sorted({int(round(d)) for d in
                        np.geomspace(lo, hi, 12)})
        cols = [np.array([remap[dom.vindex[(x, d)]] for x in span])
                for d in dists]
        n = _n_for(samples, size)
        seed_b = int(rng_root.spawn(2)[1].generate_state(1)[0])
        means = _stream_site_means(dom, beta, seed_b, n, cols)
        rows = []
        for d, vals in zip(dists, means):
            m = float(vals.mean())
            rows.append({"distance": d * dom.delta, "estimate": m * m,
                         "se": 2.0 * abs(m)
                         * float(vals.std(ddof=1) / math.sqrt(n)),
                         "n_samples": n})
        sel = [r for r in rows if r["estimate"] > 0]
        xs = np.log([r["distance"] for r in sel])
        ys = np.log([r["estimate"] for r in sel])
        out["boundary"] = rows
        out["boundary_exponent"] = float(-np.polyfit(xs, ys, 1)[0])
    if "height" in parts:
        from . import continuum, coupling
        size = height_size or max(sizes)
        dom = build_domain("unit_disk", 2.0 / (size + 1))
        za, zb = -0.15 + 0.0j, 0.15 + 0.0j
        ia = dom.vindex[(round(za.real / dom.delta), 0)]
        ib = dom.vindex[(round(zb.real / dom.delta), 0)]
        hseed = int(rng_root.spawn(3)[2].generate_state(1)[0])
        n = int(height_samples or _n_for(samples, size))
        hv = coupling.sample_height_batch(dom, beta, hseed, n,
                                          vertices=[ia, ib])
        prod = (hv[:, 0] * hv[:, 1]).astype(float) / 4.0  # h = h2 / 2
        cov = float(prod.mean())
        g = continuum.green_disk(complex(dom.vertex_center(ia)),
                                 complex(dom.vertex_center(ib)))
        out["height"] = {
            "cov": cov,
            "se": float(prod.std(ddof=1) / math.sqrt(len(prod))),
            "green": g, "ratio": cov / g, "n_samples": n,
            "target": 1.0 / (2.0 * math.pi ** 2)}
    return out
