import math

import numpy as np
import pytest

from xorcurrents import coupling, currents, decomposition, lattice
from xorcurrents.errors import (ContractViolation, OverlappingSupports,
                                SignCountMismatch)


def _ring_trace(beta):
    """Free trace on a 5x5 interior whose one nontrivial cluster is a ring
    of eight squares around the center; the center vertex stays isolated."""
    dom = lattice.square_domain(5)
    g, keep = dom.interior_graph()
    coords = dom.verts[keep]
    pos = {tuple(c): k for k, c in enumerate(coords)}
    ring = [(2, 2), (2, 3), (2, 4), (3, 4), (4, 4), (4, 3), (4, 2), (3, 2)]
    occ = np.zeros(g.n_edges, dtype=bool)
    for e, (a, b) in enumerate(g.edges):
        ca, cb = tuple(coords[a]), tuple(coords[b])
        if ca in ring and cb in ring:
            occ[e] = True
    odd = np.zeros(g.n_edges, dtype=bool)
    tr = currents.CurrentTrace(occ, odd, "free", beta, g)
    return dom, tr, pos


def test_partition_and_ghost(d3, beta_c):
    g = d3.full_graph()
    occ = np.zeros(len(d3.edges), dtype=bool)
    labels, ncomp, ghost = decomposition.partition(g, occ, wired=True)
    # no occupied edges: every boundary vertex joins the ghost component
    assert (labels[d3.is_boundary] == ghost).all()
    assert len(set(labels[~d3.is_boundary])) == d3.n_interior
    labels_f, ncomp_f, ghost_f = decomposition.partition(g, occ, wired=False)
    assert ghost_f == -1
    assert ncomp_f == d3.n_vertices


def test_batch_partition_matches_single(d3, beta_c):
    g = d3.full_graph()
    _, occ = currents.sample_trace_batch(d3, "wired", beta_c, 2, 6)
    lab_b, _, ghost_b = decomposition.batch_partition(g, occ, wired=True)
    for i in range(6):
        lab, ncomp, ghost = decomposition.partition(g, occ[i], wired=True)
        # same partition up to relabeling
        ref = {}
        for a, b in zip(lab.tolist(), lab_b[i].tolist()):
            assert ref.setdefault(a, b) == b
        assert (lab_b[i] == ghost_b[i]).sum() == (lab == ghost).sum()


def test_even_intersection_mask_hand_cases():
    labels = np.array([[0, 0, 1, 1], [0, 1, 2, 1]])
    m = decomposition.even_intersection_mask(labels, [0, 1], None)
    assert m.tolist() == [True, False]
    ghost = np.array([1, 1])
    m2 = decomposition.even_intersection_mask(labels, [2], ghost)
    assert m2.tolist() == [True, False]
    # odd |A| without a ghost component can never pair up
    m3 = decomposition.even_intersection_mask(labels, [2], None)
    assert m3.tolist() == [False, False]


def test_ring_cluster_geometry(beta_c):
    dom, tr, pos = _ring_trace(beta_c)
    cls = decomposition.clusters(tr, dom)
    rings = [c for c in cls if len(c.vertices) == 8]
    assert len(rings) == 1
    ring = rings[0]
    assert len(ring.outer_boundary) == 1
    assert len(ring.inner_boundaries) == 1
    assert len(ring.inner_regions) == 1
    assert [tuple(c) for c in ring.inner_regions[0]] == [(3, 3)]
    # region spans corners (2,2)..(5,5): diameter 3*sqrt(2)*delta
    assert math.isclose(ring.diameter, 3 * math.sqrt(2) * dom.delta,
                        rel_tol=1e-12)
    singles = [c for c in cls if len(c.vertices) == 1]
    assert len(singles) == 17
    for c in singles:
        assert not c.inner_regions and len(c.outer_boundary) == 1


def test_nesting_tree_ring(beta_c):
    dom, tr, pos = _ring_trace(beta_c)
    cls = decomposition.clusters(tr, dom)
    parents = decomposition.nesting_tree(cls)
    k_ring = next(k for k, c in enumerate(cls) if len(c.vertices) == 8)
    k_center = next(k for k, c in enumerate(cls)
                    if tuple(c.coords[0]) == (3, 3))
    assert parents[k_center] == k_ring
    assert parents[k_ring] == -1
    outside = [k for k, c in enumerate(cls)
               if k not in (k_ring, k_center)]
    assert all(parents[k] == -1 for k in outside)


def test_decompose_reconstruct_roundtrip(d4, beta_c):
    cs = coupling.sample_master_coupling(d4, beta_c, 17)
    dec = decomposition.decompose(cs, d4)
    assert dec.clusters[0].is_boundary_cluster
    diams = [c.diameter for c in dec.clusters[1:]]
    assert diams == sorted(diams, reverse=True)
    assert dec.signs[0] == 1
    field = decomposition.reconstruct(dec)
    assert np.array_equal(field, cs.tau)


def test_decompose_pair_input_and_sign_checks(beta_c):
    dom, tr, pos = _ring_trace(beta_c)
    labels, ncomp, ghost = decomposition.partition(tr.graph, tr.occupied,
                                                   wired=False)
    rng = np.random.default_rng(0)
    signs = rng.choice(np.array([-1, 1], dtype=np.int8), size=ncomp)
    dec = decomposition.decompose((tr, signs), dom)
    field = decomposition.reconstruct(dec)
    assert np.array_equal(field, signs[labels])
    with pytest.raises(SignCountMismatch):
        decomposition.decompose((tr, signs[:-1]), dom)


def test_measure_pairing_and_partial_sums(d4, beta_c):
    cs = coupling.sample_master_coupling(d4, beta_c, 29)
    dec = decomposition.decompose(cs, d4)
    one = lattice.TestFunction(lambda z: 1.0, 1.0)
    # constant test function: pairing counts interior vertices
    total_pairs = sum(dec.measure_pairing(k, one)
                      for k in range(len(dec.clusters)))
    expected = dec.delta ** (-0.25) * d4.n_interior * dec.delta ** 2
    assert math.isclose(total_pairs, expected, rel_tol=1e-12)
    # the full signed sum is ordering-invariant
    f = lattice.TestFunction(lambda z: z.real - 0.3 * z.imag, 1.3)
    s_diam = decomposition.partial_sums(dec, f, "diameter")
    s_rand = decomposition.partial_sums(dec, f, "random:5")
    perm = np.random.default_rng(9).permutation(len(dec.clusters))
    s_perm = decomposition.partial_sums(dec, f, perm)
    assert math.isclose(s_diam[-1], s_rand[-1], rel_tol=1e-10)
    assert math.isclose(s_diam[-1], s_perm[-1], rel_tol=1e-10)
    assert len(decomposition.partial_sums(dec, f, "diameter", n_max=3)) == 3


def test_partial_sums_rejects_non_geometric_orderings(d4, beta_c):
    cs = coupling.sample_master_coupling(d4, beta_c, 31)
    dec = decomposition.decompose(cs, d4)
    f = lattice.TestFunction(lambda z: 1.0, 1.0)
    with pytest.raises(ContractViolation):
        decomposition.partial_sums(dec, f, "by-sign")
    with pytest.raises(ContractViolation):
        decomposition.partial_sums(dec, f, [0, 0, 1])


def test_reconstruct_detects_overlap(d4, beta_c):
    cs = coupling.sample_master_coupling(d4, beta_c, 37)
    dec = decomposition.decompose(cs, d4)
    dec.clusters[1].vertices = np.concatenate(
        [dec.clusters[1].vertices, dec.clusters[0].vertices[:1]])
    with pytest.raises(OverlappingSupports):
        decomposition.reconstruct(dec)


def test_census_matches_cluster_diameters(d4, beta_c):
    cs = coupling.sample_master_coupling(d4, beta_c, 41)
    dec = decomposition.decompose(cs, d4)
    rhos = [0.05, 0.2, 0.5, 0.9, 1.5]
    c1 = decomposition.diameter_census(dec, rhos)
    labels, ncomp, ghost = decomposition.partition(
        cs.primal_trace.graph, cs.primal_trace.occupied, wired=True)
    c2 = decomposition.census_from_partition(labels, d4.verts, d4.delta,
                                             rhos)
    assert np.array_equal(c1, c2)


def test_verify_switching_quick(d3, beta_c):
    g, keep = d3.interior_graph()
    A = [int(keep[0]), int(keep[4])]
    rep = decomposition.verify_switching(d3, A, beta_c, 20_000, 6)
    assert rep["pass"]
    rep1 = decomposition.verify_switching(d3, [int(keep[4])], beta_c,
                                          20_000, 7)
    assert rep1["pass"]
