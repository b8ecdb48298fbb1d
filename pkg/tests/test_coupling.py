import json
import math

import numpy as np
import pytest

from xorcurrents import coupling, currents, ising, lattice
from xorcurrents.errors import ParityInconsistency


def test_master_coupling_invariants(d3, beta_c):
    cs = coupling.sample_master_coupling(d3, beta_c, 123)
    # spins are +-1, boundary cluster is plus
    assert set(np.unique(cs.tau)) <= {-1, 1}
    assert (cs.tau[d3.is_boundary] == 1).all()
    # non-crossing: odd primal edges never separate opposite dual spins
    # and odd dual edges never separate opposite primal spins
    currents.verify_sourceless(cs.primal_trace)
    # heights: even integers (as 2h) on vertices, odd on faces, zero bdry
    assert not (cs.h2_vertex % 2).any()
    assert (cs.h2_face % 2 == 1).all()
    assert not cs.h2_vertex[d3.is_boundary].any()
    # cos/sin identities: tau = cos(pi h) on vertices, dual via sin
    assert np.array_equal(cs.tau, (-1) ** ((cs.h2_vertex // 2) % 2))
    assert np.array_equal(cs.tau_dual,
                          (-1) ** (((cs.h2_face - 1) // 2) % 2))


def test_batch_checks_and_height_reconstruction(beta_c):
    d8 = lattice.square_domain(8)
    out = coupling.sample_coupling_batch(d8, beta_c, 5, 300, check=True)
    h2v, h2f = coupling.height_from_spins(out["tau"], out["tau_dual"], d8)
    assert np.array_equal(h2v, out["h2_vertex"])
    assert np.array_equal(h2f, out["h2_face"])
    # flipping the global coin negates the whole height function
    h2v2, h2f2 = coupling.height_from_spins(out["tau"], -out["tau_dual"], d8)
    assert np.array_equal(h2v2, -h2v)
    assert np.array_equal(h2f2, -h2f)


def test_gradient_law_on_every_incidence(d4, beta_c):
    out = coupling.sample_coupling_batch(d4, beta_c, 9, 64, check=True)
    h2v, h2f = out["h2_vertex"], out["h2_face"]
    for k, (i, j) in enumerate(d4.faces):
        for ci, cj in ((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)):
            v = d4.vindex[(int(ci), int(cj))]
            inc = out["tau"][:, v] * out["tau_dual"][:, k]
            assert np.array_equal(h2f[:, k] - h2v[:, v], inc)


def test_face_parity_detects_corruption(d3, beta_c):
    odd, occ = currents.sample_drc_batch(d3, "wired", beta_c, 2, 4)
    g = d3.full_graph()
    active = ~(g.boundary[g.edges[:, 0]] & g.boundary[g.edges[:, 1]])
    bad = odd.copy()
    e = int(np.where(active)[0][0])
    bad[0, e] = ~bad[0, e]  # breaks sourcelessness
    with pytest.raises(ParityInconsistency):
        coupling.face_parity_batch(d3, bad, check=True)


def test_tau_marginal_matches_squared_ising(d3, beta_c):
    out = coupling.sample_coupling_batch(d3, beta_c, 11, 30_000,
                                         check=False, with_height=False)
    g, keep = d3.interior_graph()
    a, b = int(keep[0]), int(keep[-1])
    exact = ising.exact_correlation(d3, [a, b], "plus", beta_c) ** 2
    m = (out["tau"][:, a] * out["tau"][:, b]).astype(float)
    z = (m.mean() - exact) / (m.std(ddof=1) / math.sqrt(len(m)))
    assert abs(z) < 4.5


def test_tau_dual_marginals(d3, beta_c):
    out = coupling.sample_coupling_batch(d3, beta_c, 13, 30_000,
                                         check=False, with_height=False)
    n = out["tau_dual"].shape[0]
    # one-point: the global coin forces mean zero
    z1 = abs(out["tau_dual"].astype(float).mean(axis=0)).max() * math.sqrt(n)
    assert z1 < 4.5
    # two-point: squared free correlation on the weak dual
    fa, fb = 0, d3.n_faces - 1
    bonds = [(int(u), int(v)) for u, v in d3.dual_edges]
    exact = ising.exact_graph_correlation(
        d3.n_faces, bonds, [ising.dual_beta(beta_c)] * len(bonds),
        [fa, fb]) ** 2
    m = (out["tau_dual"][:, fa] * out["tau_dual"][:, fb]).astype(float)
    z = (m.mean() - exact) / (m.std(ddof=1) / math.sqrt(n))
    assert abs(z) < 4.5


def test_sample_to_json_roundtrip(d3, beta_c):
    cs = coupling.sample_master_coupling(d3, beta_c, 42)
    doc = json.loads(cs.to_json())
    assert doc["seed"] == 42
    assert doc["beta"] == beta_c
    assert len(doc["tau"]) == d3.n_vertices
    cs2 = coupling.sample_master_coupling(d3, beta_c, 42)
    assert cs2.to_json() == cs.to_json()  # determinism


def test_parity_labels_consistent(d4, beta_c):
    from xorcurrents import decomposition
    cs = coupling.sample_master_coupling(d4, beta_c, 8)
    tr = cs.primal_trace
    for cl in decomposition.clusters(tr, d4):
        # path-independence is asserted internally for every cluster
        labs = coupling.parity_labels(tr, cl, d4, check_paths=True)
        assert all(v in (-1, 1) for v in labs)


def test_bosonisation_quick(d3, beta_c):
    g, keep = d3.interior_graph()
    rep = coupling.verify_bosonisation(d3, [int(keep[4])], [], 30_000, 3)
    assert rep["pass"]
    assert rep["rhs_exact"] > 0.5  # squared one-point is large on 3x3
    rep2 = coupling.verify_bosonisation(d3, [], [0, 1], 30_000, 4)
    assert rep2["pass"]
    assert rep2["rhs_exact"] > 0.1


def test_height_batch_vertex_selection(d3, beta_c):
    g, keep = d3.interior_graph()
    vs = [int(keep[0]), int(keep[4])]
    hv = coupling.sample_height_batch(d3, beta_c, 21, 100, vertices=vs)
    assert hv.shape == (100, 2)
    assert not (hv % 2).any()
