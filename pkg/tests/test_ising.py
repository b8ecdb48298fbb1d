import math

import numpy as np
import pytest

from xorcurrents import ising, lattice
from xorcurrents.errors import (InvalidParameter, InvalidVertex,
                                OracleCapacityExceeded, ShapeMismatch)

# frozen oracle fixtures, each independently cross-checked below
PAIR_2X2_FREE_B06 = 0.6388060025401029      # adjacent interior pair
CENTER_3X3_PLUS_CRIT = 0.8858375057452231   # center one-point
PAIR_4X4_FREE_CRIT = 0.11019319025897108    # opposite interior corners


def test_critical_beta_closed_form():
    assert math.isclose(ising.critical_beta(),
                        0.5 * math.log(1.0 + math.sqrt(2.0)), rel_tol=1e-15)


def test_dual_beta_involution(beta_c):
    for b in (0.2, 0.55, 1.3):
        assert math.isclose(ising.dual_beta(ising.dual_beta(b)), b,
                            rel_tol=1e-12)
    assert math.isclose(ising.dual_beta(beta_c), beta_c, rel_tol=1e-12)
    with pytest.raises(InvalidParameter):
        ising.dual_beta(0.0)


def test_exact_correlation_fixtures(d3, beta_c):
    d2 = lattice.square_domain(2)
    g, keep = d2.interior_graph()
    a, b = int(keep[0]), int(keep[1])
    assert math.isclose(ising.exact_correlation(d2, [a, b], "free", 0.6),
                        PAIR_2X2_FREE_B06, rel_tol=1e-12)
    # independent oracle: direct enumeration of the interior graph
    bonds = [(int(u), int(v)) for u, v in g.edges]
    assert math.isclose(
        ising.exact_graph_correlation(g.n_vertices, bonds,
                                      [0.6] * len(bonds), [0, 1]),
        PAIR_2X2_FREE_B06, rel_tol=1e-12)
    gi, keep3 = d3.interior_graph()
    center = int(keep3[4])
    assert math.isclose(
        ising.exact_correlation(d3, [center], "plus", beta_c),
        CENTER_3X3_PLUS_CRIT, rel_tol=1e-12)


def test_transfer_matrix_matches_enumeration(d4, beta_c):
    g, keep = d4.interior_graph()
    A = [int(keep[0]), int(keep[-1])]
    val = ising.exact_correlation(d4, A, "free", beta_c)
    assert math.isclose(val, PAIR_4X4_FREE_CRIT, rel_tol=1e-10)
    # independent oracle: bit-sliced enumeration of the same 16-spin model
    bonds = [(int(u), int(v)) for u, v in g.edges]
    ref = ising.exact_graph_correlation(g.n_vertices, bonds,
                                        [beta_c] * len(bonds),
                                        [0, g.n_vertices - 1])
    assert math.isclose(val, ref, rel_tol=1e-10)


def test_boundary_vertex_conventions(d3, beta_c):
    bv = int(np.where(d3.is_boundary)[0][0])
    assert ising.exact_correlation(d3, [bv], "plus", beta_c) == 1.0
    with pytest.raises(InvalidVertex):
        ising.exact_correlation(d3, [bv], "free", beta_c)


def test_disorder_equals_weak_dual_free_correlation(d3, beta_c):
    """Flipping couplings along a dual path = dual free-spin correlation."""
    from xorcurrents.coupling import _pair_disorder_edges
    fa, fb = 0, d3.n_faces - 1
    gamma = _pair_disorder_edges(d3, [fa, fb])
    lhs = ising.exact_disorder_correlation(d3, [fa, fb], gamma, beta_c)
    bonds = [(int(u), int(v)) for u, v in d3.dual_edges]
    rhs = ising.exact_graph_correlation(
        d3.n_faces, bonds, [ising.dual_beta(beta_c)] * len(bonds), [fa, fb])
    assert math.isclose(lhs, rhs, rel_tol=1e-10)


def test_graph_correlation_hand_value():
    # single bond: <s0 s1> = tanh(J)
    val = ising.exact_graph_correlation(2, [(0, 1)], [0.7], [0, 1])
    assert math.isclose(val, math.tanh(0.7), rel_tol=1e-12)


def test_sampler_unbiased_small_graphs(beta_c):
    # triangle graph against the exact enumeration
    bonds = [(0, 1), (1, 2), (0, 2)]
    s = ising.GraphSampler(3, bonds, 0.5)
    out = s.run(3, 30_000)
    prod = (out[:, 0] * out[:, 1]).astype(float)
    exact = ising.exact_graph_correlation(3, bonds, [0.5] * 3, [0, 1])
    z = (prod.mean() - exact) / (prod.std(ddof=1) / math.sqrt(len(prod)))
    assert abs(z) < 4.5


def test_domain_sampler_unbiased(d3, beta_c):
    g, keep = d3.interior_graph()
    center_pos = 4  # row-major interior position of the center
    batch = ising.sample_ising_batch(d3, "plus", beta_c, 7, 30_000)
    m = batch[:, center_pos].astype(float)
    z = (m.mean() - CENTER_3X3_PLUS_CRIT) \
        / (m.std(ddof=1) / math.sqrt(len(m)))
    assert abs(z) < 4.5


def test_stream_matches_run_shapes(d3, beta_c):
    sampler, _ = ising._domain_sampler(d3, "plus", beta_c)
    chunks = list(sampler.run_stream(5, 250, chunk=100))
    assert [c.shape[0] for c in chunks] == [100, 100, 50]
    assert all(set(np.unique(c)) <= {-1, 1} for c in chunks)


def test_xor_field_shape_check(d3, beta_c):
    s1 = ising.sample_ising(d3, "plus", beta_c, 1, warmup_sweeps=50)
    s2 = ising.sample_ising(d3, "plus", beta_c, 2, warmup_sweeps=50)
    tau = ising.xor_field(s1, s2)
    assert set(np.unique(tau)) <= {-1, 1}
    d4 = lattice.square_domain(4)
    s3 = ising.sample_ising(d4, "plus", beta_c, 3, warmup_sweeps=50)
    with pytest.raises(ShapeMismatch):
        ising.xor_field(s1, s3)


def test_enumeration_capacity():
    with pytest.raises(OracleCapacityExceeded):
        ising.exact_graph_correlation(
            26, [(i, i + 1) for i in range(25)], [0.4] * 25, [0, 25])
