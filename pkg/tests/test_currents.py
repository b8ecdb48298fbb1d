import math

import numpy as np
import pytest

from xorcurrents import currents, ising, lattice
from xorcurrents.errors import (ContractViolation, InvalidParameter,
                                OracleCapacityExceeded)


def test_edge_weights_closed_form():
    w = currents.edge_weights(0.8)
    assert w.w_zero == 1.0
    assert math.isclose(w.w_odd, math.sinh(0.8), rel_tol=1e-15)
    assert math.isclose(w.w_even_pos, math.cosh(0.8) - 1.0, rel_tol=1e-15)
    with pytest.raises(InvalidParameter):
        currents.edge_weights(0.0)


def test_trace_graph_and_forced_edges(d3):
    gw = currents.trace_graph(d3, "wired")
    gf = currents.trace_graph(d3, "free")
    assert gw.n_vertices == d3.n_vertices
    assert gf.n_vertices == d3.n_interior
    forced = currents.forced_edge_mask(gw, "wired")
    assert forced.sum() == gw.boundary_edge_mask().sum() > 0
    assert not currents.forced_edge_mask(gf, "free").any()
    with pytest.raises(InvalidParameter):
        currents.trace_graph(d3, "periodic")


@pytest.mark.parametrize("bc", ["wired", "free"])
def test_sampled_traces_are_sourceless(d4, beta_c, bc):
    odd, occ = currents.sample_trace_batch(d4, bc, beta_c, 11, 500)
    g = currents.trace_graph(d4, bc)
    for i in range(0, 500, 50):
        currents.verify_sourceless(
            currents.CurrentTrace(occ[i], odd[i], bc, beta_c, g))
    assert not (odd & ~occ).any()
    forced = currents.forced_edge_mask(g, bc)
    if forced.any():
        assert occ[:, forced].all()
        assert not odd[:, forced].any()


def test_drc_trace_sourceless(d3, beta_c):
    tr = currents.sample_drc_trace(d3, "wired", beta_c, 3)
    currents.verify_sourceless(tr)
    bad = currents.CurrentTrace(tr.occupied.copy(), tr.occupied.copy(),
                                "wired", beta_c, tr.graph)
    bad.odd[:] = False
    bad.odd[0] = True
    bad.occupied[0] = False
    with pytest.raises(ContractViolation):
        currents.verify_sourceless(bad)


def test_triangle_odd_distribution(triangle_graph):
    """Only the empty set and the full cycle are sourceless."""
    beta = 0.7
    table = currents.enumerate_odd_distribution(triangle_graph, "free", beta)
    assert set(table) == {0, 0b111}
    t3 = math.tanh(beta) ** 3
    assert math.isclose(table[0b111] / table[0], t3, rel_tol=1e-12)
    assert math.isclose(sum(table.values()), 1.0, rel_tol=1e-12)


def test_joint_marginal_consistency(d2, beta_c):
    joint = currents.enumerate_trace_distribution(d2, "free", beta_c)
    odd_m = {}
    for (o, _), p in joint.items():
        odd_m[o] = odd_m.get(o, 0.0) + p
    direct = currents.enumerate_odd_distribution(d2, "free", beta_c)
    assert set(odd_m) == set(direct)
    for k in direct:
        assert math.isclose(odd_m[k], direct[k], rel_tol=1e-10)


def test_double_enumeration_matches_brute_convolution(triangle_graph):
    beta = 0.9
    single = currents.enumerate_trace_distribution(triangle_graph, "free",
                                                   beta)
    fast = currents.enumerate_trace_distribution(triangle_graph, "free",
                                                 beta, double=True)
    brute = {}
    for (o1, t1), p1 in single.items():
        for (o2, t2), p2 in single.items():
            k = (o1 ^ o2, t1 | t2)
            brute[k] = brute.get(k, 0.0) + p1 * p2
    assert set(fast) == set(brute)
    for k in brute:
        assert math.isclose(fast[k], brute[k], rel_tol=1e-9)


def test_sampler_matches_enumeration_quick(d2, beta_c):
    """Loose TV check; the tight 10^6-sample version is in acceptance."""
    table = currents.enumerate_trace_distribution(d2, "free", beta_c)
    odd, occ = currents.sample_trace_batch(d2, "free", beta_c, 5, 30_000)
    ko, kt = currents.trace_keys(odd, occ)
    emp = {}
    for o, t in zip(ko.tolist(), kt.tolist()):
        emp[(o, t)] = emp.get((o, t), 0) + 1
    n = len(ko)
    tv = 0.5 * sum(abs(emp.get(k, 0) / n - p) for k, p in table.items())
    tv += 0.5 * sum(c / n for k, c in emp.items() if k not in table)
    assert tv < 0.05


def test_trace_keys_roundtrip(d2, beta_c):
    odd, occ = currents.sample_trace_batch(d2, "wired", beta_c, 1, 8)
    ko, kt = currents.trace_keys(odd, occ)
    for i in range(8):
        for e in range(odd.shape[1]):
            assert bool((ko[i] >> e) & 1) == bool(odd[i, e])
            assert bool((kt[i] >> e) & 1) == bool(occ[i, e])


def test_enumeration_capacity_guard(beta_c):
    big = lattice.square_domain(5)
    with pytest.raises(OracleCapacityExceeded):
        currents.enumerate_odd_distribution(big, "free", beta_c)
