import math

import numpy as np
import pytest

from xorcurrents import lattice
from xorcurrents.errors import DegenerateDomain, InvalidParameter


def test_unit_square_counts():
    dom = lattice.build_domain("unit_square", 1.0 / 8)
    assert dom.n_vertices == 81
    assert dom.n_interior == 49
    assert dom.n_boundary == 32
    assert dom.n_faces == 64
    assert len(dom.edges) == 144


def test_degenerate_mesh_rejected():
    with pytest.raises(DegenerateDomain):
        lattice.build_domain("unit_square", 1.0)
    with pytest.raises(InvalidParameter):
        lattice.build_domain("unit_square", 0.0)
    with pytest.raises(InvalidParameter):
        lattice.build_domain("no_such_shape", 0.25)


def test_unit_disk_counts():
    dom = lattice.build_domain("unit_disk", 1.0 / 8)
    assert dom.n_vertices == 241
    assert dom.n_interior == 177


def test_edge_face_structure():
    dom = lattice.square_domain(3)
    # each in-domain face is referenced by exactly 4 edges
    counts = np.zeros(dom.n_faces, dtype=int)
    for a, b in dom.edge_faces:
        for f in (a, b):
            if f != lattice.OUTER:
                counts[f] += 1
    assert (counts == 4).all()
    # a dual edge exists exactly when both sides are in-domain faces
    in_pair = (dom.edge_faces[:, 0] != lattice.OUTER) \
        & (dom.edge_faces[:, 1] != lattice.OUTER)
    assert len(dom.dual_edges) == in_pair.sum()


def test_graph_views():
    dom = lattice.square_domain(3)
    g = dom.full_graph()
    assert g.n_vertices == dom.n_vertices
    assert g.boundary_edge_mask().sum() > 0
    gi, keep = dom.interior_graph()
    assert gi.n_vertices == dom.n_interior
    assert not gi.boundary.any()
    assert len(keep) == dom.n_interior
    assert not dom.is_boundary[keep].any()


def test_vertex_indexing_roundtrip():
    dom = lattice.square_domain(4)
    for k in range(0, dom.n_vertices, 7):
        i, j = dom.verts[k]
        assert dom.vindex[(int(i), int(j))] == k
        z = dom.vertex_center(k)
        assert z == complex(i * dom.delta, j * dom.delta)


def test_pair_field_scaling():
    dom = lattice.square_domain(7)
    f = lattice.TestFunction(lambda z: 1.0, 1.0)
    field = np.ones(dom.n_vertices)
    val = lattice.pair_field(field, f, dom)
    expected = dom.delta ** (-0.25) * dom.n_interior * dom.delta ** 2
    assert math.isclose(val, expected, rel_tol=1e-12)


def test_test_function_evaluates():
    f = lattice.TestFunction(lambda z: z.real + 2 * z.imag, 3.0, name="lin")
    assert f(1 + 1j) == 3.0
    assert f.bound == 3.0
