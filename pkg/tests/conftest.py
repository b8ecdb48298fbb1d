import numpy as np
import pytest

from xorcurrents import ising, lattice


@pytest.fixture(scope="session")
def beta_c():
    return ising.critical_beta()


@pytest.fixture(scope="session")
def d2():
    return lattice.square_domain(2)


@pytest.fixture(scope="session")
def d3():
    return lattice.square_domain(3)


@pytest.fixture(scope="session")
def d4():
    return lattice.square_domain(4)


@pytest.fixture(scope="session")
def triangle_graph():
    """Smallest planar fixture: a single triangular face."""
    edges = np.array([[0, 1], [1, 2], [0, 2]], dtype=np.int32)
    edge_faces = np.array([[0, lattice.OUTER]] * 3, dtype=np.int32)
    return lattice.PlanarGraph(
        n_vertices=3, edges=edges, edge_faces=edge_faces, n_faces=1,
        boundary=np.zeros(3, dtype=bool))
