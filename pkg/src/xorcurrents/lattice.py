"""Discretized planar domains on the square lattice and their weak duals.

A domain at mesh ``delta`` is the induced subgraph of ``delta * Z^2`` whose
vertices correspond to dual faces (the ``delta``-squares centred at lattice
points) intersecting the shape.  Vertices whose square is not contained in
the shape form the boundary.  Faces of the domain graph (unit lattice
squares with all four corners present) are the vertices of the weak dual;
the unbounded face is represented by the sentinel index ``OUTER``.

Coordinates are stored as integer pairs plus ``delta`` so that the graph
construction is exact.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateDomain, InvalidParameter, ShapeMismatch

OUTER = -1


@dataclass(frozen=True)
class TestFunction:
    """A bounded real test function on the plane.

    ``bound`` is a sup-norm estimate; evaluation must be deterministic.
    """

    evaluator: Callable[[complex], float]
    bound: float
    name: str = "f"

    def __call__(self, z: complex) -> float:
        return float(self.evaluator(z))


@dataclass(frozen=True)
class PlanarGraph:
    """Minimal planar-graph view used by the current samplers.

    ``edge_faces[e]`` holds the two face indices separated by edge ``e``
    (``OUTER`` for the unbounded face).  ``boundary`` marks wired-identified
    vertices; it is all-False for free graphs.
    """

    n_vertices: int
    edges: np.ndarray          # (E, 2) int32 vertex indices
    edge_faces: np.ndarray     # (E, 2) int32 face indices, OUTER allowed
    n_faces: int
    boundary: np.ndarray       # (n_vertices,) bool

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def boundary_edge_mask(self) -> np.ndarray:
        """Edges with both endpoints on the wired boundary."""
        b = self.boundary
        return b[self.edges[:, 0]] & b[self.edges[:, 1]]


class DiscreteDomain:
    """Discrete approximation of a planar shape at mesh ``delta``."""

    def __init__(self, shape_tag, delta, verts, is_boundary, edges,
                 edge_faces, faces):
        self.shape_tag = shape_tag
        self.delta = float(delta)
        self.verts = verts                    # (N, 2) int
        self.is_boundary = is_boundary        # (N,) bool
        self.edges = edges                    # (E, 2) int32
        self.edge_faces = edge_faces          # (E, 2) int32, OUTER allowed
        self.faces = faces                    # (F, 2) int, face corner (i, j)
        self.vindex = {(int(i), int(j)): k for k, (i, j) in enumerate(verts)}
        self.findex = {(int(i), int(j)): k for k, (i, j) in enumerate(faces)}
        # dual edges: one per primal edge with both faces in-domain
        in_pair = (edge_faces[:, 0] != OUTER) & (edge_faces[:, 1] != OUTER)
        self.dual_edge_of_primal = np.where(in_pair)[0].astype(np.int32)
        self.dual_edges = edge_faces[in_pair]
        self.primal_of_dual_edge = self.dual_edge_of_primal

    # -- basic counts -----------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.verts)

    @property
    def n_interior(self) -> int:
        return int((~self.is_boundary).sum())

    @property
    def n_boundary(self) -> int:
        return int(self.is_boundary.sum())

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def face_area(self) -> float:
        return self.delta ** 2

    def vertex_center(self, k: int) -> complex:
        i, j = self.verts[k]
        return complex(i * self.delta, j * self.delta)

    def vertex_centers(self) -> np.ndarray:
        return self.verts * self.delta

    def face_center(self, k: int) -> complex:
        i, j = self.faces[k]
        return complex((i + 0.5) * self.delta, (j + 0.5) * self.delta)

    def face_centers(self) -> np.ndarray:
        return (self.faces + 0.5) * self.delta

    # -- graph views ------------------------------------------------------
    def full_graph(self) -> PlanarGraph:
        """The domain graph with its wired-identifiable boundary."""
        return PlanarGraph(self.n_vertices, self.edges, self.edge_faces,
                           self.n_faces, self.is_boundary)

    def interior_graph(self):
        """Induced subgraph on interior vertices (free boundary conditions).

        Returns ``(graph, vertex_map)`` where ``vertex_map[k]`` is the index
        in the full domain of interior vertex ``k``.
        """
        keep = np.where(~self.is_boundary)[0]
        remap = -np.ones(self.n_vertices, dtype=np.int64)
        remap[keep] = np.arange(len(keep))
        emask = (~self.is_boundary[self.edges[:, 0]]) & \
                (~self.is_boundary[self.edges[:, 1]])
        edges = remap[self.edges[emask]].astype(np.int32)
        # faces of the interior subgraph: lattice faces with all 4 corners
        # interior; everything else merges into the unbounded face
        interior_set = {tuple(v) for v in self.verts[keep]}
        fkeep, fmap = [], {}
        for fi, (i, j) in enumerate(self.faces):
            corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
            if all(c in interior_set for c in corners):
                fmap[fi] = len(fkeep)
                fkeep.append(fi)
        ef = self.edge_faces[emask]
        edge_faces = np.array(
            [[fmap.get(int(a), OUTER), fmap.get(int(b), OUTER)]
             for a, b in ef], dtype=np.int32).reshape(-1, 2)
        g = PlanarGraph(len(keep), edges, edge_faces, len(fkeep),
                        np.zeros(len(keep), dtype=bool))
        return g, keep

    # -- serialization ----------------------------------------------------
    def descriptor(self) -> dict:
        return {
            "shape": self.shape_tag,
            "delta": self.delta,
            "n_vertices": self.n_vertices,
            "n_interior": self.n_interior,
            "n_boundary": self.n_boundary,
            "n_edges": int(len(self.edges)),
            "n_faces": self.n_faces,
        }


# -- shape predicates -----------------------------------------------------

def _square_box(shape):
    if shape == "unit_square":
        return 0.0, 0.0, 1.0, 1.0
    if isinstance(shape, tuple) and shape[0] == "rectangle":
        _, w, h = shape
        if w <= 0 or h <= 0:
            raise InvalidParameter("rectangle sides must be positive")
        return 0.0, 0.0, float(w), float(h)
    return None


def _face_flags(shape, cx, cy, half):
    """(intersects, contained) for the closed face centred at (cx, cy).

    Ties at the shape boundary count as intersecting (inclusive rule).
    """
    box = _square_box(shape)
    if box is not None:
        x0, y0, x1, y1 = box
        inter = (cx + half >= x0 and cx - half <= x1 and
                 cy + half >= y0 and cy - half <= y1)
        cont = (cx - half >= x0 and cx + half <= x1 and
                cy - half >= y0 and cy + half <= y1)
        return inter, cont
    if shape == "unit_disk":
        # nearest / farthest point of the square from the origin
        nx = min(max(0.0, cx - half), cx + half) if cx > 0 else \
            max(min(0.0, cx + half), cx - half)
        ny = min(max(0.0, cy - half), cy + half) if cy > 0 else \
            max(min(0.0, cy + half), cy - half)
        near2 = nx * nx + ny * ny
        fx = max(abs(cx - half), abs(cx + half))
        fy = max(abs(cy - half), abs(cy + half))
        far2 = fx * fx + fy * fy
        return near2 <= 1.0, far2 <= 1.0
    raise InvalidParameter(f"unknown shape {shape!r}")


def _shape_range(shape, delta):
    box = _square_box(shape)
    if box is not None:
        x0, y0, x1, y1 = box
    else:
        x0 = y0 = -1.0
        x1 = y1 = 1.0
    lo_i = int(np.floor((x0 - delta) / delta)) - 1
    hi_i = int(np.ceil((x1 + delta) / delta)) + 1
    lo_j = int(np.floor((y0 - delta) / delta)) - 1
    hi_j = int(np.ceil((y1 + delta) / delta)) + 1
    return lo_i, hi_i, lo_j, hi_j


def build_domain(shape, mesh: float) -> DiscreteDomain:
    """Build the discrete approximation of ``shape`` at mesh ``mesh``.

    ``shape`` is ``"unit_square"``, ``"unit_disk"`` or
    ``("rectangle", w, h)``.  Raises ``DegenerateDomain`` when no interior
    vertex exists.
    """
    delta = float(mesh)
    if not 0 < delta <= 1:
        raise InvalidParameter("mesh must satisfy 0 < delta <= 1")
    half = delta / 2.0
    lo_i, hi_i, lo_j, hi_j = _shape_range(shape, delta)

    verts, bnd = [], []
    for i in range(lo_i, hi_i + 1):
        for j in range(lo_j, hi_j + 1):
            inter, cont = _face_flags(shape, i * delta, j * delta, half)
            if inter:
                verts.append((i, j))
                bnd.append(not cont)
    if not verts:
        raise DegenerateDomain("no dual face intersects the shape")
    verts = np.array(sorted(verts), dtype=np.int64)
    vindex = {(int(i), int(j)): k for k, (i, j) in enumerate(verts)}
    is_boundary = np.zeros(len(verts), dtype=bool)
    for k, (i, j) in enumerate(verts):
        _, cont = _face_flags(shape, i * delta, j * delta, half)
        is_boundary[k] = not cont
    if is_boundary.all():
        raise DegenerateDomain("mesh coarser than the shape: no interior")

    # faces: lattice squares with all four corners present
    faces = []
    vset = set(vindex)
    for (i, j) in vset:
        if ((i + 1, j) in vset and (i, j + 1) in vset
                and (i + 1, j + 1) in vset):
            faces.append((i, j))
    faces = np.array(sorted(faces), dtype=np.int64) if faces else \
        np.zeros((0, 2), dtype=np.int64)
    findex = {(int(i), int(j)): k for k, (i, j) in enumerate(faces)}

    # edges with the faces they cross
    edges, edge_faces = [], []
    for (i, j), k in vindex.items():
        k2 = vindex.get((i + 1, j))
        if k2 is not None:  # horizontal edge: faces below / above
            edges.append((k, k2))
            edge_faces.append((findex.get((i, j - 1), OUTER),
                               findex.get((i, j), OUTER)))
        k2 = vindex.get((i, j + 1))
        if k2 is not None:  # vertical edge: faces left / right
            edges.append((k, k2))
            edge_faces.append((findex.get((i - 1, j), OUTER),
                               findex.get((i, j), OUTER)))
    edges = np.array(edges, dtype=np.int32)
    edge_faces = np.array(edge_faces, dtype=np.int32)

    return DiscreteDomain(shape if isinstance(shape, str) else
                          f"rectangle({shape[1]}x{shape[2]})",
                          delta, verts, is_boundary, edges, edge_faces, faces)


def square_domain(n_interior: int) -> DiscreteDomain:
    """Unit square discretized so the interior is ``n x n`` vertices."""
    return build_domain("unit_square", 1.0 / (n_interior + 1))


def pair_field(field, f: TestFunction, dom: DiscreteDomain) -> float:
    """Pair a vertex field against a test function.

    Returns ``delta^{-1/4} * sum_v field(v) f(center(v)) delta^2`` over
    interior vertices, the renormalized spin-field pairing.
    """
    field = np.asarray(field, dtype=float)
    if field.shape[0] != dom.n_vertices:
        raise ShapeMismatch("field must be indexed by domain vertices")
    interior = ~dom.is_boundary
    centers = dom.vertex_centers()[interior]
    fv = np.array([f(complex(x, y)) for x, y in centers])
    return float(dom.delta ** (-0.25) *
                 np.sum(field[interior] * fv) * dom.face_area)
