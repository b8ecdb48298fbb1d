"""Sample one master coupling and walk through its coupled layers.

The sample ties together a wired double random current, independent
cluster signs, the dual spin field, a dual current, and the integer
height function; every identity between the layers is deterministic and
asserted during sampling.
"""

import numpy as np

from xorcurrents import coupling, ising, lattice

dom = lattice.square_domain(8)
beta = ising.critical_beta()
cs = coupling.sample_master_coupling(dom, beta, seed=7)

print(f"domain: {dom.n_vertices} vertices, {dom.n_faces} faces, "
      f"delta = {dom.delta:.4f}")
print(f"primal trace: {int(cs.primal_trace.occupied.sum())} occupied edges, "
      f"{int(cs.primal_trace.odd.sum())} odd")
print(f"dual trace:   {int(cs.dual_trace.occupied.sum())} occupied edges, "
      f"{int(cs.dual_trace.odd.sum())} odd")
print(f"global coin epsilon = {cs.epsilon:+d}")

# the spin fields are trigonometric functions of the height
h2v, h2f = cs.h2_vertex, cs.h2_face
assert np.array_equal(cs.tau, (-1) ** ((h2v // 2) % 2))
assert np.array_equal(cs.tau_dual, (-1) ** (((h2f - 1) // 2) % 2))
print("tau == cos(pi h) on vertices, tau_dual == sin(pi h) on faces: ok")

# height statistics: zero on the boundary cluster, excursions inside
print(f"height range: [{h2v.min() / 2:.1f}, {h2v.max() / 2:.1f}] "
      f"on vertices, [{h2f.min() / 2:.1f}, {h2f.max() / 2:.1f}] on faces")
levels, counts = np.unique(h2v // 2, return_counts=True)
for lev, cnt in zip(levels, counts):
    print(f"  h = {lev:+d}: {cnt} vertices")

# a grid picture of the vertex heights (one row per lattice row)
side = int(round(1.0 / dom.delta)) + 1
grid = np.full((side, side), ".", dtype=object)
for k, (i, j) in enumerate(dom.verts):
    grid[j, i] = str(int(h2v[k] // 2)) if h2v[k] >= 0 else "-"
print("\nvertex heights (rows top to bottom):")
for row in grid[::-1]:
    print(" ".join(f"{c}" for c in row))
