"""Monte Carlo workbench for the critical XOR-Ising model.

Samples double random currents and the master coupling (height function,
spins, cluster signs) on discretized planar domains, builds the signed
excursion decomposition, and checks the discrete identities and continuum
formulas (switching lemma, bosonisation, two-point kernels, domain
monotonicity, Hadamard's variational formula) against exact oracles.
"""

from . import lattice, ising, currents, coupling, decomposition
from . import gff, continuum, loewner

__all__ = [
    "lattice", "ising", "currents", "coupling", "decomposition",
    "gff", "continuum", "loewner",
]

__version__ = "0.1.0"
