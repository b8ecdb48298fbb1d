"""Closed-form continuum evaluators on the unit disk.

Green's function ``G(z, w) = log|1 - z conj(w)| - log|z - w|``, conformal
radius ``CR(w) = 1 - |w|^2``, Poisson kernel ``P(z, zeta) = (1 - |z|^2) /
|z - zeta|^2``, hyperbolic distance ``d(z, w) = 2 atanh(|z - w| /
|1 - z conj(w)|)`` and the Busemann function ``B_zeta = -log P``.  These
satisfy ``tanh(d/2) = exp(-G)`` and ``B_zeta(z) - B_zeta(w) =
-log(P(z,zeta)/P(w,zeta))``.

The trigonometric-chaos two-point kernels are

    K_cos(z, w) = CR(z)^{-a^2/2} CR(w)^{-a^2/2} cosh(a^2 G(z, w))
    K_sin(z, w) = CR(z)^{-a^2/2} CR(w)^{-a^2/2} sinh(a^2 G(z, w))

with the truncated (connected) phase-``u`` cos variant
``CRfac * (sinh(a^2 G) - cos(u)^2 (1 - exp(-a^2 G)))``; the inequality
suite checks sin <= cos, truncated <= sin (any phase) as exact pointwise
statements, and the hyperbolic-metric inequality
``tanh(d/2)^{2 a^2} >= tanh^2((B_zeta(z) - B_zeta(w)) / 2)`` for a <= 1.

Only the disk and its Mobius images are supported; disk automorphisms are
provided for the invariance checks (G invariant, kernels covariant with
the derivative factors).
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DiagonalSingularity, InvalidParameter, OutOfDomain

_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class CriticalParameters:
    """The critical coupling lambda and the a <-> alpha correspondence."""

    lam: float = math.pi / 2.0

    def a_c(self, alpha: float) -> float:
        if alpha <= 0:
            raise InvalidParameter("alpha must be positive")
        return self.lam / alpha

    def alpha_c(self, a: float) -> float:
        if a <= 0:
            raise InvalidParameter("a must be positive")
        return self.lam / a


def _check_interior(z) -> complex:
    z = complex(z)
    if abs(z) >= 1.0:
        raise OutOfDomain(f"{z} is not in the open unit disk")
    return z


def _check_boundary(zeta) -> complex:
    zeta = complex(zeta)
    if abs(abs(zeta) - 1.0) > 1e-9:
        raise OutOfDomain(f"{zeta} is not on the unit circle")
    return zeta / abs(zeta)


def green_disk(z, w) -> float:
    """Dirichlet Green's function of the unit disk (+inf on the diagonal)."""
    z, w = _check_interior(z), _check_interior(w)
    if z == w:
        return math.inf
    return math.log(abs(1.0 - z * w.conjugate())) - math.log(abs(z - w))


def conformal_radius_disk(w) -> float:
    """Conformal radius of the disk seen from ``w``: ``1 - |w|^2``."""
    w = _check_interior(w)
    return 1.0 - abs(w) ** 2


def poisson_disk(z, zeta) -> float:
    """Poisson kernel ``(1 - |z|^2) / |z - zeta|^2``; ``P(0, .) = 1``."""
    z, zeta = _check_interior(z), _check_boundary(zeta)
    return (1.0 - abs(z) ** 2) / abs(z - zeta) ** 2


def hyperbolic_distance(z, w) -> float:
    """Poincare distance; satisfies ``tanh(d/2) = exp(-G)``."""
    z, w = _check_interior(z), _check_interior(w)
    return 2.0 * math.atanh(abs(z - w) / abs(1.0 - z * w.conjugate()))


def busemann_disk(z, zeta) -> float:
    """Busemann function of the boundary point ``zeta``: ``-log P``."""
    return -math.log(poisson_disk(z, zeta))


@dataclass(frozen=True)
class DiskAutomorphism:
    """``z -> e^{i theta} (z - a) / (1 - conj(a) z)`` with ``|a| < 1``."""

    a: complex = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if abs(complex(self.a)) >= 1.0:
            raise InvalidParameter("automorphism center must be interior")

    def __call__(self, z) -> complex:
        z = complex(z)
        return cmath.exp(1j * self.theta) * (z - self.a) / \
            (1.0 - self.a.conjugate() * z)

    def deriv(self, z) -> complex:
        z = complex(z)
        return cmath.exp(1j * self.theta) * (1.0 - abs(self.a) ** 2) / \
            (1.0 - self.a.conjugate() * z) ** 2

    def inverse(self, w) -> complex:
        w = complex(w) * cmath.exp(-1j * self.theta)
        return (w + self.a) / (1.0 + self.a.conjugate() * w)


@dataclass(frozen=True)
class GreensOracle:
    """Green-type evaluators for the disk or a Mobius image of it.

    With ``auto`` set, points are pushed through the automorphism before
    evaluation; ``G`` is then invariant while ``CR`` carries the
    derivative factor, so full kernels are covariant.
    """

    auto: DiskAutomorphism = None

    def _map(self, z):
        return self.auto(z) if self.auto is not None else complex(z)

    def green(self, z, w) -> float:
        return green_disk(self._map(z), self._map(w))

    def cr(self, z) -> float:
        c = conformal_radius_disk(self._map(z))
        if self.auto is not None:
            c /= abs(self.auto.deriv(z))
        return c

    def poisson(self, z, zeta) -> float:
        if self.auto is not None:
            zeta = self.auto(complex(zeta))
            zeta /= abs(zeta)
        return poisson_disk(self._map(z), zeta)

    def dist(self, z, w) -> float:
        return hyperbolic_distance(self._map(z), self._map(w))

    def busemann(self, z, zeta) -> float:
        return -math.log(self.poisson(z, zeta))


def kernel_two_point(z, w, alpha, mode, u=0.0, oracle=None) -> float:
    """Chaos two-point kernel: ``cos``, ``sin`` or ``truncated-cos``.

    ``truncated-cos`` is the connected phase-``u`` variant; ``u`` is
    ignored by the other modes.
    """
    if not 0.0 < alpha < math.sqrt(2.0):
        raise InvalidParameter("alpha must lie in (0, sqrt(2))")
    oracle = oracle or GreensOracle()
    if oracle._map(z) == oracle._map(w):
        raise DiagonalSingularity("kernel requires distinct points")
    a2 = alpha * alpha
    g = oracle.green(z, w)
    crfac = (oracle.cr(z) * oracle.cr(w)) ** (-a2 / 2.0)
    if mode == "cos":
        return crfac * math.cosh(a2 * g)
    if mode == "sin":
        return crfac * math.sinh(a2 * g)
    if mode == "truncated-cos":
        cu2 = math.cos(u) ** 2
        return crfac * (math.sinh(a2 * g)
                        - cu2 * (1.0 - math.exp(-a2 * g)))
    raise InvalidParameter(f"unknown kernel mode {mode!r}")


def _random_disk_points(rng, n, rmax=0.995):
    r = rmax * np.sqrt(rng.random(n))
    th = 2 * np.pi * rng.random(n)
    return r * np.exp(1j * th)


def check_inequalities(n_pairs, alpha_grid, u_grid, seed) -> dict:
    """Exhaustive closed-form kernel inequality sweep on random pairs.

    (i) sin <= cos, (ii) truncated-cos at u = 0 <= sin, (iii) the same at
    every phase in ``u_grid``.  Returns the maximum signed violation
    (positive = violated) and its witness.
    """
    rng = np.random.default_rng(seed)
    za = _random_disk_points(rng, n_pairs)
    zb = _random_disk_points(rng, n_pairs)
    worst = (-math.inf, None)
    checked = 0
    for z, w in zip(za, zb):
        if z == w:
            continue
        for alpha in alpha_grid:
            cc = kernel_two_point(z, w, alpha, "cos")
            ss = kernel_two_point(z, w, alpha, "sin")
            margins = [("sin<=cos", ss - cc)]
            for u in [0.0] + list(u_grid):
                tr = kernel_two_point(z, w, alpha, "truncated-cos", u=u)
                margins.append((f"trunc(u={u:.3f})<=sin", tr - ss))
            for tag, v in margins:
                checked += 1
                if v > worst[0]:
                    worst = (v, (tag, complex(z), complex(w), float(alpha)))
    return {"max_violation": worst[0], "at": worst[1],
            "n_checked": checked, "violations": int(worst[0] > 1e-12),
            "seed": int(seed)}


def hyperbolic_inequality(z, w, zeta, alpha) -> dict:
    """Hyperbolic-metric bound on the Busemann increment.

    ``tanh(d(z,w)/2)^{2 alpha^2} >= tanh^2((B_zeta(z) - B_zeta(w))/2)``,
    guaranteed for ``alpha <= 1`` (the Busemann increment is 1-Lipschitz
    for the hyperbolic metric and ``tanh(d/2) <= 1``).
    """
    z, w = _check_interior(z), _check_interior(w)
    zeta = _check_boundary(zeta)
    if z == w:
        return {"lhs": 0.0 if alpha > 0 else 1.0, "rhs": 0.0, "holds": True}
    d = hyperbolic_distance(z, w)
    db = busemann_disk(z, zeta) - busemann_disk(w, zeta)
    lhs = math.tanh(d / 2.0) ** (2.0 * alpha * alpha)
    rhs = math.tanh(db / 2.0) ** 2
    return {"lhs": lhs, "rhs": rhs, "holds": bool(lhs >= rhs - _EDGE_TOL)}


def check_hyperbolic(n_triples, alpha_grid, seed) -> dict:
    """Random sweep of the hyperbolic inequality; counts violations.

    For alphas above 1 the margin is only recorded (no assertion).
    """
    rng = np.random.default_rng(seed)
    za = _random_disk_points(rng, n_triples)
    zb = _random_disk_points(rng, n_triples)
    zc = np.exp(2j * np.pi * rng.random(n_triples))
    violations = 0
    min_margin = math.inf
    worst = None
    for z, w, zeta in zip(za, zb, zc):
        if z == w:
            continue
        for alpha in alpha_grid:
            r = hyperbolic_inequality(z, w, zeta, alpha)
            margin = r["lhs"] - r["rhs"]
            if alpha <= 1.0 and not r["holds"]:
                violations += 1
            if margin < min_margin:
                min_margin = margin
                worst = (complex(z), complex(w), complex(zeta), float(alpha))
    return {"violations": violations, "min_margin": min_margin,
            "at": worst, "n_triples": int(n_triples), "seed": int(seed)}
