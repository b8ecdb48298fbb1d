import math

import numpy as np
import pytest

from xorcurrents import continuum as C
from xorcurrents.errors import (DiagonalSingularity, InvalidParameter,
                                OutOfDomain)


def test_green_disk_fixtures():
    assert math.isclose(C.green_disk(0, 0.5), -math.log(0.5), rel_tol=1e-14)
    assert C.green_disk(0.3, 0.3) == math.inf
    with pytest.raises(OutOfDomain):
        C.green_disk(1.2, 0)
    with pytest.raises(OutOfDomain):
        C.green_disk(0, 1.0)


def test_green_symmetry_and_distance_relation():
    rng = np.random.default_rng(0)
    pts = C._random_disk_points(rng, 40)
    for z, w in zip(pts[::2], pts[1::2]):
        assert math.isclose(C.green_disk(z, w), C.green_disk(w, z),
                            abs_tol=1e-12)
        # tanh(d/2) = exp(-G) links hyperbolic distance and Green
        assert math.isclose(math.tanh(C.hyperbolic_distance(z, w) / 2.0),
                            math.exp(-C.green_disk(z, w)), abs_tol=1e-12)


def test_conformal_radius_near_diagonal():
    # G(z, w) + log|z - w| -> log CR(w) as z -> w
    w = 0.3 + 0.4j
    z = w + 1e-7
    lim = C.green_disk(z, w) + math.log(abs(z - w))
    assert math.isclose(lim, math.log(C.conformal_radius_disk(w)),
                        abs_tol=1e-6)
    assert C.conformal_radius_disk(0) == 1.0


def test_poisson_kernel_values():
    assert C.poisson_disk(0, 1) == 1.0
    assert C.poisson_disk(0, 1j) == 1.0
    # harmonic average over the boundary is 1
    thetas = np.linspace(0, 2 * math.pi, 4096, endpoint=False)
    z = 0.4 - 0.3j
    vals = [C.poisson_disk(z, complex(math.cos(t), math.sin(t)))
            for t in thetas]
    assert math.isclose(float(np.mean(vals)), 1.0, rel_tol=1e-10)
    assert math.isclose(C.busemann_disk(z, 1), -math.log(C.poisson_disk(z, 1)),
                        rel_tol=1e-14)


def test_automorphism_group_and_invariance():
    auto = C.DiskAutomorphism(0.3 - 0.2j, 0.7)
    z = 0.1 + 0.2j
    assert abs(auto.inverse(auto(z)) - z) < 1e-14
    w = -0.4 + 0.1j
    # Green's function and hyperbolic distance are Moebius invariant
    assert math.isclose(C.green_disk(z, w),
                        C.green_disk(auto(z), auto(w)), abs_tol=1e-12)
    assert math.isclose(C.hyperbolic_distance(z, w),
                        C.hyperbolic_distance(auto(z), auto(w)),
                        abs_tol=1e-12)
    # conformal radius transforms by |phi'|
    oracle = C.GreensOracle(auto)
    assert math.isclose(oracle.cr(z),
                        C.conformal_radius_disk(auto(z))
                        / abs(auto.deriv(z)), rel_tol=1e-12)


def test_kernel_two_point_fixture_and_covariance():
    a = 1 / math.sqrt(2)
    v = C.kernel_two_point(0, 0.5, a, "sin")
    expect = (C.conformal_radius_disk(0) * C.conformal_radius_disk(0.5)) \
        ** (-a * a / 2) * math.sinh(a * a * C.green_disk(0, 0.5))
    assert math.isclose(v, expect, rel_tol=1e-12)
    # CR(phi(z)) = |phi'(z)| CR(z) for disk automorphisms, so the
    # derivative-corrected oracle reproduces the disk kernel exactly
    auto = C.DiskAutomorphism(0.25 + 0.1j, -0.4)
    oracle = C.GreensOracle(auto)
    z, w = 0.1 + 0.2j, -0.4 + 0.1j
    for mode in ("cos", "sin"):
        k1 = C.kernel_two_point(z, w, 0.8, mode)
        k2 = C.kernel_two_point(z, w, 0.8, mode, oracle=oracle)
        assert math.isclose(k2, k1, rel_tol=1e-10)
    with pytest.raises(DiagonalSingularity):
        C.kernel_two_point(0.2, 0.2, 0.5, "cos")
    with pytest.raises(InvalidParameter):
        C.kernel_two_point(0, 0.5, 0.5, "tan")


def test_critical_parameters_roundtrip():
    cp = C.CriticalParameters()
    assert cp.lam == math.pi / 2
    assert math.isclose(cp.a_c(1 / math.sqrt(2)), math.pi / math.sqrt(2),
                        rel_tol=1e-14)
    assert math.isclose(cp.alpha_c(cp.a_c(0.77)), 0.77, rel_tol=1e-13)


def test_kernel_inequalities_sweep():
    rep = C.check_inequalities(
        4000, [0.5, 0.9, 1.2],
        [math.pi / 4, -math.pi / 4, 0.99 * math.pi / 2], 3)
    assert rep["violations"] == 0
    assert rep["max_violation"] <= 0.0


def test_hyperbolic_inequality_fixture_and_sweep():
    r = C.hyperbolic_inequality(0, 0.5, 1, 1.0)
    assert r["holds"]
    d = C.hyperbolic_distance(0, 0.5)
    b0 = C.busemann_disk(0, 1)
    b1 = C.busemann_disk(0.5, 1)
    assert math.isclose(r["lhs"], math.tanh(d / 2) ** 2, rel_tol=1e-12)
    assert math.isclose(r["rhs"], math.tanh((b0 - b1) / 2) ** 2,
                        rel_tol=1e-12)
    rep = C.check_hyperbolic(2000, [0.5, 1 / math.sqrt(2), 1.0], 4)
    assert rep["violations"] == 0
