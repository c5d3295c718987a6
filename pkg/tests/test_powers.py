from __future__ import annotations

import math

import numpy as np
import pytest

from relpow import contour as ct
from relpow import linrel as lr
from relpow import powers as pw
from relpow.errors import RouteDomain
from relpow.resolvent import RegionParams, build_c1

TOL = 1e-9
I2 = np.eye(2)
DIAG = lr.from_matrix(np.diag([-1.0, -4.0]))
PENCIL = lr.from_pencil(np.diag([1.0, 0.0]), -np.eye(2))
PENCIL_C1 = build_c1(PENCIL, I2, RegionParams(alpha=0, lambda0=-2))
GAMMA = ct.build_gamma_sector(math.pi / 4, 0.5)

# a 3x3 degenerate pencil with a non-diagonal regularizer
B3 = np.diag([1.0, 1.0, 0.0])
L3 = np.array([[-2.0, 1.0, 0.0], [0.0, -3.0, 0.5], [0.0, 0.0, -1.0]])
PENCIL3 = lr.from_pencil(B3, L3)
C1_3 = build_c1(PENCIL3, np.eye(3), RegionParams(alpha=0, lambda0=-8))

CASES = [(DIAG, I2), (PENCIL, PENCIL_C1), (PENCIL3, C1_3)]


def eig_power(evals, b):
    return np.diag(np.asarray(evals, dtype=complex) ** (-b))


def test_hfunctional_calc_examples():
    F = pw.hfunctional_calc(DIAG, I2, pw.zpow(1), GAMMA, TOL)
    assert np.allclose(F, np.diag([1, 1 / 4]), atol=5 * TOL)
    F = pw.hfunctional_calc(DIAG, I2, pw.zpow(0.5), GAMMA, TOL)
    assert np.allclose(F, np.diag([1, 1 / 2]), atol=5 * TOL)
    F = pw.hfunctional_calc(PENCIL, I2, pw.zpow(1), GAMMA, TOL)
    assert np.allclose(F, [[1, 0], [0, 0]], atol=5 * TOL)


def test_neg_power_examples():
    assert np.array_equal(pw.neg_power(DIAG, I2, pw.PowerSpec(0)), I2)
    v = pw.neg_power(DIAG, I2, pw.PowerSpec(0.5), TOL)
    assert np.allclose(v, np.diag([1, 0.5]), atol=5 * TOL)
    vb = pw.neg_power(DIAG, I2, pw.PowerSpec(0.5, "balakrishnan"), TOL)
    assert np.max(np.abs(v - vb)) <= 2 * TOL


def test_route_domain():
    with pytest.raises(RouteDomain):
        pw.neg_power(DIAG, I2, pw.PowerSpec(-0.5))
    with pytest.raises(RouteDomain):
        pw.neg_power(DIAG, I2, pw.PowerSpec(1.0, "moment", 1))
    with pytest.raises(RouteDomain):
        pw.neg_power(DIAG, I2, pw.PowerSpec(2.5, "moment", 1))
    with pytest.raises(RouteDomain):
        pw.neg_power(DIAG, I2, pw.PowerSpec(0.5, "nonsense"))


@pytest.mark.parametrize("b", [0.3, 0.5 + 0.2j, 1.7])
@pytest.mark.parametrize("route", ["contour", "balakrishnan", "moment"])
def test_routes_match_eigen_oracle(b, route):
    A = lr.from_matrix(np.diag([-1.0, -4.0, -9.0]))
    v = pw.neg_power(A, np.eye(3), pw.PowerSpec(b, route), TOL)
    assert np.max(np.abs(v - eig_power([1, 4, 9], b))) <= 1e-7


def test_non_normal_matrix_matches_scipy_oracle():
    import scipy.linalg
    M = np.array([[-2.0, 1.0, 0.3], [0.0, -1.0, 2.0], [0.0, 0.0, -5.0]])
    b = 0.6 + 0.1j
    v = pw.neg_power(lr.from_matrix(M), np.eye(3), pw.PowerSpec(b), TOL)
    oracle = scipy.linalg.expm(-b * scipy.linalg.logm(-M))
    assert np.max(np.abs(v - oracle)) <= 1e-7


@pytest.mark.parametrize("A,C1", CASES)
@pytest.mark.parametrize("b", [0.3, 0.7])
def test_route_consistency(A, C1, b):
    vc = pw.neg_power(A, C1, pw.PowerSpec(b, "contour"), TOL)
    vb = pw.neg_power(A, C1, pw.PowerSpec(b, "balakrishnan"), TOL)
    vm = pw.neg_power(A, C1, pw.PowerSpec(b, "moment", 1), TOL)
    assert np.max(np.abs(vc - vb)) <= 5 * TOL
    assert np.max(np.abs(C1 @ vc - vm)) <= 5 * TOL


@pytest.mark.parametrize("A,C1", CASES)
def test_residue_identity(A, C1):
    for n in (1, 2, 3):
        vc = pw.neg_power(A, C1, pw.PowerSpec(n), TOL)
        assert np.max(np.abs(vc - pw.integer_neg_power(A, C1, n))) <= 5 * TOL


@pytest.mark.parametrize("A,C1", CASES)
def test_homomorphism_and_additivity(A, C1):
    rng = np.random.default_rng(3)
    for _ in range(3):
        b1, b2 = rng.uniform(0.2, 1.5, 2) + 1j * rng.uniform(-0.3, 0.3, 2)
        f, g = pw.zpow(b1), pw.zpow(b2)
        Ff = pw.hfunctional_calc(A, C1, f, GAMMA, TOL)
        Fg = pw.hfunctional_calc(A, C1, g, GAMMA, TOL)
        Ffg = pw.hfunctional_calc(A, C1, pw.product(f, g), GAMMA, TOL)
        assert np.max(np.abs(Ff @ Fg - Ffg @ C1)) <= 5 * TOL
        Pab = pw.neg_power(A, C1, pw.PowerSpec(b1 + b2), TOL)
        assert np.max(np.abs(Ff @ Fg - Pab @ C1)) <= 5 * TOL


def test_power_relation_examples():
    R = pw.power_relation(DIAG, I2, 1, TOL)
    assert R == lr.from_matrix(np.diag([1.0, 4.0]))
    R = pw.power_relation(PENCIL, PENCIL_C1, -1, TOL)
    expect = lr.from_graph(np.array([[1, 0, 0], [0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=float))
    assert R == expect
    R = pw.power_relation(DIAG, I2, 0.5, TOL)
    assert lr.contains_pair(R, [1, 0], [1, 0], 1e-8)[0]


def test_power_membership_examples():
    assert pw.power_membership(DIAG, I2, 0.5, [1, 0], [1, 0], 1e-8)[0]
    assert pw.power_membership(DIAG, I2, 0.5, [0, 1], [0, 2], 1e-8)[0]
    assert not pw.power_membership(DIAG, I2, 0.5, [0, 1], [0, 1], 1e-8)[0]
    # multivalued part of (-A)_b on the pencil is the kernel of the power matrix
    Pm = pw.neg_power(PENCIL, PENCIL_C1, pw.PowerSpec(0.5), TOL)
    ker = lr.null_space(Pm, 1e-6)
    assert ker.shape[1] == 1
    assert pw.power_membership(PENCIL, PENCIL_C1, 0.5, [0, 0], ker[:, 0], 1e-8, matrix=Pm)[0]
    R = pw.power_relation(PENCIL, PENCIL_C1, 0.5, TOL)
    assert lr.contains_pair(R, [0, 0], ker[:, 0], 1e-8)[0]


def test_imaginary_power_scalar():
    a, tau = 3.0, 1.0
    R = pw.imaginary_power_relation(lr.from_matrix([[-a]]), np.eye(1), tau, TOL)
    expect = lr.from_matrix([[np.exp(1j * tau * math.log(a))]])
    assert lr.relation_subset(R, expect, 1e-7)[0] and lr.relation_subset(expect, R, 1e-7)[0]


def test_imaginary_power_image_on_diag():
    tau = 0.8
    C1 = build_c1(DIAG, I2, RegionParams(alpha=0, lambda0=-6))
    R = pw.imaginary_power_relation(DIAG, C1, tau, TOL)
    for y in (np.array([1.0, 0.0]), np.array([0.3, -1.2])):
        u = lr.image_of(lr.shift(DIAG, 1.0), y)
        x = C1 @ y
        w = pw.imaginary_power_image(DIAG, C1, tau, u, TOL)
        assert lr.contains_pair(R, x, w, 1e-7)[0]
        oracle = np.diag(np.array([1.0, 4.0]) ** (1j * tau)) @ x
        assert np.allclose(w, oracle, atol=1e-7)


def test_imaginary_power_rank_stable_on_pencil():
    ranks = {pw.imaginary_power_relation(PENCIL, PENCIL_C1, tau, tol).rank
             for tau in (0.5, 1.0) for tol in (1e-8, 1e-9, 1e-10)}
    assert len(ranks) == 1


def test_dpower_db():
    a, b = 2.5, 0.7
    v = pw.dpower_db(lr.from_matrix([[-a]]), np.eye(1), b, TOL)
    assert abs(v[0, 0] + math.log(a) * a ** -b) <= 1e-8
    h = 1e-3
    fd = (pw.neg_power(DIAG, I2, pw.PowerSpec(b + h), 1e-11) - pw.neg_power(DIAG, I2, pw.PowerSpec(b - h), 1e-11)) / (2 * h)
    d = pw.dpower_db(DIAG, I2, b, 1e-11)
    assert np.max(np.abs(fd - d)) <= 1e-5 * np.max(np.abs(d))
    assert np.max(np.abs(d.imag)) <= 1e-10


@pytest.mark.parametrize("A,C1", [(DIAG, I2), (PENCIL, PENCIL_C1)])
def test_power_product_inclusions(A, C1):
    Cm = lr.from_matrix(C1)
    Cinv = lr.inverse(Cm)
    for b1, b2 in ((-0.25, -0.25), (0.25, 0.25), (-0.4, -0.7 + 0.2j), (0.6, 0.3 - 0.1j)):
        R1 = pw.power_relation(A, C1, b1, TOL)
        R2 = pw.power_relation(A, C1, b2, TOL)
        R12 = pw.power_relation(A, C1, b1 + b2, TOL)
        prod = lr.compose(R1, R2)
        # (-A)_{b1+b2} inside C1^{-1} (-A)_{b1} (-A)_{b2} C1
        assert lr.relation_subset(R12, lr.compose(Cinv, lr.compose(prod, Cm)), 1e-7)[0]
        # (-A)_{b1} (-A)_{b2} inside C1^{-1} (-A)_{b1+b2} C1
        assert lr.relation_subset(prod, lr.compose(Cinv, lr.compose(R12, Cm)), 1e-7)[0]
        for R in (R1, R2):
            assert lr.relation_subset(R, pw.regularized_conjugate(R, C1), 1e-7)[0]


@pytest.mark.parametrize("A,C1", CASES)
@pytest.mark.parametrize("b", [0.4, 1.3 + 0.2j, 2.0])
def test_chain_end_lands_in_power_domain(A, C1, b):
    b = complex(b)
    k = math.ceil(b.real) if not float(b.real).is_integer() else int(b.real) + 1
    dom = lr.parts(lr.integer_power(A, k)).domain
    for y in dom.T:
        chain = pw.chain_in(A, y, k)
        assert chain is not None
        w = pw.chain_power_image(A, C1, b, chain[-1], k, TOL)
        ok, res = pw.power_membership(A, C1, b, C1 @ y, w, 1e-7)
        assert ok, res


def test_equicontinuity_sample():
    sup = max(np.linalg.norm(pw.neg_power(PENCIL3, C1_3, pw.PowerSpec(b), 1e-8), 2)
              for b in np.arange(0.1, 1.0, 0.1))
    assert np.isfinite(sup) and sup <= 10.0
