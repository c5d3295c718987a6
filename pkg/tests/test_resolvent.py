from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relpow import linrel as lr
from relpow import resolvent as rv
from relpow.errors import InvalidParams, NotInResolventSet

I2 = np.eye(2)
DIAG = lr.from_matrix(np.diag([-1.0, -4.0]))
PENCIL = lr.from_pencil(np.diag([1.0, 0.0]), -np.eye(2))


def test_c_resolvent_examples():
    assert np.allclose(rv.c_resolvent(DIAG, I2, 1), np.diag([1 / 2, 1 / 5]), atol=1e-14)
    assert np.allclose(rv.c_resolvent(PENCIL, I2, 1), [[0.5, 0], [0, 0]], atol=1e-14)
    with pytest.raises(NotInResolventSet) as exc:
        rv.c_resolvent(lr.from_matrix(-I2), I2, -1)
    assert exc.value.reason == "kernel"


def test_c_resolvent_range_failure():
    # C = I but lam - A has range span{e1} only: the pencil with B = I, L = diag(0,1) at lam=1
    A = lr.from_pencil(np.eye(2), np.diag([0.0, 1.0]))
    with pytest.raises(NotInResolventSet):
        rv.c_resolvent(A, I2, 1.0)
    # a regularizer that kills the bad direction makes lam=1 a C-resolvent point
    R = rv.c_resolvent(lr.from_pencil(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), np.diag([1.0, 0.0]), 1.0)
    assert np.allclose(R, np.diag([1.0, 0.0]))


def test_in_c_resolvent_set_examples():
    for lam in (1, 2 + 3j, 0.5 - 1j):
        assert rv.in_c_resolvent_set(DIAG, I2, lam, 1e-10)
    assert not rv.in_c_resolvent_set(DIAG, I2, -1, 1e-10)
    assert not rv.in_c_resolvent_set(PENCIL, I2, -1, 1e-10)
    assert rv.in_c_resolvent_set(PENCIL, I2, 1j, 1e-10)


def test_resolvent_power_examples():
    assert np.allclose(rv.resolvent_power(DIAG, I2, 1, 1), rv.c_resolvent(DIAG, I2, 1))
    assert np.allclose(rv.resolvent_power(DIAG, I2, 1, 2), np.diag([1 / 4, 1 / 25]))
    assert np.allclose(rv.resolvent_power(PENCIL, I2, 1, 2), [[0.25, 0], [0, 0]])


def test_resolvent_power_matches_cauchy_derivative():
    lam, n = 0.7 + 0.2j, 4
    r = 0.3
    zs = lam + r * np.exp(2j * np.pi * np.arange(64) / 64)
    deriv = sum(rv.c_resolvent(PENCIL, I2, z) / (z - lam) ** (n - 1) for z in zs) / 64
    deriv *= math.factorial(n - 1)
    expect = (-1) ** (n - 1) * math.factorial(n - 1) * rv.resolvent_power(PENCIL, I2, lam, n)
    assert np.allclose(deriv, expect, atol=1e-12)


def test_build_c1_examples():
    C = np.array([[1.0, 2.0], [0.0, 1.0]])
    assert np.array_equal(rv.build_c1(DIAG, C, rv.RegionParams(alpha=-1)), C)
    p = rv.RegionParams(alpha=0, lambda0=-2)
    assert np.allclose(rv.build_c1(DIAG, I2, p), np.diag([1, 1 / 4]))
    C1 = rv.build_c1(PENCIL, I2, p)
    assert np.allclose(C1, [[1, 0], [0, 0]])
    assert lr.relation_subset(lr.matrix_times(C1, PENCIL), lr.times_matrix(PENCIL, C1))[0]


def test_build_c1_alpha_exponent():
    # alpha = 1.5 -> floor(3.5) = 3
    p = rv.RegionParams(alpha=1.5, mode="HS", lambda0=-2)
    assert np.allclose(rv.build_c1(DIAG, I2, p), np.diag([-1.0, 1 / 8]))


def test_default_lambda0_outside_spectrum():
    lam0 = rv.default_lambda0(DIAG)
    assert abs(lam0 + 10) < 1e-12
    assert rv.in_c_resolvent_set(DIAG, I2, lam0)


def test_region_params_validation():
    p = rv.RegionParams.coupled(alpha=1.0, eps=0.2, c=0.3)
    assert abs(p.d - math.sqrt(0.04 + 0.09 / 1.44)) < 1e-15
    with pytest.raises(InvalidParams):
        rv.RegionParams(mode="H", alpha=1.0, eps=0.2, c=0.3, d=0.5)
    with pytest.raises(InvalidParams):
        rv.RegionParams(mode="HS", theta=math.pi / 2)
    with pytest.raises(InvalidParams):
        rv.RegionParams(mode="HS", lambda0=0.1)
    blob = p.to_json()
    assert rv.RegionParams.from_json(blob) == p


def test_region_certify_examples():
    hs = rv.RegionParams(mode="HS", alpha=-1, theta=math.pi / 4, d=0.5)
    cert = rv.region_certify(DIAG, I2, hs)
    # sup of (1+|lam|)|lam+1|^{-1} over the disk of radius 1/2 is attained at -1/2
    assert cert.passed and cert.sup_weighted_norm <= 3 + 1e-12
    assert abs(cert.worst_lambda + 0.5) < 1e-12
    assert rv.region_certify(PENCIL, I2, hs).passed
    bad = rv.region_certify(lr.from_matrix(np.diag([1.0, -1.0])), I2, hs)
    assert not bad.passed and abs(bad.worst_lambda - 1) < 1e-9


def test_region_certify_h_mode():
    p = rv.RegionParams.coupled(alpha=0.5, eps=0.2, c=0.3)
    assert rv.region_certify(DIAG, I2, p).passed


def test_classify_sectorial_examples():
    negD = lr.scalar_shift_mul(DIAG, -1, 0)
    ok, sup = rv.c_nonnegative(negD, I2)
    assert ok and sup <= 1 + 1e-9
    negP = lr.scalar_shift_mul(PENCIL, -1, 0)
    C1 = rv.build_c1(PENCIL, I2, rv.RegionParams(alpha=0, lambda0=-2))
    assert rv.in_c_resolvent_set(negP, C1, 0.0)
    assert not rv.classify_sectorial(lr.identity(2), I2, 0.0)[0]
    assert rv.classify_sectorial(negD, I2, 0.1)[0]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_resolvent_equation_and_commutativity(seed):
    rng = np.random.default_rng(seed)
    A = lr.from_matrix(-np.diag(rng.uniform(0.5, 5, 3)) + 0.1 * rng.standard_normal((3, 3)))
    C = rv.resolvent_power(A, np.eye(3), -6.0, 1)
    lam, mu = rng.uniform(0.2, 3, 2) + 1j * rng.uniform(-2, 2, 2)
    x = rng.standard_normal(3)
    Rl, Rm = rv.c_resolvent(A, C, lam), rv.c_resolvent(A, C, mu)
    lhs = rv.c_resolvent(A, C @ C, lam) @ x - rv.c_resolvent(A, C @ C, mu) @ x
    assert np.linalg.norm(lhs - (mu - lam) * Rl @ Rm @ x) <= 1e-9 * np.linalg.norm(x)
    assert np.allclose(Rl @ Rm, Rm @ Rl, atol=1e-10)


def test_inclusion_chain_on_pencil():
    C = np.diag([1.0, 0.0])
    lam = 0.8 + 0.3j
    R = rv.c_resolvent(PENCIL, C, lam)
    # R already includes C, so for (x, y) in A the chain reads R y = lam R x - C x
    for c in np.eye(PENCIL.rank):
        x, y = PENCIL.P @ c, PENCIL.Q @ c
        assert np.allclose(R @ y, lam * R @ x - C @ x, atol=1e-12)
    for xh in np.eye(2):
        assert lr.contains_pair(PENCIL, R @ xh, lam * R @ xh - C @ xh, 1e-10)[0]
