from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relpow import linrel as lr
from relpow.errors import DimensionMismatch

PENCIL = lr.from_pencil(np.diag([1.0, 0.0]), -np.eye(2))


def rel(seed, n=3, rank=None):
    return lr.random_relation(n, np.random.default_rng(seed), rank)


def test_from_graph_single_valued():
    A = lr.from_graph(np.array([[1.0], [-1.0]]))
    assert A.dim == 1
    assert A == lr.from_matrix([[-1.0]])


def test_from_graph_multivalued():
    basis = np.array([[1, 0], [0, 0], [-1, 0], [0, 1]], dtype=float)
    A = lr.from_graph(basis)
    q = lr.parts(A)
    assert q.mulpart.shape[1] == 1
    assert abs(abs(q.mulpart[1, 0]) - 1) < 1e-12
    assert lr.contains_pair(A, [1, 0], [-1, 5.0])[0]


def test_from_graph_zero_and_odd():
    A = lr.from_graph(np.zeros((4, 2)))
    assert A.rank == 0
    assert lr.parts(A).domain.shape[1] == 0
    with pytest.raises(DimensionMismatch):
        lr.from_graph(np.zeros((3, 1)))


def test_graph_is_orthonormal():
    A = lr.from_graph(np.random.default_rng(0).standard_normal((6, 3)))
    assert np.allclose(A.graph.conj().T @ A.graph, np.eye(3), atol=1e-12)


def test_from_matrix_examples():
    Z = lr.from_matrix(np.zeros((2, 2)))
    assert np.allclose(Z.to_matrix(), 0)
    D = lr.from_matrix(np.diag([-1.0, -4.0]))
    assert np.allclose(D.to_matrix(), np.diag([-1, -4]))
    I = lr.from_matrix(np.eye(2))
    assert lr.inverse(I) == I


def test_from_pencil_examples():
    M = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert lr.from_pencil(np.eye(2), M) == lr.from_matrix(M)
    q = lr.parts(PENCIL)
    assert q.domain.shape[1] == 1 and abs(abs(q.domain[0, 0]) - 1) < 1e-12
    assert q.mulpart.shape[1] == 1 and abs(abs(q.mulpart[1, 0]) - 1) < 1e-12
    pure = lr.from_pencil(np.zeros((2, 2)), np.eye(2))
    q = lr.parts(pure)
    assert q.domain.shape[1] == 0 and q.mulpart.shape[1] == 2


def test_inverse_examples():
    assert lr.inverse(lr.from_matrix(np.diag([2.0, 3.0]))) == lr.from_matrix(np.diag([0.5, 1 / 3]))
    inv0 = lr.inverse(lr.from_matrix(np.zeros((2, 2))))
    assert lr.parts(inv0).domain.shape[1] == 0
    assert lr.inverse(lr.inverse(PENCIL)) == PENCIL


def test_add_examples():
    M = np.array([[1.0, 2.0], [0.0, 1.0]])
    N = np.array([[0.0, 1.0], [1.0, 1.0]])
    A = lr.from_matrix(M)
    assert lr.add(A, lr.from_matrix(np.zeros((2, 2)))) == A
    assert lr.add(A, lr.from_matrix(N)) == lr.from_matrix(M + N)
    S = lr.add(PENCIL, lr.identity(2))
    q0, q1 = lr.parts(PENCIL), lr.parts(S)
    assert lr.relation_subset(lr.from_graph(np.vstack([q1.domain, q1.domain])),
                              lr.from_graph(np.vstack([q0.domain, q0.domain])))[0]
    assert q1.mulpart.shape[1] == 1 and abs(abs(q1.mulpart[1, 0]) - 1) < 1e-12


def test_compose_examples():
    rng = np.random.default_rng(1)
    M, N = rng.standard_normal((2, 3, 3))
    assert lr.compose(lr.from_matrix(M), lr.from_matrix(N)) == lr.from_matrix(M @ N)
    A = rel(2, 3, 2)
    AAi = lr.compose(A, lr.inverse(A))
    rng_basis = lr.parts(A).range
    ident_on_range = lr.from_graph(np.vstack([rng_basis, rng_basis]))
    assert lr.relation_subset(ident_on_range, AAi)[0]
    z = lr.zero_relation(3)
    assert lr.compose(A, z).rank == 0


def test_scalar_shift_mul_examples():
    A = rel(3)
    w, z = 0.3 - 1j, 2.0 + 0.5j
    assert lr.scalar_shift_mul(A, w * z, 0) == lr.scalar_shift_mul(lr.scalar_shift_mul(A, z, 0), w, 0)
    negA = lr.scalar_shift_mul(A, -1, 0)
    lam = 1.5
    assert lr.scalar_shift_mul(negA, 1, lam) == lr.shift(A, lam)
    Z = lr.scalar_shift_mul(PENCIL, 0, 2.0)
    assert lr.parts(Z).mulpart.shape[1] == 0


def test_integer_power_examples():
    M = np.array([[1.0, 1.0], [0.5, -1.0]])
    assert lr.integer_power(lr.from_matrix(M), 3) == lr.from_matrix(M @ M @ M)
    P2 = lr.integer_power(PENCIL, 2)
    assert P2 == lr.compose(PENCIL, PENCIL)
    assert lr.contains_pair(P2, [1, 0], [1, 3.0])[0]
    assert lr.integer_power(PENCIL, 0) == lr.identity(2)
    A = rel(4)
    assert lr.inverse(lr.integer_power(A, 3)) == lr.integer_power(lr.inverse(A), 3)


def test_adjoint_examples():
    M = np.array([[1 + 1j, 2.0], [0.0, 3j]])
    assert lr.adjoint(lr.from_matrix(M)) == lr.from_matrix(M.conj().T)
    pure = lr.from_pencil(np.zeros((2, 2)), np.eye(2))
    adj = lr.adjoint(pure)
    assert lr.parts(adj).domain.shape[1] == 0
    assert adj == pure
    A = rel(5, 3, 2)
    assert lr.adjoint(lr.adjoint(A)) == A


def test_parts_examples():
    q = lr.parts(lr.from_matrix(np.diag([1.0, 0.0])))
    assert q.kernel.shape[1] == 1 and abs(abs(q.kernel[1, 0]) - 1) < 1e-12
    assert q.mulpart.shape[1] == 0
    q = lr.parts(lr.zero_relation(2))
    assert all(b.shape[1] == 0 for b in (q.domain, q.range, q.kernel, q.mulpart))


def test_contains_pair_examples():
    A = lr.from_matrix(-np.eye(2))
    ok, res = lr.contains_pair(A, [1, 0], [-1, 0])
    assert ok and res < 1e-14
    assert not lr.contains_pair(A, [0, 1], [1, 0])[0]
    assert lr.contains_pair(PENCIL, [1, 0], [-1, 7])[0]
    with pytest.raises(DimensionMismatch):
        lr.contains_pair(A, [1, 0, 0], [1, 0])


def test_relation_subset_examples():
    A = rel(6)
    assert lr.relation_subset(A, A)[0]
    D = lr.from_matrix(np.diag([-1.0, -4.0]))
    C = np.eye(2)
    assert lr.relation_subset(lr.matrix_times(C, D), lr.times_matrix(D, C))[0]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_invariants(seed, n):
    rng = np.random.default_rng(seed)
    k1, k2 = rng.integers(0, 2 * n + 1, size=2)
    A = lr.random_relation(n, rng, int(k1))
    B = lr.random_relation(n, rng, int(k2))
    assert lr.inverse(lr.inverse(A)) == A
    assert lr.inverse(lr.compose(B, A)) == lr.compose(lr.inverse(A), lr.inverse(B))
    ker_inv = lr.parts(lr.inverse(A)).kernel
    mul = lr.parts(A).mulpart
    assert ker_inv.shape == mul.shape
    if mul.shape[1]:
        assert np.max(lr.span_distance(mul, ker_inv)) < 1e-9
    assert lr.adjoint(lr.adjoint(A)) == A


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_domain_of_shifted_powers(seed):
    rng = np.random.default_rng(seed)
    A = lr.random_relation(3, rng, int(rng.integers(1, 6)))
    lam = complex(*rng.standard_normal(2))
    for k in range(1, 5):
        d1 = lr.parts(lr.integer_power(lr.shift(A, lam), k)).domain
        d2 = lr.parts(lr.integer_power(A, k)).domain
        assert d1.shape == d2.shape
        if d1.shape[1]:
            assert np.max(lr.span_distance(d2, d1)) < 1e-8


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_combination_inclusion(seed):
    rng = np.random.default_rng(seed)
    A = lr.random_relation(3, rng, 4)
    lam, eta = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    c1, c2 = rng.standard_normal((2, A.rank))
    x, u = A.P @ c1, A.Q @ c1
    y, v = A.P @ c2, A.Q @ c2
    assert lr.contains_pair(A, lam * x + eta * y, lam * u + eta * v, 1e-10)[0]
