"""Linear relations (multivalued linear operators) on C^n.

A relation is stored as an orthonormal basis of its graph inside C^n x C^n.
The top n rows of the basis hold first components, the bottom n rows hold
second components. Every operation below is a subspace computation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

RANK_RTOL = 1e-10
ANGLE_TOL = 1e-10


def as_cmatrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    return m


def orth(m: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the column span, rank decided by sigma <= rtol*sigma_max."""
    m = as_cmatrix(m)
    rows = m.shape[0]
    if m.size == 0:
        return np.zeros((rows, 0), dtype=complex)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((rows, 0), dtype=complex)
    r = int(np.sum(s > rtol * s[0]))
    return u[:, :r]


def null_space(m: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of {c : m c = 0}."""
    m = as_cmatrix(m)
    cols = m.shape[1]
    if m.shape[0] == 0 or cols == 0:
        return np.eye(cols, dtype=complex)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(cols, dtype=complex)
    r = int(np.sum(s > rtol * smax))
    return vh[r:].conj().T


def span_distance(basis: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Column-wise distance of v to span(basis); basis must be orthonormal."""
    v = as_cmatrix(v)
    if basis.shape[1] == 0:
        return np.linalg.norm(v, axis=0)
    return np.linalg.norm(v - basis @ (basis.conj().T @ v), axis=0)


@dataclass(frozen=True)
class SubspaceQuad:
    domain: np.ndarray
    range: np.ndarray
    kernel: np.ndarray
    mulpart: np.ndarray


class LinearRelation:
    """Immutable linear subspace of C^n x C^n."""

    __slots__ = ("_n", "_graph")

    def __init__(self, n: int, graph: np.ndarray, _trusted: bool = False):
        if n <= 0:
            raise DimensionMismatch("ambient dimension must be positive")
        g = as_cmatrix(graph)
        if g.shape[0] != 2 * n:
            raise DimensionMismatch(f"graph has {g.shape[0]} rows, expected {2 * n}")
        if not _trusted:
            g = orth(g)
        g.setflags(write=False)
        self._n = n
        self._graph = g

    # basic accessors
    @property
    def dim(self) -> int:
        return self._n

    @property
    def graph(self) -> np.ndarray:
        return self._graph

    @property
    def P(self) -> np.ndarray:
        return self._graph[: self._n]

    @property
    def Q(self) -> np.ndarray:
        return self._graph[self._n:]

    @property
    def rank(self) -> int:
        return self._graph.shape[1]

    def __repr__(self):
        return f"LinearRelation(n={self._n}, rank={self.rank})"

    def is_single_valued(self) -> bool:
        return parts(self).mulpart.shape[1] == 0

    def __eq__(self, other):
        if not isinstance(other, LinearRelation):
            return NotImplemented
        return relations_equal(self, other)

    __hash__ = None

    def to_matrix(self) -> np.ndarray:
        """Matrix of a single-valued relation with full domain."""
        n = self._n
        if np.linalg.matrix_rank(self.P, tol=RANK_RTOL * max(1.0, np.linalg.norm(self.P, 2))) < n:
            raise ValueError("relation does not have full domain")
        if not self.is_single_valued():
            raise ValueError("relation is multivalued")
        return self.Q @ np.linalg.pinv(self.P)


# constructors

def from_graph(basis) -> LinearRelation:
    b = as_cmatrix(basis)
    if b.shape[0] % 2:
        raise DimensionMismatch("graph basis must have an even number of rows")
    return LinearRelation(b.shape[0] // 2, b)


def from_matrix(M) -> LinearRelation:
    M = as_cmatrix(M)
    n = M.shape[0]
    if M.shape != (n, n):
        raise DimensionMismatch("matrix must be square")
    return LinearRelation(n, np.vstack([np.eye(n, dtype=complex), M]))


def from_pencil(B, L) -> LinearRelation:
    """Relation {(Bx, Lx)}, i.e. L B^{-1} in the relation sense."""
    B = as_cmatrix(B)
    L = as_cmatrix(L)
    if B.shape != L.shape or B.shape[0] != B.shape[1]:
        raise DimensionMismatch("pencil matrices must be square and of equal size")
    return LinearRelation(B.shape[0], np.vstack([B, L]))


def identity(n: int) -> LinearRelation:
    return from_matrix(np.eye(n))


def zero_relation(n: int) -> LinearRelation:
    return LinearRelation(n, np.zeros((2 * n, 0), dtype=complex), _trusted=True)


# algebra

def _check_same(A: LinearRelation, B: LinearRelation):
    if A.dim != B.dim:
        raise DimensionMismatch(f"dimensions {A.dim} and {B.dim} differ")


def inverse(A: LinearRelation) -> LinearRelation:
    return LinearRelation(A.dim, np.vstack([A.Q, A.P]), _trusted=True)


def add(A: LinearRelation, B: LinearRelation) -> LinearRelation:
    """{(x, u+v) : (x,u) in A, (x,v) in B}."""
    _check_same(A, B)
    ka = A.rank
    N = null_space(np.hstack([A.P, -B.P]))
    a, b = N[:ka], N[ka:]
    return LinearRelation(A.dim, np.vstack([A.P @ a, A.Q @ a + B.Q @ b]))


def compose(B: LinearRelation, A: LinearRelation) -> LinearRelation:
    """The product BA = {(x,z) : exists y with (x,y) in A, (y,z) in B}."""
    _check_same(A, B)
    ka = A.rank
    N = null_space(np.hstack([A.Q, -B.P]))
    a, b = N[:ka], N[ka:]
    return LinearRelation(A.dim, np.vstack([A.P @ a, B.Q @ b]))


def scalar_shift_mul(A: LinearRelation, z: complex, w: complex) -> LinearRelation:
    """w*I + z*A = {(x, w x + z y) : (x,y) in A}."""
    return LinearRelation(A.dim, np.vstack([A.P, w * A.P + z * A.Q]))


def shift(A: LinearRelation, lam: complex) -> LinearRelation:
    """lam - A."""
    return scalar_shift_mul(A, -1.0, lam)


def matrix_times(M, A: LinearRelation) -> LinearRelation:
    """M A for a matrix M acting after A."""
    M = as_cmatrix(M)
    return LinearRelation(A.dim, np.vstack([A.P, M @ A.Q]))


def times_matrix(A: LinearRelation, M) -> LinearRelation:
    """A M for a matrix M acting before A."""
    return compose(A, from_matrix(M))


def integer_power(A: LinearRelation, n: int) -> LinearRelation:
    if n == 0:
        return identity(A.dim)
    base = A if n > 0 else inverse(A)
    out = base
    for _ in range(abs(n) - 1):
        out = compose(base, out)
    return out


def adjoint(A: LinearRelation) -> LinearRelation:
    """{(u, v) : <u, y> = <v, x> for all (x,y) in A}."""
    n = A.dim
    if A.rank == 0:
        return LinearRelation(n, np.eye(2 * n, dtype=complex), _trusted=True)
    N = null_space(np.hstack([A.Q.conj().T, -A.P.conj().T]))
    return LinearRelation(n, N)


def closure(A: LinearRelation) -> LinearRelation:
    # every subspace of a finite-dimensional space is closed
    return A


def parts(A: LinearRelation) -> SubspaceQuad:
    n = A.dim
    P, Q = A.P, A.Q
    domain = orth(P)
    rng = orth(Q)
    nq = null_space(Q) if A.rank else np.zeros((0, 0), dtype=complex)
    npp = null_space(P) if A.rank else np.zeros((0, 0), dtype=complex)
    kernel = orth(P @ nq) if nq.size else np.zeros((n, 0), dtype=complex)
    mulpart = orth(Q @ npp) if npp.size else np.zeros((n, 0), dtype=complex)
    return SubspaceQuad(domain, rng, kernel, mulpart)


# membership and comparison

def contains_pair(A: LinearRelation, x, y, tol: float = 1e-10):
    """Return (inside, residual) for the pair (x, y); residual is the distance to the graph."""
    x = np.asarray(x, dtype=complex).ravel()
    y = np.asarray(y, dtype=complex).ravel()
    if x.size != A.dim or y.size != A.dim:
        raise DimensionMismatch("pair has wrong length")
    v = np.concatenate([x, y])
    res = float(span_distance(A.graph, v)[0])
    return res <= tol * (1.0 + np.linalg.norm(v)), res


def relation_subset(A: LinearRelation, B: LinearRelation, tol: float = ANGLE_TOL):
    """Return (A subset of B, max distance of A's basis columns to graph B)."""
    _check_same(A, B)
    if A.rank == 0:
        return True, 0.0
    defect = float(np.max(span_distance(B.graph, A.graph)))
    return defect <= tol, defect


def principal_angles(A: LinearRelation, B: LinearRelation) -> np.ndarray:
    if A.rank == 0 or B.rank == 0:
        return np.zeros(0)
    s = np.linalg.svd(A.graph.conj().T @ B.graph, compute_uv=False)
    return np.arccos(np.clip(s, -1.0, 1.0))


def relations_equal(A: LinearRelation, B: LinearRelation, tol: float = ANGLE_TOL) -> bool:
    if A.dim != B.dim or A.rank != B.rank:
        return False
    return relation_subset(A, B, tol)[0] and relation_subset(B, A, tol)[0]


def image_of(A: LinearRelation, x, tol: float = 1e-10):
    """Some y with (x, y) in A, or None when x is outside the domain."""
    x = np.asarray(x, dtype=complex).ravel()
    if A.rank == 0:
        return np.zeros(A.dim, dtype=complex) if np.linalg.norm(x) <= tol else None
    c, *_ = np.linalg.lstsq(A.P, x, rcond=None)
    if np.linalg.norm(A.P @ c - x) > tol * (1.0 + np.linalg.norm(x)):
        return None
    return A.Q @ c


def random_relation(n: int, rng: np.random.Generator, rank: int | None = None) -> LinearRelation:
    k = n if rank is None else rank
    g = rng.standard_normal((2 * n, k)) + 1j * rng.standard_normal((2 * n, k))
    return LinearRelation(n, g)
