"""Contour functional calculus and complex powers of -A regularized by C1.

Sign convention: f_{C1}(A) is normalized so that, for a scalar A = -a with
a > 0, it returns f(a) C1. With the counterclockwise contour around (-inf, 0]
this means

    f_{C1}(A) = (1/(2 pi i)) * integral of f(z) (-z - A)^{-1} C1 dz,

which agrees with the residue identity (-A)^{-n}_{C1} = (-A)^{-n} C1. The
half-line formulas (Balakrishnan and the moment formula) carry the matching
sign.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from . import contour as ct
from . import linrel as lr
from .errors import RouteDomain
from .resolvent import c_resolvent, resolvent_power


@dataclass(frozen=True)
class CalcFunction:
    eval: Callable[[complex], complex]
    decay_s: float
    description: str = ""
    decay: object = None            # overrides Algebraic(decay_s) for the contour tail

    def tail(self):
        return self.decay if self.decay is not None else ct.Algebraic(self.decay_s)


def zpow(b: complex) -> CalcFunction:
    """z -> z^{-b} on the principal branch."""
    b = complex(b)
    return CalcFunction(lambda z: np.exp(-b * np.log(z)), b.real, f"z^-({b})")


def log_zpow(b: complex) -> CalcFunction:
    """z -> -log(z) z^{-b}, the b-derivative of z^{-b}."""
    b = complex(b)
    # log growth costs a little decay; half of Re b is a safe algebraic rate
    return CalcFunction(lambda z: -np.log(z) * np.exp(-b * np.log(z)), b.real / 2, f"-log z z^-({b})")


def product(f: CalcFunction, g: CalcFunction) -> CalcFunction:
    return CalcFunction(lambda z: f.eval(z) * g.eval(z), f.decay_s + g.decay_s,
                        f"({f.description})*({g.description})")


@dataclass(frozen=True)
class PowerSpec:
    b: complex
    route: str = "contour"
    n_moment: int | None = None


def hfunctional_calc(A: lr.LinearRelation, C1, f: CalcFunction, gamma: ct.Contour, tol: float = 1e-8,
                     return_result: bool = False):
    """Matrix f_{C1}(A) by contour quadrature."""
    C1 = lr.as_cmatrix(C1)

    def integrand(z):
        return f.eval(z) * c_resolvent(A, C1, -z)

    res = ct.quad_contour(integrand, gamma, tol, f.tail())
    return res if return_result else res.value


def _route_moment_default(b: complex) -> int:
    return max(1, math.floor(b.real))


def neg_power(A: lr.LinearRelation, C1, spec: PowerSpec, tol: float = 1e-8, gamma: ct.Contour | None = None):
    """(-A)^{-b}_{C1} by the requested route.

    The moment route returns C1^n (-A)^{-b}_{C1}, the quantity it natively produces.
    """
    C1 = lr.as_cmatrix(C1)
    b = complex(spec.b)
    if b == 0:
        return C1.copy()
    if b.real <= 0:
        raise RouteDomain("Re b must be positive")
    if spec.route == "contour":
        if gamma is None:
            gamma = ct.build_gamma_sector(math.pi / 4, 0.5)
        return hfunctional_calc(A, C1, zpow(b), gamma, tol)
    if spec.route == "balakrishnan":
        return _balakrishnan(A, C1, b, tol)
    if spec.route == "moment":
        n = _route_moment_default(b) if spec.n_moment is None else spec.n_moment
        return _moment(A, C1, b, n, tol)
    raise RouteDomain(f"unknown route {spec.route!r}")


def _balakrishnan(A, C1, b: complex, tol: float):
    """Half-line route: Gamma(m)/(Gamma(b)Gamma(m-b)) int_0^inf lam^{m-b-1} (lam-A)^{-m} C1 dlam.

    m = floor(Re b) + 1, so for 0 < Re b < 1 this is (sin(pi b)/pi) int lam^{-b} (lam-A)^{-1} C1 dlam.
    """
    m = math.floor(b.real) + 1
    if m == 1:
        coef = np.sin(np.pi * b) / np.pi
    else:
        coef = special.gamma(m) / (special.gamma(b) * special.gamma(m - b))

    def integrand(lam):
        return lam ** (m - b - 1) * resolvent_power(A, C1, lam, m)

    res = ct.quad_halfline(integrand, tol / max(1.0, abs(coef)), ct.Algebraic(b.real),
                           head_power=m - b.real - 1)
    return coef * res.value


def _moment(A, C1, b: complex, n: int, tol: float):
    """C1^n (-A)^{-b}_{C1} from the (n+1)-st resolvent power, valid for Re b in (0, n+1) minus integers."""
    if n < 0 or not 0 < b.real < n + 1 or float(b.real).is_integer():
        raise RouteDomain(f"moment route with n={n} needs Re b in (0, {n + 1}) and not an integer")
    denom = np.prod([k - b for k in range(1, n + 1)]) if n else 1.0
    coef = -((-1) ** n) * math.factorial(n) / denom * np.sin(np.pi * (n - b)) / np.pi
    Cn1 = np.linalg.matrix_power(C1, n + 1)

    def integrand(t):
        return t ** (n - b) * resolvent_power(A, Cn1, t, n + 1)

    res = ct.quad_halfline(integrand, tol / max(1.0, abs(coef)), ct.Algebraic(b.real), head_power=n - b.real)
    return coef * res.value


def integer_neg_power(A, C1, n: int):
    """(-A)^{-n} C1 by relation algebra: the resolvent power at lambda = 0."""
    if n == 0:
        return lr.as_cmatrix(C1).copy()
    return resolvent_power(A, C1, 0.0, n)


def dpower_db(A, C1, b: complex, tol: float = 1e-8, gamma: ct.Contour | None = None):
    """Derivative of b -> (-A)^{-b}_{C1}."""
    if gamma is None:
        gamma = ct.build_gamma_sector(math.pi / 4, 0.5)
    return hfunctional_calc(A, C1, log_zpow(b), gamma, tol)


# power relations

def _null_graph(n: int, left, right, rtol: float) -> lr.LinearRelation:
    """Relation {(x, y) : left x + right y = 0}."""
    N = lr.null_space(np.hstack([lr.as_cmatrix(left), lr.as_cmatrix(right)]), rtol)
    return lr.LinearRelation(n, N)


def _power_matrix(A, C1, beta: complex, tol, gamma):
    beta = complex(beta)
    if beta.imag == 0 and float(beta.real).is_integer():
        return integer_neg_power(A, C1, int(beta.real))
    return neg_power(A, C1, PowerSpec(beta), tol, gamma)


def _rank_rtol(tol: float) -> float:
    return max(lr.RANK_RTOL, 10.0 * tol)


def power_relation(A, C1, b: complex, tol: float = 1e-8, gamma=None, matrix=None) -> lr.LinearRelation:
    """(-A)_b: {(x,y): C1 y = (-A)^{b}_{C1} x} for Re b < 0, {(x,y): (-A)^{-b}_{C1} y = C1 x} for Re b > 0.

    ``matrix`` may supply the precomputed (-A)^{-|b|}_{C1}.
    """
    b = complex(b)
    if b.real == 0:
        raise RouteDomain("use imaginary_power_relation for Re b = 0")
    C1 = lr.as_cmatrix(C1)
    n = C1.shape[0]
    if b.real < 0:
        Pm = _power_matrix(A, C1, -b, tol, gamma) if matrix is None else matrix
        return _null_graph(n, Pm, -C1, _rank_rtol(tol))
    Pm = _power_matrix(A, C1, b, tol, gamma) if matrix is None else matrix
    return _null_graph(n, C1, -Pm, _rank_rtol(tol))


def regularized_conjugate(R: lr.LinearRelation, C1) -> lr.LinearRelation:
    """C1^{-1} R C1."""
    Cm = lr.from_matrix(C1)
    return lr.compose(lr.inverse(Cm), lr.compose(R, Cm))


def imaginary_power_relation(A, C1, tau: float, tol: float = 1e-8, gamma=None) -> lr.LinearRelation:
    """(-A)_{i tau} = C1^{-2} (1-A)_2 (-A)_{-1} (-A)_{1+i tau} (1-A)_{-2} C1^2."""
    if tau == 0:
        raise RouteDomain("tau must be nonzero")
    C1 = lr.as_cmatrix(C1)
    n = C1.shape[0]
    rt = _rank_rtol(tol)
    C1sq = C1 @ C1
    # (1-A)_{-2} = {(x,y): C1 y = (1-A)^{-2} C1 x}
    one_minus_inv2 = _null_graph(n, resolvent_power(A, C1, 1.0, 2), -C1, rt)
    one_minus_sq = regularized_conjugate(lr.integer_power(lr.shift(A, 1.0), 2), C1)
    chain = [
        lr.from_matrix(C1sq),
        one_minus_inv2,
        power_relation(A, C1, 1 + 1j * tau, tol, gamma),
        power_relation(A, C1, -1, tol, gamma),
        one_minus_sq,
        lr.inverse(lr.from_matrix(C1sq)),
    ]
    out = chain[0]
    for R in chain[1:]:
        out = lr.compose(R, out)
    return out


def power_membership(A, C1, b: complex, x, y, tol: float = 1e-8, gamma=None, matrix=None):
    """Is (x, y) in (-A)_b? Returns (verdict, residual of the defining matrix equation)."""
    b = complex(b)
    C1 = lr.as_cmatrix(C1)
    x = np.asarray(x, dtype=complex).ravel()
    y = np.asarray(y, dtype=complex).ravel()
    scale = 1.0 + np.linalg.norm(x) + np.linalg.norm(y)
    if b.real > 0:
        Pm = _power_matrix(A, C1, b, tol, gamma) if matrix is None else matrix
        res = float(np.linalg.norm(Pm @ y - C1 @ x))
    elif b.real < 0:
        Pm = _power_matrix(A, C1, -b, tol, gamma) if matrix is None else matrix
        res = float(np.linalg.norm(C1 @ y - Pm @ x))
    else:
        raise RouteDomain("Re b must be nonzero")
    return res <= tol * scale, res


def chain_power_image(A, C1, b: complex, chain_end, k: int, tol: float = 1e-8, gamma=None):
    """Element of (-A)_b (C1 y) built from the end y_k of a chain y -> y_1 -> ... -> y_k in A.

    The chain is taken in A; the value is (-1)^k (z^{b - floor(Re b) - 1})_{C1}(A) y_k.
    """
    b = complex(b)
    m = math.floor(b.real)
    if gamma is None:
        gamma = ct.build_gamma_sector(math.pi / 4, 0.5)
    F = hfunctional_calc(A, C1, zpow(m + 1 - b), gamma, tol)
    return (-1) ** k * F @ np.asarray(chain_end, dtype=complex)


def imaginary_power_image(A, C1, tau: float, u, tol: float = 1e-8, gamma=None):
    """Element of (-A)_{i tau} (C1 y) from some u in (1 - A) y."""
    if gamma is None:
        gamma = ct.build_gamma_sector(math.pi / 4, 0.5)
    f = CalcFunction(lambda z: np.exp(1j * tau * np.log(z)) / (z + 1.0), 1.0, "z^{i tau}/(z+1)")
    return hfunctional_calc(A, C1, f, gamma, tol) @ np.asarray(u, dtype=complex)


def chain_in(A: lr.LinearRelation, y, k: int):
    """A chain y -> y_1 -> ... -> y_k with (y_{j-1}, y_j) in A, or None if y is outside D(A^k)."""
    # solve for all coefficients at once: P c_1 = y, Q c_j = P c_{j+1};
    # stepping greedily can leave D(A^{k-1}) when A is multivalued
    y = np.asarray(y, dtype=complex).ravel()
    n, r = A.dim, A.rank
    M = np.zeros((n * k, r * k), dtype=complex)
    rhs = np.zeros(n * k, dtype=complex)
    M[:n, :r] = A.P
    rhs[:n] = y
    for j in range(1, k):
        M[j * n:(j + 1) * n, (j - 1) * r:j * r] = A.Q
        M[j * n:(j + 1) * n, j * r:(j + 1) * r] = -A.P
    c = np.linalg.lstsq(M, rhs, rcond=None)[0]
    if np.linalg.norm(M @ c - rhs) > 1e-9 * (1 + np.linalg.norm(y)):
        return None
    return [A.Q @ c[j * r:(j + 1) * r] for j in range(k)]
