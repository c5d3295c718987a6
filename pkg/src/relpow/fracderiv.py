"""Right-sided Liouville fractional derivatives on (0, inf).

The modified derivative of order beta > 0, with m = ceil(beta), is

    D^beta_- u(s) = (-1)^m d^{m-1}/ds^{m-1} int_s^inf g_{m-beta}(t - s) u'(t) dt,

and the classical one differentiates int_s^inf g_{m-beta}(t - s) u(t) dt m times.
Integer orders reduce to (-1)^n u^{(n)}(s).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import contour as ct
from .errors import InvalidParams, TailBoundMissing


def gzeta_eval(zeta: float, t):
    """g_zeta(t) = t^{zeta-1} / Gamma(zeta)."""
    if zeta <= 0:
        raise InvalidParams("zeta must be positive")
    return np.power(t, zeta - 1.0) / special.gamma(zeta)


@dataclass(frozen=True)
class FracParams:
    beta: float
    tail_T: float | None = None
    h: float | None = None

    def __post_init__(self):
        if self.beta <= 0:
            raise InvalidParams("beta must be positive")

    @property
    def ceil_beta(self) -> int:
        return math.ceil(self.beta)

    @property
    def kernel_order(self) -> float:
        return self.ceil_beta - self.beta

    @property
    def is_integer(self) -> bool:
        return self.kernel_order == 0


def stencil(n: int, p: int):
    """Central finite-difference weights for the n-th derivative on offsets -p..p."""
    k = np.arange(-p, p + 1, dtype=float)
    V = np.vander(k, increasing=True).T
    rhs = np.zeros(2 * p + 1)
    rhs[n] = math.factorial(n)
    return k, np.linalg.solve(V, rhs)


def central_derivative(f, s: float, n: int, h: float):
    """n-th derivative of f at s, fourth-order accurate."""
    if n == 0:
        return np.asarray(f(s))
    p = (n + 1) // 2 + 1
    k, w = stencil(n, p)
    if s - p * h <= 0:
        raise InvalidParams(f"step h={h} reaches outside (0, inf) at s={s}")
    return sum(wi * np.asarray(f(s + ki * h)) for ki, wi in zip(k, w) if wi != 0) / h ** n


def default_step(n: int, s: float, tol: float) -> float:
    # balances the O(h^4) truncation against tol / h^n rounding of f
    p = (n + 1) // 2 + 1
    return min(tol ** (1.0 / (n + 4)) * max(s, 1.0), s / (p + 1))


def _tail_decay(decay):
    if decay is None:
        raise TailBoundMissing("a decay bound for u is needed to truncate the tail integral")
    return decay


def _weakly_singular(phi, kappa: float, tol: float, decay):
    """int_0^inf g_kappa(r) phi(r) dr; r = rho^{1/kappa} on [0, 1] removes the singularity."""
    c = 1.0 / special.gamma(kappa + 1.0)
    head = ct.quad_interval(lambda rho: phi(rho ** (1.0 / kappa)), 0.0, 1.0, tol / (2 * c)).value * c
    g = special.gamma(kappa)
    v, err, tail = ct.quad_ray(lambda r: r ** (kappa - 1.0) / g * np.asarray(phi(r), dtype=complex),
                               1.0, decay, tol / 2)
    return head + v


def liouville_right_deriv(u, beta: float, s: float, tol: float = 1e-8, decay=None, du=None,
                          h: float | None = None, variant: str = "modified"):
    """D^beta_- u(s) for a map u: (0, inf) -> C^n.

    ``decay`` (a contour.Exponential or Algebraic) bounds u and u' for the tail integral;
    ``du`` supplies u' when known, otherwise it is differenced.
    """
    fp = FracParams(beta, h=h)
    m = fp.ceil_beta
    if variant not in ("modified", "classical"):
        raise InvalidParams(f"unknown variant {variant!r}")
    if fp.is_integer:
        if m == 1 and du is not None:
            return -np.asarray(du(s))
        step = h or default_step(m, s, tol)
        return (-1) ** m * central_derivative(u, s, m, step)
    kappa = fp.kernel_order
    dec = _tail_decay(decay)
    if variant == "modified":
        if du is None:
            def du(t):
                return central_derivative(u, t, 1, default_step(1, t, tol * 1e-2))
        integrand_fn, outer = du, m - 1
    else:
        integrand_fn, outer = u, m

    def inner(x):
        return _weakly_singular(lambda r: integrand_fn(x + r), kappa, tol * 1e-2, dec)

    if outer == 0:
        return (-1) ** m * inner(s)
    step = h or default_step(outer, s, tol * 1e-2)
    return (-1) ** m * central_derivative(inner, s, outer, step)
