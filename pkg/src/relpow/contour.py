"""Integration paths around the negative real axis and the quadrature engine.

Paths are oriented counterclockwise around (-inf, 0]: the lower ray comes in
from infinity, the arc passes through the positive real axis, the upper ray
goes back out. Winding number around -1 is therefore +1.

Rays are integrated in pairs (upper minus lower at the same parameter), which
keeps tails of symmetric integrands short. Algebraic tails are mapped onto a
finite interval by r = r0 * u^(-1/s), which turns an r^(-1-s) decay into an
integrand that is bounded near u = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import InvalidParams, ToleranceNotMet


@dataclass(frozen=True)
class Segment:
    kind: str                      # "arc" | "ray" | "segment"
    z: Callable[[float], complex]
    dz: Callable[[float], complex]
    t0: float
    t1: float                      # may be inf for rays
    sign: int = 1                  # +1 runs t0 -> t1, -1 runs t1 -> t0

    def start(self) -> complex:
        return self.z(self.t0) if self.sign > 0 else self.z(self.t1)

    def end(self) -> complex:
        return self.z(self.t1) if self.sign > 0 else self.z(self.t0)


@dataclass(frozen=True)
class Contour:
    lower: Segment
    arc: Segment
    upper: Segment
    label: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def segments(self) -> list:
        return [self.lower, self.arc, self.upper]

    def junction_gap(self) -> float:
        return max(abs(self.lower.z(self.lower.t0) - self.arc.start()),
                   abs(self.arc.end() - self.upper.z(self.upper.t0)))

    def sample(self, m: int = 50, rmax: float = 50.0) -> np.ndarray:
        """Points along the path in traversal order (rays cut at rmax)."""
        lo = self.lower
        rs = np.linspace(lo.t0, lo.t0 + rmax, m)
        phis = np.linspace(self.arc.t0, self.arc.t1, m)
        pts = [lo.z(r) for r in rs[::-1]] + [self.arc.z(p) for p in phis] + [self.upper.z(r) for r in rs]
        return np.array(pts)

    def to_json(self, m: int = 8) -> dict:
        segs = []
        for s in self.segments:
            t1 = s.t1 if math.isfinite(s.t1) else s.t0 + 10.0
            ts = np.linspace(s.t0, t1, m)
            segs.append({"kind": s.kind, "t0": s.t0, "t1": s.t1 if math.isfinite(s.t1) else "inf",
                         "sign": s.sign, "points": [[s.z(t).real, s.z(t).imag] for t in ts]})
        return {"label": self.label, "meta": self.meta, "segments": segs}


def _arc(radius: float, phi0: float) -> Segment:
    return Segment("arc", lambda p: radius * np.exp(1j * p), lambda p: 1j * radius * np.exp(1j * p),
                   -phi0, phi0, 1)


def build_gamma(params) -> Contour:
    """Boundary of -(P(alpha,eps,c) with B_d): rays eta = -/+ c(1+|xi|)^(-alpha) for xi <= -eps plus the arc |z| = d."""
    alpha, eps, c, d = params.alpha, params.eps, params.c, params.d
    if not (0 < eps <= 1 and 0 < c < 1 and 0 < d <= 1 and alpha >= -1):
        raise InvalidParams("need eps in (0,1], c in (0,1), d in (0,1], alpha >= -1")
    h0 = c * (1 + eps) ** (-alpha)
    if abs(eps * eps + h0 * h0 - d * d) > 1e-9:
        raise InvalidParams("coupling constraint eps^2 + c^2 (1+eps)^(-2 alpha) = d^2 violated")

    def h(r):
        return c * (1 + r) ** (-alpha)

    def dh(r):
        return -alpha * c * (1 + r) ** (-alpha - 1)

    lower = Segment("ray", lambda r: complex(-r, -h(r)), lambda r: complex(-1.0, -dh(r)), eps, math.inf, -1)
    upper = Segment("ray", lambda r: complex(-r, h(r)), lambda r: complex(-1.0, dh(r)), eps, math.inf, 1)
    phi0 = math.atan2(h0, -eps)
    # direction of the upper ray at infinity
    asym = math.pi - math.atan(c) if alpha == -1 else math.pi
    return Contour(lower, _arc(d, phi0), upper, "gamma",
                   {"alpha": alpha, "eps": eps, "c": c, "d": d, "asymptotic_angle": asym})


def build_sector_contour(opening: float, radius: float, label: str = "sector") -> Contour:
    """Rays arg z = -/+ opening for |z| >= radius joined by the arc |z| = radius through z = radius."""
    if not 0 < opening < math.pi or radius <= 0:
        raise InvalidParams("opening must lie in (0, pi) and radius must be positive")
    e_up, e_lo = np.exp(1j * opening), np.exp(-1j * opening)
    lower = Segment("ray", lambda r: r * e_lo, lambda r: e_lo, radius, math.inf, -1)
    upper = Segment("ray", lambda r: r * e_up, lambda r: e_up, radius, math.inf, 1)
    return Contour(lower, _arc(radius, opening), upper, label,
                   {"opening": opening, "radius": radius, "asymptotic_angle": opening})


def build_gamma_sector(theta: float, d: float) -> Contour:
    """Boundary of -(Sigma_theta with B_d)."""
    if not 0 < theta < math.pi / 2 or not 0 < d <= 1:
        raise InvalidParams("theta must lie in (0, pi/2) and d in (0, 1]")
    c = build_sector_contour(math.pi - theta, d, "gamma_sector")
    return Contour(c.lower, c.arc, c.upper, c.label,
                   {"theta": theta, "d": d, "asymptotic_angle": c.meta["asymptotic_angle"]})


def contour_for(params) -> Contour:
    return build_gamma(params) if params.mode == "H" else build_gamma_sector(params.theta, params.d)


# quadrature

@dataclass
class QuadResult:
    value: np.ndarray
    est_error: float
    tail_bound: float
    evaluations: int

    def __iter__(self):
        yield self.value
        yield self.est_error


@dataclass(frozen=True)
class Algebraic:
    """Integrand norm decays like r^(-1-s)."""
    s: float


@dataclass(frozen=True)
class Exponential:
    """Integrand norm decays like exp(-rate * r^power)."""
    rate: float
    power: float = 1.0


class _Counter:
    def __init__(self, fun):
        self.fun = fun
        self.n = 0

    def __call__(self, t):
        self.n += 1
        return np.asarray(self.fun(t), dtype=complex)


def _quad(fun, a: float, b: float, tol: float, limit: int = 4000):
    """Adaptive Gauss-Kronrod on [a, b] for array-valued complex integrands."""
    if b <= a:
        v = np.asarray(fun(a), dtype=complex)
        return np.zeros_like(v), 0.0
    res, err, info = integrate.quad_vec(fun, a, b, epsabs=tol, epsrel=0.0, norm="max",
                                        limit=limit, full_output=True)
    if not info.success and err > tol:
        raise ToleranceNotMet(err, tol, "adaptive quadrature")
    return np.asarray(res, dtype=complex), float(err)


def _algebraic_tail(fun, r0: float, s: float, tol: float):
    """Integral of fun over [r0, inf) with |fun(r)| ~ r^(-1-s), via r = r0 u^(-1/s)."""
    def mapped(u):
        r = r0 * u ** (-1.0 / s)
        return fun(r) * (r0 / s) * u ** (-1.0 / s - 1.0)

    k = max(float(np.max(np.abs(mapped(u)))) for u in (1e-2, 1e-3, 1e-4))
    k = max(k, 1e-300)
    u_min = min(1e-2, tol / (20.0 * k))
    # guard against overflow of r for tiny u
    u_min = max(u_min, (r0 / 1e150) ** s)
    val, err = _quad(mapped, u_min, 1.0, tol / 2)
    return val, err, 2.0 * k * u_min


def _exp_tail_integral(rate: float, power: float, R: float) -> float:
    # integral over [R, inf) of exp(-rate r^power)
    a = rate * R ** power
    return float(special.gammaincc(1.0 / power, a) * special.gamma(1.0 / power) / (power * rate ** (1.0 / power)))


def _exponential_cut(fun, r0: float, dec: Exponential, tol: float):
    """Truncation point R with sampled envelope tail bound <= tol/10."""
    # a reduced rate absorbs polynomial prefactors into the envelope
    rate = 0.8 * dec.rate
    R = max(r0 + 1.0, 1.0)
    for _ in range(200):
        rs = np.linspace(R / 2 if R / 2 > r0 else r0, R, 9)
        k = max(float(np.max(np.abs(fun(r)))) * math.exp(rate * r ** dec.power) for r in rs)
        bound = k * _exp_tail_integral(rate, dec.power, R)
        if bound <= tol / 10:
            return R, bound
        R *= 1.5
    raise ToleranceNotMet(bound, tol / 10, "exponential tail truncation")


def quad_ray(fun, r0: float, decay, tol: float):
    """Integral of fun over [r0, inf) under the declared decay. Returns (value, err, tail, )."""
    if isinstance(decay, Algebraic):
        near = r0 + 1.0
        v1, e1 = _quad(fun, r0, near, tol / 2)
        v2, e2, tail = _algebraic_tail(fun, near, decay.s, tol / 2)
        return v1 + v2, e1 + e2, tail
    if isinstance(decay, Exponential) and decay.power != 1.0:
        # integrate in v = r^power, where the decay is plain exponential
        q = decay.power

        def g(v):
            return fun(v ** (1.0 / q)) * (v ** (1.0 / q - 1.0) / q)

        return quad_ray(g, r0 ** q, Exponential(decay.rate, 1.0), tol)
    if isinstance(decay, Exponential):
        R, tail = _exponential_cut(fun, r0, decay, tol)
        v, e = _quad(fun, r0, R, tol * 0.9)
        return v, e, tail
    raise TypeError("decay must be Algebraic or Exponential")


def quad_contour(f, gamma: Contour, tol: float = 1e-8, decay=Algebraic(1.0)) -> QuadResult:
    """(1/(2 pi i)) times the integral of f(z) dz along the oriented contour.

    ``decay`` describes the paired ray integrand f(z_up) z_up' - f(z_lo) z_lo'.
    """
    f = _Counter(f)
    arc, lo, up = gamma.arc, gamma.lower, gamma.upper

    def arc_fun(p):
        return f(arc.z(p)) * arc.dz(p)

    def ray_fun(r):
        return f(up.z(r)) * up.dz(r) - f(lo.z(r)) * lo.dz(r)

    va, ea = _quad(arc_fun, arc.t0, arc.t1, tol / 3)
    vr, er, tail = quad_ray(ray_fun, up.t0, decay, tol / 2)
    err = (ea + er) / (2 * math.pi)
    tail /= 2 * math.pi
    if err > tol or tail > tol:
        raise ToleranceNotMet(max(err, tail), tol, "contour quadrature")
    return QuadResult((va + vr) / (2j * math.pi), err, tail, f.n)


def quad_halfline(f, tol: float = 1e-8, decay=Algebraic(1.0), head_power: float = 0.0,
                  split: float = 1.0) -> QuadResult:
    """Integral of f over (0, inf).

    ``head_power`` is the exponent rho with f(lam) ~ lam^rho near 0 (rho > -1); the head
    [0, split] is mapped by lam = split * u^(1/(1+rho)) so that the integrand is bounded.
    """
    if head_power <= -1:
        raise ValueError("head_power must exceed -1")
    if isinstance(decay, Exponential) and decay.power != 1.0:
        # stretched exponential: integrate in v = lam^power, where the decay is plain exponential
        q = decay.power
        inner = _Counter(f)

        def g(v):
            return inner(v ** (1.0 / q)) * (v ** (1.0 / q - 1.0) / q)

        res = quad_halfline(g, tol, Exponential(decay.rate, 1.0), (head_power + 1.0) / q - 1.0, split ** q)
        res.evaluations = inner.n
        return res
    f = _Counter(f)
    p = 1.0 / (1.0 + head_power)

    def head(u):
        return f(split * u ** p) * split * p * u ** (p - 1.0)

    vh, eh = _quad(head, 0.0, 1.0, tol / 3)
    vt, et, tail = quad_ray(f, split, decay, tol / 2)
    err = eh + et
    if err > tol or tail > tol:
        raise ToleranceNotMet(max(err, tail), tol, "half-line quadrature")
    return QuadResult(vh + vt, err, tail, f.n)


def quad_interval(f, a: float, b: float, tol: float = 1e-8) -> QuadResult:
    f = _Counter(f)
    v, e = _quad(f, a, b, tol)
    return QuadResult(v, e, 0.0, f.n)


def winding_number(gamma: Contour, point: complex, tol: float = 1e-9) -> float:
    """Winding number of the path closed by the arc at infinity through the negative axis."""
    res = quad_contour(lambda z: 1.0 / (z - point), gamma, tol)
    closing = (2 * math.pi - 2 * gamma.meta["asymptotic_angle"]) / (2 * math.pi)
    return float(np.real(res.value)) + closing
