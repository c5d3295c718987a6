"""Fractional semigroups S_gamma(t) generated by -(-A)^gamma, their integrated and
Laplace-transformed versions, and solvers for the incomplete problems

    D^beta_- u(t) in e^{i theta beta} (-A)_{gamma beta} u(t)    (FP)
    u''(t) in -A u(t)                                           (P2)

For a scalar A = -a everything reduces to S_gamma(t) = exp(-t a^gamma) C1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import contour as ct
from . import linrel as lr
from .errors import InvalidParams, OutOfSector, ToleranceNotMet
from .powers import CalcFunction, hfunctional_calc
from .resolvent import c_resolvent, resolvent_power

DEFAULT_VARTHETA = math.pi / 4
SECTOR_FRACTION = 0.9


@dataclass(frozen=True)
class KernelParams:
    gamma: float
    theta: float = 0.0
    t: complex = 1.0
    vartheta: float = DEFAULT_VARTHETA

    def __post_init__(self):
        if not 0 < self.gamma <= 0.5:
            raise InvalidParams("gamma must lie in (0, 1/2]")
        if not 0 < self.vartheta < math.pi / 2:
            raise InvalidParams("vartheta must lie in (0, pi/2)")
        if abs(self.theta) >= self.vartheta:
            raise InvalidParams("|theta| must be below vartheta")

    @property
    def phi_gamma(self) -> float:
        return phi_gamma(self.gamma, self.vartheta)

    @property
    def eps_t(self) -> complex:
        return self.t * math.cos(math.pi * self.gamma)


def phi_gamma(gamma: float, vartheta: float) -> float:
    """Opening of the analyticity sector of t -> S_gamma(t)."""
    return math.pi / 2 - gamma * (math.pi - vartheta)


def _check_gamma(gamma: float, upper_open: bool = True):
    if not 0 < gamma < 0.5 and not (gamma == 0.5 and not upper_open):
        raise InvalidParams(f"gamma={gamma} outside the admissible range")


# kernels

def f_t_eval(lam: float, t: complex, gamma: float) -> complex:
    """(1/pi) exp(-t lam^g cos(pi g)) sin(t lam^g sin(pi g))."""
    _check_gamma(gamma)
    lg = lam ** gamma
    return complex(np.exp(-t * lg * math.cos(math.pi * gamma)) * np.sin(t * lg * math.sin(math.pi * gamma)) / math.pi)


def q1_bound(lam: float, t: float, gamma: float) -> float:
    return math.exp(-lam ** gamma * t * math.cos(math.pi * gamma)) / math.pi


def q2_bound(lam: float, t: float, gamma: float) -> float:
    """The second pointwise bound on |f_t|, in the form it is usually quoted."""
    eps_t = t * math.cos(math.pi * gamma)
    return gamma * t * lam ** gamma * math.exp(-t * lam ** gamma * math.sin(eps_t))


def kernel_bound_violations(t: float, gamma: float, lams=None, which: str = "q1"):
    """Sample points where |f_t(lam)| exceeds the chosen bound; empty when it holds."""
    if lams is None:
        lams = np.logspace(-6, 8, 400)
    bound = q1_bound if which == "q1" else q2_bound
    out = []
    for lam in lams:
        v, b = abs(f_t_eval(lam, t, gamma)), bound(lam, t, gamma)
        if v > b * (1 + 1e-12) + 1e-300:
            out.append((float(lam), v, b))
    return out


def _direct_rate(z: complex, gamma: float) -> float:
    # decay rate of |exp(-z lam^g e^{+-i pi g})| in lam^g
    return min((z * np.exp(1j * math.pi * gamma)).real, (z * np.exp(-1j * math.pi * gamma)).real)


# S_gamma

def _halfline_sg(A, C1, gamma: float, z: complex, tol: float, rot: float = 0.0):
    """int_0^inf f_z(lam) (lam - e^{i rot} A)^{-1} C1 dlam."""
    rate = _direct_rate(z, gamma)
    if rate <= 0:
        raise OutOfSector(f"time {z} outside the direct sector for gamma={gamma}")
    e_minus, e_plus = np.exp(-1j * math.pi * gamma), np.exp(1j * math.pi * gamma)
    rphase = np.exp(-1j * rot)

    def integrand(lam):
        lg = lam ** gamma
        k = (np.exp(-z * lg * e_minus) - np.exp(-z * lg * e_plus)) / (2j * math.pi)
        return k * rphase * c_resolvent(A, C1, lam * rphase)

    return ct.quad_halfline(integrand, tol, ct.Exponential(rate, gamma), head_power=gamma).value


def sector_branch(z: complex, gamma: float, vartheta: float = DEFAULT_VARTHETA):
    """Rotation angle used to evaluate S_gamma at z: 0 on the direct sector, else +-0.9 vartheta."""
    z = complex(z)
    arg = math.atan2(z.imag, z.real)
    if abs(arg) >= phi_gamma(gamma, vartheta):
        raise OutOfSector(f"|arg z|={abs(arg):.4f} >= phi_gamma={phi_gamma(gamma, vartheta):.4f}")
    if abs(arg) < math.pi / 2 - gamma * math.pi:
        return 0.0
    return math.copysign(SECTOR_FRACTION * vartheta, arg)


def evaluate_sg(A: lr.LinearRelation, C1, gamma: float, z: complex, tol: float = 1e-8,
                vartheta: float = DEFAULT_VARTHETA, route: str = "halfline", rotation: float | None = None):
    """S_gamma(z) on the sector |arg z| < phi_gamma; S_gamma(0) = C1.

    route="halfline" integrates f_z against the (possibly rotated) resolvent;
    route="contour" evaluates (exp(-z w^gamma))_{C1}(A) on a sector contour.
    ``rotation`` forces the branch angle instead of the automatic choice.
    """
    _check_gamma(gamma)
    C1 = lr.as_cmatrix(C1)
    z = complex(z)
    if z == 0:
        return C1.copy()
    if route == "contour":
        return _contour_sg(A, C1, gamma, z, tol, vartheta)
    rot = sector_branch(z, gamma, vartheta) if rotation is None else rotation
    if abs(rot) >= vartheta:
        raise OutOfSector("rotation must stay below vartheta")
    return _halfline_sg(A, C1, gamma, z * np.exp(-1j * gamma * rot), tol, rot)


def _sector_contour(vartheta: float, d: float = 0.5):
    return ct.build_gamma_sector(SECTOR_FRACTION * vartheta, d)


def _contour_sg(A, C1, gamma, z, tol, vartheta):
    contour = _sector_contour(vartheta)
    opening = contour.meta["asymptotic_angle"]
    rate = min((z * np.exp(1j * gamma * opening)).real, (z * np.exp(-1j * gamma * opening)).real)
    if rate <= 0:
        raise OutOfSector(f"time {z} not reachable on the contour for gamma={gamma}")
    f = CalcFunction(lambda w: np.exp(-z * np.exp(gamma * np.log(w))), 0.0, f"exp(-z w^{gamma})",
                     ct.Exponential(rate, gamma))
    return hfunctional_calc(A, C1, f, contour, tol)


def _contour_many(A, C1, gamma, times, tol, vartheta):
    # one contour quadrature with a stacked integrand over all times
    contour = _sector_contour(vartheta)
    opening = contour.meta["asymptotic_angle"]
    rate = float(np.min(times)) * math.cos(gamma * opening)
    f = CalcFunction(lambda w: np.exp(-times * np.exp(gamma * np.log(w)))[:, None, None], 0.0,
                     "exp(-t w^gamma) stacked", ct.Exponential(rate, gamma))
    return hfunctional_calc(A, C1, f, contour, tol)


# S_{1/2}

def _half_kernel_tail(A, C1, t: float, X: float):
    """Two integration-by-parts terms of the x-integral over [X, inf)."""
    lam = X * X
    R2 = resolvent_power(A, C1, lam, 2)
    R3 = resolvent_power(A, C1, lam, 3)
    c = 4.0 / (math.pi * t * t)
    G = c * X * R2
    H = -c * t * X * X * R2
    dG = c * (R2 - 4 * X * X * R3)
    dH = -c * t * (2 * X * R2 - 4 * X ** 3 * R3)
    s, co = math.sin(t * X), math.cos(t * X)
    return (co * G - s * H) / t - (s * dG + co * dH) / (t * t)


def _sg_half_kernel(A, C1, t: float, tol: float):
    # lam = x^2 turns the kernel into sin(t x) - t x cos(t x) against 2x (x^2 - A)^{-2} C1
    c = 4.0 / (math.pi * t * t)

    def integrand(x):
        return c * x * (math.sin(t * x) - t * x * math.cos(t * x)) * resolvent_power(A, C1, x * x, 2)

    # after two correction terms the next boundary term is about 8 X^-4 / t^3
    scale = max(1.0, float(np.max(np.abs(C1))))
    X = max(20.0 / t, (10.0 * scale / (tol * t ** 3)) ** 0.25)
    X = 2 * math.pi / t * math.ceil(X * t / (2 * math.pi))
    head = ct.quad_interval(integrand, 0.0, X, tol / 2).value
    return head + _half_kernel_tail(A, C1, t, X)


def evaluate_sg_half(A: lr.LinearRelation, C1, t: complex, tol: float = 1e-8,
                     vartheta: float = DEFAULT_VARTHETA, route: str | None = None):
    """S_{1/2}(t): the oscillatory kernel for real t > 0, the contour representation otherwise."""
    C1 = lr.as_cmatrix(C1)
    t = complex(t)
    if t == 0:
        return C1.copy()
    if abs(math.atan2(t.imag, t.real)) >= phi_gamma(0.5, vartheta):
        raise OutOfSector(f"time {t} outside the sector of opening {vartheta / 2:.4f}")
    if route is None:
        route = "kernel" if t.imag == 0 else "contour"
    if route == "kernel":
        if t.imag != 0 or t.real <= 0:
            raise OutOfSector("the kernel route needs real t > 0")
        return _sg_half_kernel(A, C1, t.real, tol)
    return _contour_sg(A, C1, 0.5, t, tol, vartheta)


def evaluate_sg_any(A, C1, gamma: float, z: complex, tol: float = 1e-8, vartheta: float = DEFAULT_VARTHETA):
    if gamma == 0.5:
        return evaluate_sg_half(A, C1, z, tol, vartheta)
    return evaluate_sg(A, C1, gamma, z, tol, vartheta)


# integrated families

def evaluate_sg_integrated(A: lr.LinearRelation, C1, gamma: float, zeta: float, t: float, tol: float = 1e-8,
                           vartheta: float = DEFAULT_VARTHETA):
    """S_{gamma,zeta}(t) = int_0^t g_zeta(t - s) S_gamma(s) ds.

    The weakly singular weight (t - s)^{zeta - 1} is absorbed by Gauss-Jacobi nodes;
    the rule is doubled until two successive orders agree.
    """
    if zeta < 0:
        raise InvalidParams("zeta must be nonnegative")
    if zeta == 0:
        return evaluate_sg_any(A, C1, gamma, t, tol, vartheta)
    C1 = lr.as_cmatrix(C1)
    if t == 0:
        return np.zeros_like(C1)
    # s = t (1 + x) / 2 maps the weight to (t/2)^zeta (1 - x)^{zeta - 1} / Gamma(zeta)
    coef = (t / 2) ** zeta / special.gamma(zeta)
    inner_tol = tol / (10.0 * max(1.0, coef * 2 ** zeta / zeta))
    prev = None
    for order in (8, 16, 32, 64, 128):
        x, wt = special.roots_jacobi(order, zeta - 1.0, 0.0)
        vals = sg_many(A, C1, gamma, t * (1 + x) / 2, inner_tol, vartheta)
        cur = coef * np.tensordot(wt, vals, axes=1)
        if prev is not None:
            diff = float(np.max(np.abs(cur - prev)))
            if diff <= tol / 2:
                return cur
        prev = cur
    raise ToleranceNotMet(diff, tol / 2, "integrated semigroup")


def sg_many(A, C1, gamma: float, times, tol: float = 1e-8, vartheta: float = DEFAULT_VARTHETA):
    """S_gamma at several positive times sharing one lambda-quadrature; shape (len(times), n, n)."""
    C1 = lr.as_cmatrix(C1)
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0):
        raise OutOfSector("sg_many needs positive times")
    if gamma == 0.5:
        return _contour_many(A, C1, gamma, times, tol, vartheta)
    _check_gamma(gamma)
    rate = float(np.min(times)) * math.cos(math.pi * gamma)
    e_minus, e_plus = np.exp(-1j * math.pi * gamma), np.exp(1j * math.pi * gamma)

    def integrand(lam):
        lg = lam ** gamma
        k = (np.exp(-times * lg * e_minus) - np.exp(-times * lg * e_plus)) / (2j * math.pi)
        return k[:, None, None] * c_resolvent(A, C1, lam)[None]

    return ct.quad_halfline(integrand, tol, ct.Exponential(rate, gamma), head_power=gamma).value


# Laplace transforms

def F_lambda_eval(A: lr.LinearRelation, C1, gamma: float, theta: float, lam: complex, tol: float = 1e-8):
    """Laplace transform of t -> S_{theta,gamma}(t) at lam e^{i theta gamma}, as a v-integral."""
    if not 0 < gamma <= 0.5:
        raise InvalidParams("gamma must lie in (0, 1/2]")
    lam = complex(lam)
    mu = lam * np.exp(1j * theta * gamma)
    if mu == 0 or abs(math.atan2(mu.imag, mu.real)) >= math.pi - gamma * math.pi:
        raise OutOfSector(f"lambda={lam} outside the Laplace window")
    sg, cg = math.sin(gamma * math.pi), math.cos(gamma * math.pi)
    rphase = np.exp(-1j * theta)

    def integrand(v):
        vg = v ** gamma
        w = vg / ((mu + vg * cg) ** 2 + vg * vg * sg * sg)
        return w * rphase * c_resolvent(A, C1, v * rphase)

    return sg / math.pi * ct.quad_halfline(integrand, tol * math.pi / sg, ct.Algebraic(gamma),
                                           head_power=gamma).value


def F_half_eval(A: lr.LinearRelation, C1, lam: complex, tol: float = 1e-8):
    """(1/pi) int_0^inf sqrt(nu) / (lam^2 + nu) (nu - A)^{-1} C1 dnu."""
    lam = complex(lam)
    if lam == 0 or abs(math.atan2(lam.imag, lam.real)) >= math.pi / 2:
        raise OutOfSector("lambda must have positive real part")

    def integrand(nu):
        return math.sqrt(nu) / (lam * lam + nu) * c_resolvent(A, C1, nu)

    return ct.quad_halfline(integrand, tol * math.pi, ct.Algebraic(0.5), head_power=0.5).value / math.pi


def laplace_of_sg_half(A, C1, lam: float, x, tol: float = 1e-8, vartheta: float = DEFAULT_VARTHETA):
    """int_0^inf e^{-lam t} S_{1/2}(t) x dt by Gauss-Laguerre rules doubled until stable."""
    x = np.asarray(x, dtype=complex)
    if lam <= 0:
        raise OutOfSector("lambda must be positive")
    prev = None
    for order in (16, 32, 64, 128):
        u, w = special.roots_laguerre(order)
        vals = sg_many(A, C1, 0.5, u / lam, tol / 10, vartheta)
        cur = np.tensordot(w, vals, axes=1) @ x / lam
        if prev is not None:
            diff = float(np.max(np.abs(cur - prev)))
            if diff <= tol / 2:
                return cur
        prev = cur
    raise ToleranceNotMet(diff, tol / 2, "Laplace transform")


# identities used by the verifier

def fractional_rhs(A, C1, gamma: float, beta: float, theta: float, t: float, x, tol: float = 1e-8):
    """Closed-form lambda-integral for D^beta_- S_gamma(t e^{i theta}) x."""
    z = t * np.exp(1j * theta)
    rate = _direct_rate(z, gamma)
    if rate <= 0:
        raise OutOfSector("t e^{i theta} outside the direct sector")
    x = np.asarray(x, dtype=complex)
    gb = gamma * beta
    em, ep = np.exp(-1j * math.pi * gamma), np.exp(1j * math.pi * gamma)
    cm, cp = np.exp(-1j * gb * math.pi), np.exp(1j * gb * math.pi)

    def integrand(lam):
        lg = lam ** gamma
        k = lam ** gb * (cm * np.exp(-z * lg * em) - cp * np.exp(-z * lg * ep))
        return k * (c_resolvent(A, C1, lam) @ x)

    val = ct.quad_halfline(integrand, tol, ct.Exponential(rate, gamma), head_power=gb).value
    return np.exp(1j * theta * beta) / (2j * math.pi) * val


def an_moment(A, C1, gamma: float, t: float, n: int, x, tol: float = 1e-8):
    """int_0^inf lam^n f_t(lam) (lam - A)^{-1} C1 x dlam, an element of A^n S_gamma(t) x.

    For A = -a the vanishing moments of f_t leave exactly (-a)^n S_gamma(t).
    """
    x = np.asarray(x, dtype=complex)
    rate = _direct_rate(complex(t), gamma)

    def integrand(lam):
        return lam ** n * f_t_eval(lam, t, gamma) * (c_resolvent(A, C1, lam) @ x)

    return ct.quad_halfline(integrand, tol, ct.Exponential(rate, gamma), head_power=n + gamma).value


def kernel_moment_mass(t: float, gamma: float, n: int) -> float:
    """int_0^inf lam^{n-1} |f_t(lam)| dlam; the cancellation scale of an_moment."""
    rate = _direct_rate(complex(t), gamma)
    return float(ct.quad_halfline(lambda lam: lam ** (n - 1) * abs(f_t_eval(lam, t, gamma)), 1e-3,
                                  ct.Exponential(rate, gamma), head_power=n - 1 + gamma).value.real)


def second_difference(fun, t: float, h: float):
    return (fun(t + h) - 2 * fun(t) + fun(t - h)) / (h * h)


# incomplete problems

@dataclass(frozen=True)
class FPBeta:
    beta: float
    theta: float = 0.0
    gamma: float = 0.25
    tag: str = "FP_beta"


@dataclass(frozen=True)
class P2:
    tag: str = "P2"


@dataclass
class Trajectory:
    times: list
    states: list
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise InvalidParams("times must be strictly increasing")
        if not all(np.all(np.isfinite(s)) for s in self.states):
            raise InvalidParams("non-finite state in trajectory")

    def as_rows(self):
        rows = []
        for t, u in zip(self.times, self.states):
            row = [t]
            for c in u:
                row += [float(c.real), float(c.imag)]
            rows.append(row)
        return rows


def solve_incomplete(A: lr.LinearRelation, C1, problem, x, times, tol: float = 1e-8,
                     vartheta: float = DEFAULT_VARTHETA) -> Trajectory:
    """u(t) = S_gamma(t e^{i theta}) x for FPBeta, u(t) = S_{1/2}(t) x for P2."""
    x = np.asarray(x, dtype=complex).ravel()
    times = [float(t) for t in times]
    if any(t <= 0 for t in times):
        raise InvalidParams("times must be positive")
    states = []
    if isinstance(problem, FPBeta):
        KernelParams(problem.gamma, problem.theta, 1.0, vartheta)
        for t in times:
            states.append(evaluate_sg(A, C1, problem.gamma, t * np.exp(1j * problem.theta), tol, vartheta) @ x)
        meta = {"problem": problem.tag, "beta": problem.beta, "theta": problem.theta, "gamma": problem.gamma}
    elif isinstance(problem, P2):
        for t in times:
            states.append(evaluate_sg_half(A, C1, t, tol, vartheta) @ x)
        meta = {"problem": problem.tag, "gamma": 0.5}
    else:
        raise InvalidParams(f"unknown problem {problem!r}")
    return Trajectory(times, states, meta)
