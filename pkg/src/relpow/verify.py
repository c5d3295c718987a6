"""Residual suites for the identities of the calculus.

Every identity is checked as "reference side == claimed side". The reference
side is computed from the instance; the claimed side from ``alt``, which is
the same instance unless a perturbation is requested. A perturbed run moves
the claimed side to A + delta E (see ProblemSpec.perturbed), so a working
suite must report failure.
"""
from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import contour as ct
from . import fracderiv as fd
from . import linrel as lr
from . import powers as pw
from . import semigroup as sg
from .errors import InvalidParams, RelpowError, UnknownIdentity
from .problem import ProblemSpec
from .resolvent import c_resolvent, finite_eigenvalues, resolvent_power


@dataclass
class ResidualReport:
    identity_id: str
    samples: list
    max_residual: float
    tol: float
    passed: bool
    runtime_ms: int = field(default=0, compare=False)
    errors: list = field(default_factory=list)

    def to_json(self, timing: bool = False) -> dict:
        out = {"identity_id": self.identity_id,
               "samples": [[d, _finite_or_none(r)] for d, r in self.samples],
               "max_residual": _finite_or_none(self.max_residual),
               "tol": self.tol, "pass": self.passed,
               "runtime_ms": self.runtime_ms if timing else 0}
        if self.errors:
            out["errors"] = [list(e) for e in self.errors]
        return out

    @classmethod
    def from_json(cls, blob: dict) -> "ResidualReport":
        def back(r):
            return math.inf if r is None else float(r)
        return cls(blob["identity_id"], [(d, back(r)) for d, r in blob["samples"]],
                   back(blob["max_residual"]), float(blob["tol"]), bool(blob["pass"]),
                   int(blob.get("runtime_ms", 0)), [tuple(e) for e in blob.get("errors", [])])


def _finite_or_none(r):
    return float(r) if math.isfinite(r) else None


def digest(params) -> str:
    text = json.dumps(params, sort_keys=True, default=repr)
    return hashlib.sha256(text.encode()).hexdigest()[:12]


# sampling

def halton(dim: int, count: int, seed: int, salt: str) -> np.ndarray:
    # each identity gets its own stream so that reports do not depend on run order
    s = int(hashlib.sha256(f"{seed}:{salt}".encode()).hexdigest()[:8], 16)
    return qmc.Halton(d=dim, scramble=True, seed=s).random(count)


def region_point(region, u0: float, u1: float) -> complex:
    """Map a unit-square point into the region (|lambda| <= 10)."""
    r = 0.1 * 100.0 ** u0
    if r <= 0.9 * region.d:
        return complex(r * np.exp(1j * math.pi * 0.95 * (2 * u1 - 1)))
    if region.mode == "HS":
        return complex(r * np.exp(1j * 0.9 * region.theta * (2 * u1 - 1)))
    xi = max(region.eps, r)
    return complex(xi, 0.9 * region.c * (1 + xi) ** (-region.alpha) * (2 * u1 - 1))


def region_points(spec: ProblemSpec, count: int, seed: int, salt: str, per: int = 1, min_gap: float = 0.2):
    """``count`` tuples of ``per`` region points, pairwise at least min_gap apart."""
    out = []
    u = halton(2 * per, 8 * count + 8, seed, salt)
    for row in u:
        pts = [region_point(spec.region, row[2 * j], row[2 * j + 1]) for j in range(per)]
        if all(spec.region.contains(p) for p in pts) and all(
                abs(a - b) >= min_gap for i, a in enumerate(pts) for b in pts[i + 1:]):
            out.append(pts)
        if len(out) == count:
            break
    return out


def _rel(L, R) -> float:
    L, R = np.asarray(L), np.asarray(R)
    return float(np.linalg.norm(L - R) / max(1.0, np.linalg.norm(L), np.linalg.norm(R)))


class Context:
    """Instance data shared by the suites: reference and claimed-side instances plus settings."""

    def __init__(self, spec: ProblemSpec, tol: float, samples: int, seed: int, delta: float = 0.0):
        self.ref = spec
        self.alt = spec.perturbed(delta) if delta else spec
        self.delta = delta
        self.tol = tol
        self.samples = samples
        self.seed = seed
        cfg = spec.defaults
        self.qtol = min(cfg["tol_quadrature"], tol / 5)
        self.gamma = float(cfg["gamma"])

    @property
    def contour(self):
        return ct.contour_for(self.ref.region)

    @property
    def vartheta(self) -> float:
        if self.ref.region.mode != "HS":
            raise InvalidParams("semigroup identities need a sector region (mode HS)")
        return self.ref.region.theta


# algebraic identities

def _res(spec: ProblemSpec, lam, C=None):
    return c_resolvent(spec.A, spec.C if C is None else C, lam)


def id_resolvent_eq(ctx: Context):
    C2 = ctx.ref.C @ ctx.ref.C
    for lam, mu in region_points(ctx.ref, ctx.samples, ctx.seed, "resolvent_eq", 2):
        lhs = _res(ctx.ref, lam, C2) - _res(ctx.ref, mu, C2)
        rhs = (mu - lam) * _res(ctx.alt, lam) @ _res(ctx.alt, mu)
        commute = _rel(_res(ctx.ref, lam) @ _res(ctx.ref, mu), _res(ctx.alt, mu) @ _res(ctx.alt, lam))
        yield {"lambda": [lam, mu]}, max(_rel(lhs, rhs), commute)


def _cauchy_derivative(fun, lam: complex, order: int, radius: float, nodes: int = 64):
    # trapezoid rule on a circle: exponentially accurate for analytic fun
    th = 2 * math.pi * np.arange(nodes) / nodes
    acc = sum(fun(lam + radius * np.exp(1j * t)) * np.exp(-1j * order * t) for t in th)
    return math.factorial(order) * acc / (nodes * radius ** order)


def id_creso(ctx: Context):
    ev = finite_eigenvalues(ctx.ref.A)
    for (lam,), n in zip(region_points(ctx.ref, ctx.samples, ctx.seed, "creso"), _cycle((2, 3, 4))):
        dist = float(np.min(np.abs(ev - lam))) if ev.size else 1.0
        radius = 0.25 * min(1.0, dist)
        lhs = _cauchy_derivative(lambda z: _res(ctx.ref, z), lam, n - 1, radius)
        rhs = (-1) ** (n - 1) * math.factorial(n - 1) * resolvent_power(ctx.alt.A, ctx.alt.C, lam, n)
        yield {"lambda": lam, "n": n}, _rel(lhs, rhs)


def _cycle(values):
    while True:
        yield from values


def id_genres_i(ctx: Context):
    C = ctx.ref.C
    pts = region_points(ctx.ref, ctx.samples, ctx.seed, "genres_i", 2)
    for (z, lam), k in zip(pts, _cycle((1, 2, 3))):
        Rl = _res(ctx.ref, lam)
        lhs = _res(ctx.ref, z) @ np.linalg.matrix_power(Rl, k)
        Rl2 = _res(ctx.alt, lam)
        rhs = (-1) ** k / (z - lam) ** k * _res(ctx.alt, z) @ np.linalg.matrix_power(C, k)
        for i in range(1, k + 1):
            rhs = rhs + (-1) ** (k - i) * np.linalg.matrix_power(Rl2, i) @ np.linalg.matrix_power(C, k + 1 - i) \
                / (z - lam) ** (k + 1 - i)
        yield {"z": z, "lambda": lam, "k": k}, _rel(lhs, rhs)


def id_genres_ii(ctx: Context):
    C, lam0 = ctx.ref.C, ctx.ref.region.lambda0
    for (z,), k in zip(region_points(ctx.ref, ctx.samples, ctx.seed, "genres_ii"), _cycle((1, 2, 3))):
        chain = lr.integer_power(lr.shift(ctx.ref.A, lam0), k)     # pairs (x, y), y in (lam0 - A)^k x
        X, Y = chain.P, chain.Q
        Ck = np.linalg.matrix_power(C, k)
        lhs = _res(ctx.ref, z) @ Ck @ X
        R0 = _res(ctx.alt, lam0)
        rhs = (-1) ** k / (z - lam0) ** k * _res(ctx.alt, z) @ Ck @ Y
        for i in range(1, k + 1):
            rhs = rhs + (-1) ** (k - i) * np.linalg.matrix_power(R0, i) @ np.linalg.matrix_power(C, k + 1 - i) @ Y \
                / (z - lam0) ** (k + 1 - i)
        yield {"z": z, "lambda0": lam0, "k": k}, _rel(lhs, rhs)


def id_resequ(ctx: Context):
    C, lam0 = ctx.ref.C, ctx.ref.region.lambda0
    C2 = C @ C
    for (z,), k in zip(region_points(ctx.ref, ctx.samples, ctx.seed, "resequ"), _cycle((1, 2, 3))):
        lhs = _res(ctx.ref, z) @ resolvent_power(ctx.ref.A, C, lam0, k)
        rhs = (-1) ** k / (z - lam0) ** k * _res(ctx.alt, z, C2)
        for i in range(1, k + 1):
            rhs = rhs + (-1) ** (k - i) * resolvent_power(ctx.alt.A, C2, lam0, i) / (z - lam0) ** (k + 1 - i)
        yield {"z": z, "lambda0": lam0, "k": k}, _rel(lhs, rhs)


def id_klim(ctx: Context):
    u = halton(1, ctx.samples, ctx.seed, "klim")
    for row, k in zip(u, _cycle((1, 2))):
        lam = 10.0 ** (4 + row[0])
        X = lr.parts(lr.integer_power(ctx.ref.A, k)).domain
        if X.shape[1] == 0:
            continue

        def value(s):
            return s ** k * resolvent_power(ctx.alt.A, ctx.alt.C1, s, k) @ X

        # second-order Richardson in 1/lambda removes the O(1/lambda) and O(1/lambda^2) terms
        limit = (8 * value(4 * lam) - 6 * value(2 * lam) + value(lam)) / 3
        yield {"lambda": lam, "k": k}, _rel(limit, ctx.ref.C1 @ X)


# functional calculus

def _b_samples(ctx: Context, salt: str, count: int, sign: int = 1):
    u = halton(4, count, ctx.seed, salt)
    return [(sign * complex(0.2 + 0.7 * r[0], 0.6 * (r[1] - 0.5)),
             sign * complex(0.2 + 0.7 * r[2], 0.6 * (r[3] - 0.5))) for r in u]


def id_homomorphism(ctx: Context):
    G = ctx.contour
    for b1, b2 in _b_samples(ctx, "homomorphism", ctx.samples):
        f, g = pw.zpow(b1), pw.zpow(b2)
        lhs = pw.hfunctional_calc(ctx.ref.A, ctx.ref.C1, f, G, ctx.qtol) @ \
            pw.hfunctional_calc(ctx.ref.A, ctx.ref.C1, g, G, ctx.qtol)
        rhs = pw.hfunctional_calc(ctx.alt.A, ctx.alt.C1, pw.product(f, g), G, ctx.qtol) @ ctx.alt.C1
        yield {"b1": b1, "b2": b2}, _rel(lhs, rhs)


def _neg_power(spec: ProblemSpec, b, ctx: Context, route: str = "contour"):
    return pw.neg_power(spec.A, spec.C1, pw.PowerSpec(b, route), ctx.qtol, ctx.contour if route == "contour" else None)


def id_power_add(ctx: Context):
    for b1, b2 in _b_samples(ctx, "power_add", ctx.samples):
        lhs = _neg_power(ctx.ref, b1, ctx) @ _neg_power(ctx.ref, b2, ctx)
        rhs = _neg_power(ctx.alt, b1 + b2, ctx) @ ctx.alt.C1
        yield {"b1": b1, "b2": b2}, _rel(lhs, rhs)


def id_residue(ctx: Context):
    for n in list(range(1, 4))[:max(1, ctx.samples)]:
        lhs = _neg_power(ctx.ref, n, ctx)
        rhs = pw.integer_neg_power(ctx.alt.A, ctx.alt.C1, n)
        yield {"n": n}, _rel(lhs, rhs)


def _power_rel(spec: ProblemSpec, b, ctx: Context):
    return pw.power_relation(spec.A, spec.C1, b, ctx.qtol, ctx.contour)


def id_s_inclusions(ctx: Context):
    """Principal-angle defects of the inclusions listed for powers of -A."""
    ref, alt = ctx.ref, ctx.alt
    count = max(1, ctx.samples // 2)
    cases = [("pos", b) for b in _b_samples(ctx, "s_inc_pos", count)] + \
            [("neg", b) for b in _b_samples(ctx, "s_inc_neg", count, -1)]
    for sign, (b1, b2) in cases:
        # single power conjugated by C1
        R = _power_rel(ref, b1, ctx)
        d1 = lr.relation_subset(R, pw.regularized_conjugate(_power_rel(alt, b1, ctx), alt.C1))[1]
        # sum versus product, both directions
        Rsum = _power_rel(ref, b1 + b2, ctx)
        prod = lr.compose(_power_rel(alt, b1, ctx), _power_rel(alt, b2, ctx))
        d2 = lr.relation_subset(Rsum, pw.regularized_conjugate(prod, alt.C1))[1]
        prod_ref = lr.compose(_power_rel(ref, b1, ctx), _power_rel(ref, b2, ctx))
        d3 = lr.relation_subset(prod_ref, pw.regularized_conjugate(_power_rel(alt, b1 + b2, ctx), alt.C1))[1]
        yield {"b1": b1, "b2": b2, "side": sign}, max(d1, d2, d3)


# semigroups

def _t_samples(ctx: Context, salt: str, dim: int, lo: float = 0.2, hi: float = 1.5):
    return lo + (hi - lo) * halton(dim, ctx.samples, ctx.seed, salt)


def id_sg_law(ctx: Context):
    g, vt = ctx.gamma, ctx.vartheta
    for t1, t2 in _t_samples(ctx, "sg_law", 2):
        S1, S2 = sg.sg_many(ctx.ref.A, ctx.ref.C1, g, [t1, t2], ctx.qtol, vt)
        S12 = sg.sg_many(ctx.alt.A, ctx.alt.C1, g, [t1 + t2], ctx.qtol, vt)[0]
        yield {"t1": t1, "t2": t2, "gamma": g}, _rel(S1 @ S2, S12 @ ctx.alt.C1)


def id_sg_limit(ctx: Context):
    """S(t)x -> C1 x for x in D(A); the limit is extrapolated from t and t/2."""
    g, vt = ctx.gamma, ctx.vartheta
    X = lr.parts(ctx.ref.A).domain
    for j in list(range(10, 13))[:max(1, ctx.samples)]:
        t = 2.0 ** -j
        S = sg.sg_many(ctx.alt.A, ctx.alt.C1, g, [t, t / 2, t / 4], ctx.qtol, vt)
        raw = [np.linalg.norm(s @ X - ctx.ref.C1 @ X) for s in S]
        limit = 2 * S[1] @ X - S[0] @ X
        res = _rel(limit, ctx.ref.C1 @ X)
        if not raw[0] >= raw[1] >= raw[2]:
            res = max(res, raw[2])
        yield {"t": t, "gamma": g}, res


def id_sg_commute(ctx: Context):
    g, vt = ctx.gamma, ctx.vartheta
    for t, nu in _t_samples(ctx, "sg_commute", 2, 0.3, 1.3):
        R = _power_rel(ctx.ref, nu, ctx)
        Pm = pw._power_matrix(ctx.ref.A, ctx.ref.C1, nu, ctx.qtol, ctx.contour)
        S = sg.sg_many(ctx.alt.A, ctx.alt.C1, g, [t], ctx.qtol, vt)[0]
        worst = 0.0
        for c in np.eye(R.rank):
            x, y = S @ (R.P @ c), S @ (R.Q @ c)
            res = pw.power_membership(ctx.ref.A, ctx.ref.C1, nu, x, y, ctx.qtol, matrix=Pm)[1]
            worst = max(worst, res / (1 + np.linalg.norm(x) + np.linalg.norm(y)))
        yield {"t": t, "nu": nu, "gamma": g}, worst


def id_subgen_AB(ctx: Context):
    """Conditions (A) and (B) for the pair -(-A)_gamma and S_{gamma, zeta}."""
    g, vt = ctx.gamma, ctx.vartheta
    R = _power_rel(ctx.ref, g, ctx)
    Pm = pw._power_matrix(ctx.ref.A, ctx.ref.C1, g, ctx.qtol, ctx.contour)
    C1 = ctx.ref.C1
    for (t,), zeta in zip(_t_samples(ctx, "subgen_AB", 1, 0.5, 1.2), _cycle((0.0, 0.5, 1.0))):
        Sz = sg.evaluate_sg_integrated(ctx.alt.A, ctx.alt.C1, g, zeta, t, ctx.qtol, vt)
        Sz1 = sg.evaluate_sg_integrated(ctx.alt.A, ctx.alt.C1, g, zeta + 1, t, ctx.qtol, vt)
        w = float(fd.gzeta_eval(zeta + 1, t))
        worst = 0.0
        for c in np.eye(R.rank):
            x, y = R.P @ c, -(R.Q @ c)          # (x, y) in -(-A)_gamma
            scale = 1 + np.linalg.norm(x) + np.linalg.norm(y)
            a = np.linalg.norm(Sz @ x - w * C1 @ x - Sz1 @ y)
            X, Y = Sz1 @ x, Sz @ x - w * C1 @ x
            b = pw.power_membership(ctx.ref.A, C1, g, X, -Y, ctx.qtol, matrix=Pm)[1]
            worst = max(worst, a / scale, b / scale)
        yield {"t": t, "zeta": zeta, "gamma": g}, worst


def id_qzero(ctx: Context):
    """Vanishing moments of the kernel f_t; a perturbed run shifts the kernel phase by delta."""
    u = halton(2, ctx.samples, ctx.seed, "qzero")
    for row, n in zip(u, _cycle((0, 1))):
        t, g = 0.5 + 1.5 * row[0], 0.15 + 0.3 * row[1]
        phase = math.pi * g + ctx.delta
        em, ep = np.exp(-1j * phase), np.exp(1j * phase)
        rate = t * math.cos(phase)

        def kernel(lam):
            lg = lam ** g
            return lam ** n * (np.exp(-t * lg * em) - np.exp(-t * lg * ep)) / (2j * math.pi)

        mass = sg.kernel_moment_mass(t, g, n + 1)
        val = ct.quad_halfline(kernel, 1e-3 * ctx.qtol * max(1.0, mass), ct.Exponential(rate, g),
                               head_power=n + g).value
        yield {"t": t, "gamma": g, "n": n}, abs(val) / max(1.0, mass)


def id_an_membership(ctx: Context):
    g = ctx.gamma
    for (t,), n in zip(_t_samples(ctx, "an_membership", 1, 0.6, 1.4), _cycle((1, 2))):
        S = sg.sg_many(ctx.ref.A, ctx.ref.C1, g, [t], 1e-11, ctx.vartheta)[0]
        mtol = max(1e-10, 1e-12 * sg.kernel_moment_mass(t, g, n))
        An = lr.integer_power(ctx.ref.A, n)
        worst = 0.0
        for x in np.eye(ctx.ref.n):
            y = sg.an_moment(ctx.alt.A, ctx.alt.C1, g, t, n, x, mtol)
            d = lr.contains_pair(An, S @ x, y)[1]
            worst = max(worst, d / (1 + np.linalg.norm(S @ x) + np.linalg.norm(y)))
        yield {"t": t, "n": n, "gamma": g}, worst


def id_frac_deriv(ctx: Context):
    """D^beta_- S_gamma(t)x against its closed-form integral and membership in (-A)_{gamma beta}.

    Integer orders only: the Liouville tail for fractional beta nests a quadrature
    over semigroup values, which is too costly for a residual suite.
    """
    g, vt = ctx.gamma, ctx.vartheta
    x = np.ones(ctx.ref.n)
    for (t,), beta in zip(_t_samples(ctx, "frac_deriv", 1, 0.7, 1.3), _cycle((2, 1))):

        def u(s):
            return sg.evaluate_sg(ctx.ref.A, ctx.ref.C1, g, s, 1e-12, vt) @ x

        lhs = fd.liouville_right_deriv(u, beta, t, 1e-12)
        rhs = sg.fractional_rhs(ctx.alt.A, ctx.alt.C1, g, beta, 0.0, t, x, 1e-11)
        rel = float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(rhs), 1e-300))
        ok, mem = pw.power_membership(ctx.ref.A, ctx.ref.C1, g * beta, u(t), rhs, 1e-9, ctx.contour)
        mem /= 1 + np.linalg.norm(u(t)) + np.linalg.norm(rhs)
        yield {"t": t, "beta": beta, "gamma": g}, max(rel, mem)


def id_second_order(ctx: Context):
    h = 1e-3
    negA = lr.scalar_shift_mul(ctx.ref.A, -1, 0)
    for (t,) in _t_samples(ctx, "second_order", 1, 0.7, 1.5):
        S0 = sg.sg_many(ctx.ref.A, ctx.ref.C1, 0.5, [t], 1e-12, ctx.vartheta)[0]
        Sm, S0b, Sp = sg.sg_many(ctx.alt.A, ctx.alt.C1, 0.5, [t - h, t, t + h], 1e-12, ctx.vartheta)
        D2 = (Sp - 2 * S0b + Sm) / h ** 2
        worst = 0.0
        for x in np.eye(ctx.ref.n):
            ut, d2 = S0 @ x, D2 @ x
            d = lr.contains_pair(negA, ut, d2)[1]
            worst = max(worst, d / (1 + np.linalg.norm(ut) + np.linalg.norm(d2)))
        yield {"t": t, "h": h}, worst


def id_laplace(ctx: Context):
    u = halton(1, max(0, ctx.samples - 2), ctx.seed, "laplace")
    lams = [1.0, 2.0] + [float(0.8 + 2.2 * r[0]) for r in u]
    X = np.eye(ctx.ref.n)
    for lam in lams[:max(1, ctx.samples)]:
        L = sg.laplace_of_sg_half(ctx.ref.A, ctx.ref.C1, lam, X, ctx.qtol, ctx.vartheta)
        F = sg.F_half_eval(ctx.alt.A, ctx.alt.C1, lam, ctx.qtol / 10)
        yield {"lambda": lam}, _rel(L, F)


# catalog: id -> (suite, default-tolerance key, multiplier)

CATALOG = {
    "resolvent_eq": (id_resolvent_eq, "tol_algebraic", 1.0),
    "creso": (id_creso, "tol_algebraic", 1.0),
    "genres_i": (id_genres_i, "tol_algebraic", 1.0),
    "genres_ii": (id_genres_ii, "tol_algebraic", 1.0),
    "resequ": (id_resequ, "tol_algebraic", 1.0),
    "homomorphism": (id_homomorphism, "tol_quadrature", 5.0),
    "power_add": (id_power_add, "tol_quadrature", 5.0),
    "residue": (id_residue, "tol_quadrature", 5.0),
    "s_inclusions": (id_s_inclusions, "tol_quadrature", 5.0),
    "sg_law": (id_sg_law, "tol_quadrature", 5.0),
    "sg_limit": (id_sg_limit, "tol_quadrature", 5.0),
    "sg_commute": (id_sg_commute, "tol_quadrature", 5.0),
    "subgen_AB": (id_subgen_AB, "tol_quadrature", 5.0),
    "qzero": (id_qzero, "tol_quadrature", 5.0),
    "an_membership": (id_an_membership, "tol_quadrature", 5.0),
    "frac_deriv": (id_frac_deriv, "tol_fd", 1.0),
    "second_order": (id_second_order, "tol_fd", 1.0),
    "laplace": (id_laplace, "tol_quadrature", 5.0),
    "klim": (id_klim, "tol_algebraic", 1.0),
}


def default_tol(identity_id: str, spec: ProblemSpec) -> float:
    _, key, mult = _entry(identity_id)
    return mult * float(spec.defaults[key])


def _entry(identity_id: str):
    try:
        return CATALOG[identity_id]
    except KeyError:
        raise UnknownIdentity(f"unknown identity {identity_id!r}") from None


def verify_identity(identity_id: str, instance: ProblemSpec, tol: float | None = None,
                    samples: int | None = None, seed: int | None = None, perturb: float = 0.0) -> ResidualReport:
    """Run one identity suite; numeric errors become failed samples."""
    suite = _entry(identity_id)[0]
    tol = default_tol(identity_id, instance) if tol is None else float(tol)
    samples = int(instance.defaults["samples"] if samples is None else samples)
    seed = int(instance.defaults["seed"] if seed is None else seed)
    start = time.perf_counter()
    rows, errors = [], []
    try:
        ctx = Context(instance, tol, samples, seed, perturb)
        for params, res in suite(ctx):
            rows.append((digest(params), float(res) if np.isfinite(res) else math.inf))
    except (RelpowError, np.linalg.LinAlgError, ArithmeticError, ValueError) as exc:
        key = digest({"identity": identity_id, "failed_after": len(rows)})
        rows.append((key, math.inf))
        errors.append((key, f"{type(exc).__name__}: {exc}"))
    worst = max((r for _, r in rows), default=math.inf)
    ms = int(round(1000 * (time.perf_counter() - start)))
    return ResidualReport(identity_id, rows, worst, tol, bool(worst <= tol), ms, errors)


def run_suite(ids, instance: ProblemSpec, tol: float | None = None, samples: int | None = None,
              seed: int | None = None, threads: int = 1, perturb: float = 0.0) -> list:
    """Run several identities, possibly concurrently; reports come back in the given order."""
    ids = list(CATALOG) if ids in ("all", ["all"]) else list(ids)
    for i in ids:
        _entry(i)

    def one(i):
        return verify_identity(i, instance, tol, samples, seed, perturb)

    if threads <= 1:
        return [one(i) for i in ids]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, ids))


def suite_json(reports, timing: bool = False) -> dict:
    return {"pass": all(r.passed for r in reports), "reports": [r.to_json(timing) for r in reports]}
