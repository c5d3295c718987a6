"""C-resolvents of linear relations, region parameters and the regularizer C1."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from . import linrel as lr
from .errors import InvalidParams, NotInResolventSet

SOLVE_RTOL = 1e-9
KERNEL_TOL = 1e-10


def _pinv_and_kernel(M: np.ndarray, atol: float):
    # the graph basis is orthonormal, so singular values of lam P - Q are on an absolute scale
    u, s, vh = np.linalg.svd(M, full_matrices=True)
    r = int(np.sum(s > atol))
    pinv = (vh[:r].conj().T / s[:r]) @ u[:, :r].conj().T
    return pinv, vh[r:].conj().T


def solve_shifted(A: lr.LinearRelation, lam: complex, rhs: np.ndarray) -> np.ndarray:
    """Unique y with rhs in (lam - A) y, column by column."""
    rhs = lr.as_cmatrix(rhs)
    if rhs.shape[0] != A.dim:
        raise lr.DimensionMismatch("right-hand side has wrong length")
    if A.rank == 0:
        if np.linalg.norm(rhs) > 0:
            raise NotInResolventSet("range", lam, "empty relation")
        return np.zeros_like(rhs)
    M = lam * A.P - A.Q
    pinv, N = _pinv_and_kernel(M, lr.RANK_RTOL * (1.0 + abs(lam)))
    if N.shape[1] and np.max(np.linalg.norm(A.P @ N, axis=0)) > KERNEL_TOL:
        raise NotInResolventSet("kernel", lam, "lambda - A is not injective")
    c = pinv @ rhs
    res = np.linalg.norm(M @ c - rhs, axis=0)
    scale = 1.0 + np.linalg.norm(rhs, axis=0)
    if np.any(res > SOLVE_RTOL * scale * (1.0 + abs(lam))):
        raise NotInResolventSet("range", lam, f"residual {res.max():.2e}")
    return A.P @ c


def c_resolvent(A: lr.LinearRelation, C, lam: complex) -> np.ndarray:
    """Matrix of (lam - A)^{-1} C."""
    return solve_shifted(A, complex(lam), lr.as_cmatrix(C))


def in_c_resolvent_set(A, C, lam, tol: float = SOLVE_RTOL) -> bool:
    try:
        R = c_resolvent(A, C, lam)
    except NotInResolventSet:
        return False
    # y = R x must satisfy (y, lam y - C x) in A
    C = lr.as_cmatrix(C)
    pairs = np.vstack([R, lam * R - C])
    res = lr.span_distance(A.graph, pairs)
    return bool(np.all(res <= tol * (1.0 + np.linalg.norm(pairs, axis=0))))


def resolvent_power(A, C, lam: complex, n: int) -> np.ndarray:
    """Matrix of (lam - A)^{-n} C, obtained by applying the relation inverse n times."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    Y = c_resolvent(A, C, lam)
    for _ in range(n - 1):
        Y = solve_shifted(A, complex(lam), Y)
    return Y


def spectral_radius_estimate(A: lr.LinearRelation) -> float:
    """Largest modulus of a finite eigenvalue of the relation (cheap estimate)."""
    vals = finite_eigenvalues(A)
    return float(np.max(np.abs(vals))) if vals.size else 0.0


def finite_eigenvalues(A: lr.LinearRelation) -> np.ndarray:
    """Finite points lam where lam - A fails to be injective or onto, for square graphs."""
    if A.rank == 0:
        return np.zeros(0, dtype=complex)
    if A.rank == A.dim:
        # homogeneous pairs (a, b): b ~ 0 marks an infinite eigenvalue (multivalued part)
        a, b = scipy.linalg.eigvals(A.Q, A.P, homogeneous_eigvals=True)
        keep = np.abs(b) > lr.RANK_RTOL * np.hypot(np.abs(a), np.abs(b))
        return a[keep] / b[keep]
    # rectangular case: fall back on the single-valued part's size
    s = np.linalg.svd(A.P, compute_uv=False)
    s = s[s > lr.RANK_RTOL * s[0]] if s.size and s[0] > 0 else s[:0]
    if not s.size:
        return np.zeros(0, dtype=complex)
    return np.array([np.linalg.norm(A.Q, 2) / s[-1]], dtype=complex)


def default_lambda0(A: lr.LinearRelation) -> complex:
    return complex(-2.0 * (1.0 + spectral_radius_estimate(A)))


@dataclass(frozen=True)
class RegionParams:
    """Resolvent region: P(alpha, eps, c) with disk B_d (mode H) or a sector with B_d (mode HS)."""

    mode: str = "HS"
    alpha: float = -1.0
    eps: float = 0.2
    c: float = 0.3
    d: float = 0.5
    theta: float = math.pi / 4
    lambda0: complex | None = None

    def __post_init__(self):
        if self.mode not in ("H", "HS"):
            raise InvalidParams(f"unknown mode {self.mode!r}")
        if self.alpha < -1:
            raise InvalidParams("alpha must be >= -1")
        if not 0 < self.d <= 1:
            raise InvalidParams("d must lie in (0, 1]")
        if self.mode == "H":
            if not 0 < self.eps <= 1 or not 0 < self.c < 1:
                raise InvalidParams("eps must lie in (0,1] and c in (0,1)")
            gap = self.eps ** 2 + self.c ** 2 * (1 + self.eps) ** (-2 * self.alpha) - self.d ** 2
            if abs(gap) > 1e-9:
                raise InvalidParams(f"coupling constraint violated by {gap:.3e}")
        elif not 0 < self.theta < math.pi / 2:
            raise InvalidParams("theta must lie in (0, pi/2)")
        if self.lambda0 is not None and self.contains(self.lambda0):
            raise InvalidParams("lambda0 lies inside the region")

    @classmethod
    def coupled(cls, alpha: float, eps: float, c: float, **kw) -> "RegionParams":
        d = math.sqrt(eps ** 2 + c ** 2 * (1 + eps) ** (-2 * alpha))
        return cls(mode="H", alpha=alpha, eps=eps, c=c, d=d, **kw)

    def contains(self, lam: complex) -> bool:
        lam = complex(lam)
        if abs(lam) <= self.d:
            return True
        if self.mode == "H":
            xi, eta = lam.real, lam.imag
            return xi >= self.eps and abs(eta) <= self.c * (1 + xi) ** (-self.alpha)
        return lam != 0 and abs(math.atan2(lam.imag, lam.real)) < self.theta

    def with_lambda0(self, A: lr.LinearRelation) -> "RegionParams":
        if self.lambda0 is not None:
            return self
        return replace(self, lambda0=default_lambda0(A))

    def to_json(self) -> dict:
        out = {"mode": self.mode, "alpha": self.alpha, "eps": self.eps, "c": self.c,
               "d": self.d, "theta": self.theta}
        if self.lambda0 is not None:
            out["lambda0"] = [complex(self.lambda0).real, complex(self.lambda0).imag]
        return out

    @classmethod
    def from_json(cls, blob: dict) -> "RegionParams":
        kw = {k: blob[k] for k in ("mode", "alpha", "eps", "c", "d", "theta") if k in blob}
        for k in ("alpha", "eps", "c", "d", "theta"):
            if k in kw:
                kw[k] = float(kw[k])
        lam0 = blob.get("lambda0")
        if lam0 is not None:
            kw["lambda0"] = complex(lam0[0], lam0[1]) if isinstance(lam0, (list, tuple)) else complex(lam0)
        if kw.get("mode") == "H" and "d" not in blob:
            return cls.coupled(kw.pop("alpha", -1.0), kw.pop("eps", 0.2), kw.pop("c", 0.3), **kw)
        return cls(**kw)


def build_c1(A: lr.LinearRelation, C, params: RegionParams) -> np.ndarray:
    """C1 = C (lambda0 - A)^{-floor(alpha+2)} C for alpha > -1, and C1 = C for alpha = -1."""
    C = lr.as_cmatrix(C)
    if params.alpha == -1:
        return C.copy()
    lam0 = params.lambda0 if params.lambda0 is not None else default_lambda0(A)
    k = math.floor(params.alpha + 2)
    return C @ resolvent_power(A, C, lam0, k)


# sampling-based certificates

@dataclass
class Grid:
    n_radial: int = 40
    n_angular: int = 17
    radius: float = 1e4


@dataclass
class Certificate:
    sup_weighted_norm: float
    worst_lambda: complex
    passed: bool
    samples: int = 0
    failure: str = ""

    def to_json(self) -> dict:
        return {"sup_weighted_norm": self.sup_weighted_norm,
                "worst_lambda": [self.worst_lambda.real, self.worst_lambda.imag],
                "pass": self.passed, "samples": self.samples, "failure": self.failure}


def region_points(params: RegionParams, grid: Grid | None = None) -> np.ndarray:
    """Canonically ordered sample points covering the region, boundary included."""
    g = grid or Grid()
    pts = []
    # disk B_d
    for r in np.linspace(0.0, params.d, max(2, g.n_radial // 4)):
        for phi in np.linspace(-math.pi, math.pi, 2 * g.n_angular, endpoint=False):
            pts.append(r * np.exp(1j * phi))
    if params.mode == "H":
        for xi in np.concatenate([[params.eps], np.geomspace(params.eps, g.radius, g.n_radial)]):
            h = params.c * (1 + xi) ** (-params.alpha)
            for eta in np.linspace(-h, h, g.n_angular):
                pts.append(complex(xi, eta))
    else:
        for r in np.geomspace(params.d, g.radius, g.n_radial):
            for phi in np.linspace(-params.theta, params.theta, g.n_angular):
                pts.append(r * np.exp(1j * phi))
    return np.unique(np.round(np.array(pts, dtype=complex), 14))


def region_certify(A, C, params: RegionParams, grid: Grid | None = None, bound: float = 1e6) -> Certificate:
    """Sampled sup of (1+|lam|)^{-alpha} ||(lam - A)^{-1} C|| over the region.

    Finite eigenvalues of A lying inside the region are added as targeted samples.
    """
    pts = list(region_points(params, grid))
    pts += [lam for lam in finite_eigenvalues(A) if params.contains(lam)]
    sup, worst = -1.0, 0j
    for lam in pts:
        try:
            R = c_resolvent(A, C, lam)
        except NotInResolventSet as exc:
            return Certificate(math.inf, complex(lam), False, len(pts), exc.reason)
        w = (1 + abs(lam)) ** (-params.alpha) * np.linalg.norm(R, 2)
        if not np.isfinite(w):
            return Certificate(math.inf, complex(lam), False, len(pts), "non-finite")
        if w > sup:
            sup, worst = float(w), complex(lam)
    return Certificate(sup, worst, sup <= bound, len(pts))


def _sector_complement_points(omega_p: float, grid: Grid, include_positive: bool) -> list:
    pts = []
    radii = np.geomspace(1.0 / grid.radius, grid.radius, grid.n_radial)
    for r in radii:
        for phi in np.linspace(omega_p, math.pi, grid.n_angular):
            pts.append(r * np.exp(1j * phi))
            if 0 < phi < math.pi:
                pts.append(r * np.exp(-1j * phi))
        if include_positive:
            pts.append(complex(r))
    return pts


def classify_sectorial(A, C, omega: float, grid: Grid | None = None, omega_prime: float | None = None,
                       bound: float = 1e6):
    """Sampled check that A is C-sectorial of angle omega; returns (verdict, sup of ||lam R(lam) C||)."""
    g = grid or Grid(n_radial=30, n_angular=9)
    wp = (omega + math.pi) / 2 if omega_prime is None else omega_prime
    pts = _sector_complement_points(wp, g, include_positive=(omega == 0))
    # eigenvalues outside the closed sector must be resolvent points too
    for lam in finite_eigenvalues(A):
        if omega == 0 or lam == 0 or abs(np.angle(lam)) > omega:
            pts.append(lam)
    sup = 0.0
    for lam in pts:
        try:
            R = c_resolvent(A, C, lam)
        except NotInResolventSet:
            return False, math.inf
        sup = max(sup, abs(lam) * float(np.linalg.norm(R, 2)))
    return sup <= bound, sup


def c_nonnegative(A, C, grid: Grid | None = None, bound: float = 1e6):
    """Sampled check of sup over lam > 0 of ||lam (lam + A)^{-1} C||."""
    g = grid or Grid(n_radial=60)
    negA = lr.scalar_shift_mul(A, -1.0, 0.0)
    sup = 0.0
    for lam in np.geomspace(1.0 / g.radius, g.radius, g.n_radial):
        try:
            R = c_resolvent(negA, C, lam)
        except NotInResolventSet:
            return False, math.inf
        sup = max(sup, lam * float(np.linalg.norm(R, 2)))
    return sup <= bound, sup
