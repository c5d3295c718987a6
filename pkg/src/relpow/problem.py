"""Problem instances: a relation, a regularizer C, a region and numeric defaults.

JSON layout::

    {"relation": {"n": 2, "kind": "matrix"|"graph"|"pencil", "data": ...},
     "C": [[[re, im], ...], ...],          # optional, identity by default
     "region": {"mode": "HS", "alpha": 0, "theta": 0.785, "d": 0.5, "lambda0": [re, im]},
     "defaults": {"tol_quadrature": 1e-6, ...}}

Complex entries are [re, im] pairs; plain numbers are read as real. A pencil's
data is {"B": matrix, "L": matrix} and describes {(x, y) : B y = L x}.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

import numpy as np

from . import linrel as lr
from .errors import DimensionMismatch, InvalidParams
from .resolvent import RegionParams, build_c1, finite_eigenvalues, region_certify

DEFAULTS = {
    "tol_algebraic": 1e-8,
    "tol_quadrature": 1e-6,
    "tol_fd": 1e-4,
    "samples": 6,
    "gamma": 0.25,
    "seed": 0,
    "grid": {"n_radial": 40, "n_angular": 17, "radius": 1e4},
    "certify_bound": 1e6,
}


def merge_config(base: dict, override: dict | None) -> dict:
    out = copy.deepcopy(base)
    for k, v in (override or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge_config(out[k], v)
        else:
            out[k] = v
    return out


# complex codecs

def parse_complex(text: str) -> complex:
    """'re,im' or 're' -> complex."""
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) != 2:
        raise ValueError(f"expected 're,im', got {text!r}")
    return complex(float(parts[0]), float(parts[1]))


def encode_complex(z) -> list:
    z = complex(z)
    return [float(z.real) + 0.0, float(z.imag) + 0.0]     # + 0.0 drops signed zeros


def decode_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise InvalidParams(f"complex entries are [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(float(v), 0.0)


def encode_matrix(M) -> list:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return [[encode_complex(z) for z in row] for row in M]


def decode_matrix(data) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise InvalidParams("a matrix is a non-empty list of rows")
    rows = [[decode_complex(v) for v in row] for row in data]
    if len({len(r) for r in rows}) != 1:
        raise InvalidParams("ragged matrix rows")
    return np.array(rows, dtype=complex)


def relation_from_json(blob: dict) -> lr.LinearRelation:
    try:
        n, kind, data = int(blob["n"]), blob["kind"], blob["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParams(f"relation block needs n, kind and data: {exc}") from None
    if kind == "matrix":
        M = decode_matrix(data)
        if M.shape != (n, n):
            raise DimensionMismatch(f"matrix of shape {M.shape} for n={n}")
        return lr.from_matrix(M)
    if kind == "graph":
        G = decode_matrix(data)
        if G.shape[0] != 2 * n:
            raise DimensionMismatch(f"graph basis needs 2n={2 * n} rows, got {G.shape[0]}")
        return lr.from_graph(G)
    if kind == "pencil":
        if not isinstance(data, dict) or "B" not in data or "L" not in data:
            raise InvalidParams("pencil data is {'B': matrix, 'L': matrix}")
        B, L = decode_matrix(data["B"]), decode_matrix(data["L"])
        if B.shape != (n, n) or L.shape != (n, n):
            raise DimensionMismatch(f"pencil blocks must be {n}x{n}")
        return lr.from_pencil(B, L)
    raise InvalidParams(f"unknown relation kind {kind!r}")


def relation_to_json(A: lr.LinearRelation) -> dict:
    return {"n": A.dim, "kind": "graph", "data": encode_matrix(A.graph)}


@dataclass
class ProblemSpec:
    relation: lr.LinearRelation
    C: np.ndarray
    region: RegionParams
    defaults: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS))
    raw_relation: dict | None = None
    _c1: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        n = self.relation.dim
        self.C = lr.as_cmatrix(self.C)
        if self.C.shape != (n, n):
            raise DimensionMismatch(f"C has shape {self.C.shape}, relation has n={n}")
        # fix lambda0 once so that perturbed copies share it
        self.region = self.region.with_lambda0(self.relation)

    @property
    def A(self) -> lr.LinearRelation:
        return self.relation

    @property
    def n(self) -> int:
        return self.relation.dim

    @property
    def C1(self) -> np.ndarray:
        if self._c1 is None:
            self._c1 = build_c1(self.relation, self.C, self.region)
        return self._c1

    def perturbed(self, delta: float) -> "ProblemSpec":
        """Same data with A replaced by A + delta E, E = (I + J)/2 and J the all-ones matrix.

        E is positive definite, so the spectrum moves right toward the region, and E
        does not commute with diagonal A.
        """
        n = self.n
        E = (np.eye(n) + np.ones((n, n))) / 2
        A = self.relation
        A2 = lr.LinearRelation(n, np.vstack([A.P, A.Q + delta * E @ A.P]))
        return ProblemSpec(A2, self.C.copy(), self.region, copy.deepcopy(self.defaults))

    def to_json(self) -> dict:
        return {"relation": self.raw_relation or relation_to_json(self.relation),
                "C": encode_matrix(self.C), "region": self.region.to_json(),
                "defaults": self.defaults}

    @classmethod
    def from_json(cls, blob: dict, config: dict | None = None) -> "ProblemSpec":
        if not isinstance(blob, dict) or "relation" not in blob:
            raise InvalidParams("instance needs a 'relation' block")
        A = relation_from_json(blob["relation"])
        C = decode_matrix(blob["C"]) if "C" in blob else np.eye(A.dim, dtype=complex)
        region = RegionParams.from_json(blob.get("region", {}))
        defaults = merge_config(merge_config(DEFAULTS, blob.get("defaults")), config)
        return cls(A, C, region, defaults, blob["relation"])

    @classmethod
    def load(cls, path, config: dict | None = None) -> "ProblemSpec":
        with open(path) as fh:
            return cls.from_json(json.load(fh), config)


def random_certified_instance(n: int, seed: int, region: RegionParams | None = None,
                              multivalued: bool = False, bound: float = 1e6) -> ProblemSpec:
    """Random relation shifted so its finite spectrum sits left of the region, then certified."""
    region = region or RegionParams()
    rng = np.random.default_rng(seed)
    for _ in range(20):
        P = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        Q = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if multivalued:
            P[:, -1] = 0.0          # (0, q) in the graph: nontrivial multivalued part
        A = lr.from_graph(np.vstack([P, Q]))
        ev = finite_eigenvalues(A)
        top = float(np.max(ev.real)) if ev.size else 0.0
        A = lr.scalar_shift_mul(A, 1.0, -(top + 1.0 + rng.uniform()))
        spec = ProblemSpec(A, np.eye(n), region)
        if region_certify(A, spec.C, spec.region, bound=bound).passed:
            return spec
    raise InvalidParams("could not draw a certified random instance")

