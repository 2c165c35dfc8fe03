"""Declarative point-set families and their deterministic truncation to a ball.

Every family can be materialised in two ways:

* ``materialize(spec, R)`` -- all points of norm <= R;
* ``materialize_strip(spec, R, angle, lo, hi)`` -- only those whose projection
  x1*cos(angle) + x2*sin(angle) lies in [lo, hi].  This is what the direction
  classifier uses, since a strip of a large ball is far smaller than the ball.

Both agree: the strip result is exactly the subset of the ball result passing the
same projection test.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .exact import is_exact, parse_rational, parse_scalar, scalar_to_json
from .geometry import TruncatedSet, phi_values
from .sequences import SequenceSpec

GENERATOR_KINDS = (
    "explicit",
    "integer_lattice",
    "squares_M0",
    "signed_powers",
    "product_set",
    "jittered_lattice",
    "random_polar",
)
RANDOMIZED = ("jittered_lattice", "random_polar")

# sign patterns of (x1, x2) per power-family convention
_SQUARE_CONVENTIONS = {
    "plain": ((1, 1),),          # {(m^2, n^2)}
    "l_alpha": ((-1, 1),),       # {(-n^2, m^2)}: psi_alpha gives alpha*m^2 - n^2
}
_ALL_SIGNS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


class GeneratorError(ValueError):
    """Invalid generator parameters."""


@dataclass(frozen=True, eq=False)
class GeneratorSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise GeneratorError(f"unknown generator kind {self.kind!r}")
        p = dict(self.params)
        allowed = {
            "explicit": {"points"},
            "integer_lattice": set(),
            "squares_M0": {"convention"},
            "signed_powers": {"a"},
            "product_set": {"rseq"},
            "jittered_lattice": {"jitter_bound"},
            "random_polar": {"rseq", "k_max"},
        }[self.kind]
        extra = set(p) - allowed
        if extra:
            raise GeneratorError(f"{self.kind}: unexpected parameters {sorted(extra)}")
        if self.kind == "signed_powers":
            a = parse_scalar(p.get("a"))
            if not a > 0:
                raise GeneratorError("signed_powers exponent a must be positive")
            p["a"] = int(a) if is_exact(a) and Fraction(a).denominator == 1 else float(a)
        if self.kind == "squares_M0":
            p.setdefault("convention", "plain")
            if p["convention"] not in _SQUARE_CONVENTIONS:
                raise GeneratorError(f"unknown M0 convention {p['convention']!r}")
        if self.kind == "jittered_lattice":
            b = float(parse_scalar(p.get("jitter_bound", 0)))
            if b < 0:
                raise GeneratorError("jitter_bound must be non-negative")
            p["jitter_bound"] = b
        if self.kind in ("product_set", "random_polar"):
            r = p.get("rseq")
            if r is None:
                raise GeneratorError(f"{self.kind} needs an rseq")
            if isinstance(r, dict):
                r = SequenceSpec.from_json(r)
            p["rseq"] = r
            r.prefix(8 if r.kind != "explicit" else min(8, len(r.p["values"])))
        if self.kind == "random_polar":
            p["k_max"] = int(p.get("k_max", 20_000_000))
        if self.kind == "explicit":
            pts = []
            for pt in p.get("points", []):
                x1, x2 = (parse_scalar(v) for v in pt)
                pts.append((x1, x2))
            p["points"] = tuple(pts)
        if self.kind in RANDOMIZED and self.seed is None:
            raise GeneratorError(f"{self.kind} requires a seed")
        if self.kind not in RANDOMIZED and self.seed is not None:
            raise GeneratorError(f"{self.kind} is deterministic and takes no seed")
        object.__setattr__(self, "params", p)

    # -- serialisation ---------------------------------------------------------
    def to_json(self) -> dict:
        out = {}
        for k, v in self.params.items():
            if isinstance(v, SequenceSpec):
                out[k] = v.to_json()
            elif k == "points":
                out[k] = [[scalar_to_json(a), scalar_to_json(b)] for a, b in v]
            else:
                out[k] = scalar_to_json(v)
        obj = {"kind": self.kind, "params": out}
        if self.seed is not None:
            obj["seed"] = self.seed
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "GeneratorSpec":
        extra = set(obj) - {"kind", "params", "seed"}
        if extra:
            raise GeneratorError(f"unexpected generator fields {sorted(extra)}")
        return cls(obj["kind"], dict(obj.get("params", {})), obj.get("seed"))

    @property
    def spec_id(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def __eq__(self, other):
        return isinstance(other, GeneratorSpec) and self.spec_id == other.spec_id

    def __hash__(self):
        return hash(self.spec_id)

    # -- convenience constructors ----------------------------------------------
    @classmethod
    def lattice(cls):
        return cls("integer_lattice")

    @classmethod
    def squares(cls, convention="plain"):
        return cls("squares_M0", {"convention": convention})

    @classmethod
    def powers(cls, a):
        return cls("signed_powers", {"a": a})

    @classmethod
    def product(cls, rseq: SequenceSpec):
        return cls("product_set", {"rseq": rseq})

    @classmethod
    def jittered(cls, jitter_bound, seed):
        return cls("jittered_lattice", {"jitter_bound": jitter_bound}, seed)

    @classmethod
    def polar(cls, rseq: SequenceSpec, seed, k_max=20_000_000):
        return cls("random_polar", {"rseq": rseq, "k_max": k_max}, seed)

    @classmethod
    def explicit(cls, points):
        return cls("explicit", {"points": [list(p) for p in points]})


# -- counter-based randomness ----------------------------------------------------

_M64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _splitmix(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def keyed_uniform(seed: int, *keys: np.ndarray, stream: int = 0) -> np.ndarray:
    """Uniform [0,1) values that depend only on (seed, keys, stream).

    Used so that the random displacement of lattice point (i, j), or the angle of
    polar point k, does not depend on how far the set is truncated.
    """
    with np.errstate(over="ignore"):
        h = _splitmix(np.full(np.shape(keys[0]), np.uint64(seed & 0xFFFFFFFFFFFFFFFF)))
        h = _splitmix(h ^ np.uint64(stream))
        for k in keys:
            h = _splitmix(h ^ np.asarray(k, dtype=np.int64).astype(np.uint64))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


# -- small helpers ---------------------------------------------------------------

def in_ball(points: np.ndarray, R: float) -> np.ndarray:
    """Closed-ball test shared by every family (x1^2 + x2^2 <= R^2 in float64)."""
    return points[:, 0] ** 2 + points[:, 1] ** 2 <= float(R) ** 2


def _expand(line_vals: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """For each line value v_i, the integers lo_i..hi_i; returns flat (v, t) arrays."""
    cnt = np.maximum(hi - lo + 1, 0).astype(np.int64)
    total = int(cnt.sum())
    v = np.repeat(line_vals, cnt)
    start = np.repeat(lo, cnt)
    offs = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    return v, start + offs


def _strip_range(base, lo, hi, coef):
    """Range of t with base + coef*t in [lo, hi] (coef != 0), as float bounds."""
    a = (lo - base) / coef
    b = (hi - base) / coef
    return np.minimum(a, b), np.maximum(a, b)


def _finish(spec: GeneratorSpec, R, points, exact, order_keys, angle=None, lo=None, hi=None, meta=None):
    """Filter to the ball (and strip), sort deterministically, build the TruncatedSet."""
    keep = in_ball(points, R)
    if angle is not None:
        v = phi_values(points, angle)
        keep &= (v >= lo) & (v <= hi)
    points = points[keep]
    exact = exact[keep] if exact is not None else None
    order_keys = [k[keep] for k in order_keys]
    if order_keys:
        order = np.lexsort(tuple(reversed(order_keys)))
        points = points[order]
        exact = exact[order] if exact is not None else None
    strip = (float(angle), float(lo), float(hi)) if angle is not None else None
    return TruncatedSet(points, float(R), spec.spec_id, spec.seed, exact, strip, meta or {})


# -- family enumerators -----------------------------------------------------------

def _lattice_indices(R: float, angle=None, lo=None, hi=None, pad: float = 0.0):
    """Integer points (i, j) with i^2 + j^2 <= (R+pad)^2, optionally in the padded strip."""
    Rp = float(R) + pad
    n = int(math.floor(Rp))
    if angle is None:
        i = np.arange(-n, n + 1, dtype=np.int64)
        half = np.floor(np.sqrt(np.maximum(Rp * Rp - i.astype(float) ** 2, 0.0))).astype(np.int64)
        return _expand(i, -half, half)
    c, s = math.cos(angle), math.sin(angle)
    lo_p, hi_p = lo - pad, hi + pad
    line = np.arange(-n, n + 1, dtype=np.int64)
    lf = line.astype(float)
    half = np.floor(np.sqrt(np.maximum(Rp * Rp - lf**2, 0.0))) + 1
    if abs(s) >= abs(c):
        a, b = _strip_range(lf * c, lo_p, hi_p, s)
    else:
        a, b = _strip_range(lf * s, lo_p, hi_p, c)
    t_lo = np.maximum(np.floor(a) - 1, -half).astype(np.int64)
    t_hi = np.minimum(np.ceil(b) + 1, half).astype(np.int64)
    u, t = _expand(line, t_lo, t_hi)
    return (u, t) if abs(s) >= abs(c) else (t, u)


def _gen_lattice(spec, R, angle=None, lo=None, hi=None):
    i, j = _lattice_indices(R, angle, lo, hi)
    exact = np.stack([i, j], axis=1)
    pts = exact.astype(float)
    return _finish(spec, R, pts, exact, [i, j], angle, lo, hi)


def _gen_jittered(spec, R, angle=None, lo=None, hi=None):
    b = spec.params["jitter_bound"]
    i, j = _lattice_indices(R, angle, lo, hi, pad=b + 1e-9)
    u1 = keyed_uniform(spec.seed, i, j, stream=1)
    u2 = keyed_uniform(spec.seed, i, j, stream=2)
    rad = b * np.sqrt(u1)
    th = 2.0 * math.pi * u2
    pts = np.stack([i + rad * np.cos(th), j + rad * np.sin(th)], axis=1)
    return _finish(spec, R, pts, None, [i, j], angle, lo, hi)


def _root_floor(x: np.ndarray, a) -> np.ndarray:
    """floor(x**(1/a)) for x >= 0, padded by one (callers re-filter exactly)."""
    return np.floor(np.power(np.maximum(x, 0.0), 1.0 / float(a))) + 1


def _root_ceil(x: np.ndarray, a) -> np.ndarray:
    return np.maximum(np.ceil(np.power(np.maximum(x, 0.0), 1.0 / float(a))) - 1, 1)


def _gen_powers(spec, R, signs, a, angle=None, lo=None, hi=None):
    """Points (s1*m^a, s2*n^a), m, n >= 1, for each sign pattern."""
    exact_int = isinstance(a, int)
    mmax = int(math.floor(float(R) ** (1.0 / float(a)))) + 1
    ms = np.arange(1, mmax + 1, dtype=np.int64)
    mpow = ms.astype(float) ** float(a)
    Rf = float(R)
    pieces = []
    for s1, s2 in signs:
        if angle is None:
            rest = np.sqrt(np.maximum(Rf * Rf - mpow**2, 0.0))
            n_hi = np.minimum(_root_floor(rest, a), mmax).astype(np.int64)
            n_hi[mpow > Rf] = 0
            m, n = _expand(ms, np.ones_like(ms), n_hi)
        else:
            c, s = math.cos(angle), math.sin(angle)
            # iterate over the coordinate whose coefficient is smaller
            if abs(s) >= abs(c):
                x = s1 * mpow
                lo_t, hi_t = _strip_range(x * c, lo, hi, s2 * s)
                t_lo = _root_ceil(lo_t, a)
                t_hi = np.minimum(_root_floor(hi_t, a), mmax)
                t_hi[(hi_t < 0) | (mpow > Rf)] = 0
                m, n = _expand(ms, t_lo.astype(np.int64), t_hi.astype(np.int64))
            else:
                y = s2 * mpow
                lo_t, hi_t = _strip_range(y * s, lo, hi, s1 * c)
                t_lo = _root_ceil(lo_t, a)
                t_hi = np.minimum(_root_floor(hi_t, a), mmax)
                t_hi[(hi_t < 0) | (mpow > Rf)] = 0
                n, m = _expand(ms, t_lo.astype(np.int64), t_hi.astype(np.int64))
        if exact_int:
            ex = np.stack([s1 * m**a, s2 * n**a], axis=1)
            pts = ex.astype(float)
        else:
            ex = None
            pts = np.stack([s1 * m.astype(float) ** a, s2 * n.astype(float) ** a], axis=1)
        sign_id = np.full(len(m), _ALL_SIGNS.index((s1, s2)), dtype=np.int64)
        pieces.append((pts, ex, sign_id, m, n))
    pts = np.concatenate([p[0] for p in pieces]) if pieces else np.zeros((0, 2))
    ex = np.concatenate([p[1] for p in pieces]) if exact_int else None
    keys = [np.concatenate([p[k] for p in pieces]) for k in (2, 3, 4)]
    return _finish(spec, R, pts, ex, keys, angle, lo, hi)


def _gen_product(spec, R, angle=None, lo=None, hi=None):
    rseq: SequenceSpec = spec.params["rseq"]
    K = rseq.count_le(R)
    terms = rseq.prefix(K) if K else []
    r = np.array([float(v) for v in terms], dtype=float)
    ks = np.arange(1, K + 1, dtype=np.int64)
    Rf = float(R)
    half = np.floor(np.sqrt(np.maximum(Rf * Rf - r**2, 0.0))).astype(np.int64)
    if angle is None or abs(math.cos(angle)) < 1e-12:
        k, n = _expand(ks, -half, half)
    else:
        c, s = math.cos(angle), math.sin(angle)
        a, b = _strip_range(r * s, lo, hi, c)
        n_lo = np.maximum(np.floor(a) - 1, -half).astype(np.int64)
        n_hi = np.minimum(np.ceil(b) + 1, half).astype(np.int64)
        k, n = _expand(ks, n_lo, n_hi)
    rk = r[k - 1] if len(k) else np.zeros(0)
    pts = np.stack([n.astype(float), rk], axis=1)
    exact = None
    if terms and all(isinstance(v, int) for v in terms) and terms[-1] < 2**62:
        iv = np.array(terms, dtype=np.int64)
        exact = np.stack([n, iv[k - 1] if len(k) else np.zeros(0, dtype=np.int64)], axis=1)
    elif terms and all(is_exact(v) for v in terms):
        exact = np.empty((len(k), 2), dtype=object)
        for idx in range(len(k)):
            exact[idx, 0] = int(n[idx])
            exact[idx, 1] = Fraction(terms[k[idx] - 1])
    return _finish(spec, R, pts, exact, [k, n], angle, lo, hi)


@lru_cache(maxsize=4)
def _polar_all(spec: GeneratorSpec, K: int):
    rseq: SequenceSpec = spec.params["rseq"]
    r = rseq.prefix_array(K)
    ks = np.arange(1, K + 1, dtype=np.int64)
    th = 2.0 * math.pi * keyed_uniform(spec.seed, ks, stream=3)
    pts = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    pts.setflags(write=False)
    return pts, ks


class ResourceCapError(RuntimeError):
    """A materialisation would exceed its configured budget."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


def _gen_polar(spec, R, angle=None, lo=None, hi=None):
    rseq: SequenceSpec = spec.params["rseq"]
    K = rseq.count_le(R)
    if K > spec.params["k_max"]:
        raise ResourceCapError(f"random_polar needs {K} points, budget is {spec.params['k_max']}",
                               partial={"count": K})
    if K == 0:
        return _finish(spec, R, np.zeros((0, 2)), None, [], angle, lo, hi)
    pts, ks = _polar_all(spec, K)
    return _finish(spec, R, pts, None, [ks], angle, lo, hi)


def _gen_explicit(spec, R, angle=None, lo=None, hi=None):
    raw = spec.params["points"]
    seen, uniq = set(), []
    for p in raw:
        key = (Fraction(p[0]), Fraction(p[1])) if all(is_exact(v) for v in p) else (float(p[0]), float(p[1]))
        if key not in seen:
            seen.add(key)
            uniq.append(p)
    pts = np.array([[float(a), float(b)] for a, b in uniq], dtype=float).reshape(-1, 2)
    exact = None
    if uniq and all(is_exact(v) for p in uniq for v in p):
        if all(Fraction(v).denominator == 1 and abs(v) < 2**62 for p in uniq for v in p):
            exact = np.array([[int(a), int(b)] for a, b in uniq], dtype=np.int64)
        else:
            exact = np.empty((len(uniq), 2), dtype=object)
            for i, (a, b) in enumerate(uniq):
                exact[i] = (Fraction(a), Fraction(b))
    idx = np.arange(len(uniq), dtype=np.int64)
    return _finish(spec, R, pts, exact, [idx], angle, lo, hi)


def _dispatch(spec, R, angle=None, lo=None, hi=None):
    if spec.kind == "integer_lattice":
        return _gen_lattice(spec, R, angle, lo, hi)
    if spec.kind == "jittered_lattice":
        return _gen_jittered(spec, R, angle, lo, hi)
    if spec.kind == "squares_M0":
        return _gen_powers(spec, R, _SQUARE_CONVENTIONS[spec.params["convention"]], 2, angle, lo, hi)
    if spec.kind == "signed_powers":
        return _gen_powers(spec, R, _ALL_SIGNS, spec.params["a"], angle, lo, hi)
    if spec.kind == "product_set":
        return _gen_product(spec, R, angle, lo, hi)
    if spec.kind == "random_polar":
        return _gen_polar(spec, R, angle, lo, hi)
    return _gen_explicit(spec, R, angle, lo, hi)


def materialize(spec: GeneratorSpec, R: float, seed: Optional[int] = None) -> TruncatedSet:
    """All points of the family with norm <= R, deduplicated, in a fixed order."""
    if not R > 0:
        raise GeneratorError("radius must be positive")
    if seed is not None:
        if spec.kind not in RANDOMIZED:
            raise GeneratorError(f"{spec.kind} takes no seed")
        spec = GeneratorSpec(spec.kind, spec.params, seed)
    return _dispatch(spec, R)


def materialize_strip(spec: GeneratorSpec, R: float, angle: float, lo: float, hi: float) -> TruncatedSet:
    """Points of norm <= R with lo <= x1*cos(angle) + x2*sin(angle) <= hi."""
    if not R > 0:
        raise GeneratorError("radius must be positive")
    if not lo <= hi:
        raise GeneratorError("empty strip")
    return _dispatch(spec, R, float(angle), float(lo), float(hi))


# -- derived quantities -------------------------------------------------------------

def pair_slope_set(ts: TruncatedSet) -> list:
    """Slopes beta at which psi_beta identifies two distinct points of ``ts``.

    For p, q with p2 != q2 the slope is -(p1 - q1)/(p2 - q2).  Returned sorted and
    deduplicated; Fractions when the truncation carries exact coordinates.
    """
    n = len(ts)
    if n < 2:
        return []
    if ts.exact is not None:
        pts = [(Fraction(a), Fraction(b)) for a, b in ts.exact.tolist()]
        out = set()
        for i in range(n):
            p1, p2 = pts[i]
            for j in range(i + 1, n):
                q1, q2 = pts[j]
                if p2 != q2:
                    out.add(-(p1 - q1) / (p2 - q2))
        return sorted(out)
    P = ts.points
    i, j = np.triu_indices(n, k=1)
    d2 = P[i, 1] - P[j, 1]
    ok = d2 != 0
    beta = -(P[i, 0] - P[j, 0])[ok] / d2[ok]
    return sorted(np.unique(beta).tolist())


def syndetic_check(ts: TruncatedSet, probe_radius: float, grid_step: float) -> float:
    """Largest distance from a probe grid point (norm <= probe_radius) to the set.

    A lower estimate of the covering radius D0(M, R^2).  Raises if the probe region
    is not safely inside the truncation.
    """
    if len(ts) == 0:
        raise GeneratorError("empty truncated set")
    if not (probe_radius > 0 and grid_step > 0):
        raise GeneratorError("probe_radius and grid_step must be positive")
    n = int(math.floor(probe_radius / grid_step))
    g = np.arange(-n, n + 1) * grid_step
    gx, gy = np.meshgrid(g, g, indexing="ij")
    grid = np.stack([gx.ravel(), gy.ravel()], axis=1)
    grid = grid[in_ball(grid, probe_radius)]
    dist, _ = cKDTree(ts.points).query(grid)
    est = float(dist.max())
    if probe_radius + est > ts.radius:
        raise GeneratorError(
            f"probe radius {probe_radius} + covering estimate {est:.4g} exceeds truncation radius {ts.radius}"
        )
    return est
