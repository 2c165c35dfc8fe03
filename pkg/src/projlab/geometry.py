"""Projection arithmetic, directions, windows and truncated point sets.

Two projections are used throughout.  ``phi`` is the orthogonal projection on the
unit vector (cos a, sin a); ``psi`` is the slope form x1 + beta*x2.  For non-vertical
directions they differ by the positive-or-negative factor cos a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .exact import QuadraticIrrational, is_exact, parse_rational, rational_str

TAU = 1e-12
TAU_GAP = 1e-9
TWO_PI = 2.0 * math.pi


class VerticalDirectionError(ValueError):
    """Raised when the slope form is requested for a vertical direction."""


@dataclass(frozen=True)
class Point2:
    x1: float
    x2: float
    exact: Optional[tuple[Fraction, Fraction]] = None

    def __post_init__(self):
        if not (math.isfinite(self.x1) and math.isfinite(self.x2)):
            raise ValueError("point coordinates must be finite")
        if self.exact is not None:
            for f, e in zip((self.x1, self.x2), self.exact):
                if abs(f - float(e)) > abs(math.ulp(float(e))):
                    raise ValueError("float view disagrees with exact coordinates")

    @classmethod
    def of(cls, x1, x2) -> "Point2":
        """Build from ints/Fractions (kept exact) or floats."""
        if is_exact(x1) and is_exact(x2) and not isinstance(x1, QuadraticIrrational):
            e = (Fraction(x1), Fraction(x2))
            return cls(float(e[0]), float(e[1]), e)
        return cls(float(x1), float(x2))

    @property
    def norm(self) -> float:
        return math.hypot(self.x1, self.x2)


@dataclass(frozen=True)
class Direction:
    """A projection direction, kept in angle and slope form.

    ``exact_slope`` is a Fraction or QuadraticIrrational when the slope is known
    exactly, else None.  ``slope`` is None for vertical directions.
    """

    angle: float
    slope: Optional[float]
    exact_slope: object = None

    def __post_init__(self):
        if not (0.0 <= self.angle < TWO_PI):
            raise ValueError(f"angle {self.angle} outside [0, 2pi)")
        if self.slope is not None:
            # compared in angle space: tan is ill-conditioned near vertical
            gap = math.fmod(abs(math.atan(self.slope) - self.angle), math.pi)
            if min(gap, math.pi - gap) > TAU:
                raise ValueError("slope and angle disagree")

    @classmethod
    def from_angle(cls, angle: float) -> "Direction":
        if not math.isfinite(angle):
            raise ValueError("angle must be finite")
        a = math.fmod(angle, TWO_PI)
        if a < 0:
            a += TWO_PI
        if a >= TWO_PI:
            a = 0.0
        c = math.cos(a)
        if abs(c) < 1e-15:
            return cls(a, None)
        return cls(a, math.tan(a))

    @classmethod
    def from_slope(cls, beta) -> "Direction":
        """Direction in (-pi/2, pi/2) mod 2pi with tan = beta; exact betas are remembered."""
        b = float(beta)
        if not math.isfinite(b):
            raise ValueError("slope must be finite")
        a = math.atan(b)
        if a < 0:
            a += TWO_PI
        exact = beta if is_exact(beta) else None
        if isinstance(exact, int):
            exact = Fraction(exact)
        return cls(a, b, exact)

    @property
    def vertical(self) -> bool:
        return self.slope is None

    @property
    def exactness(self) -> str:
        if isinstance(self.exact_slope, Fraction):
            return "rational"
        if isinstance(self.exact_slope, QuadraticIrrational):
            return "quadratic-irrational"
        return "float"

    def to_json(self) -> dict:
        from .exact import scalar_to_json

        return {
            "angle": self.angle,
            "slope": self.slope,
            "exactness": self.exactness,
            "exact_slope": scalar_to_json(self.exact_slope) if self.exact_slope is not None else None,
        }


@dataclass(frozen=True)
class Window:
    """Open interval (lo, hi) with rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", parse_rational(self.lo))
        object.__setattr__(self, "hi", parse_rational(self.hi))
        if not self.lo < self.hi:
            raise ValueError(f"empty window ({self.lo}, {self.hi})")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, v) -> bool:
        """Open-interval membership; exact for Fractions and quadratic irrationals."""
        if isinstance(v, QuadraticIrrational):
            return v > self.lo and v < self.hi
        if is_exact(v):
            return self.lo < v < self.hi
        return float(self.lo) < v < float(self.hi)

    def to_json(self) -> list[str]:
        return [rational_str(self.lo), rational_str(self.hi)]

    @classmethod
    def from_json(cls, obj) -> "Window":
        lo, hi = obj
        return cls(parse_rational(lo), parse_rational(hi))

    def __str__(self) -> str:
        return f"({rational_str(self.lo)}, {rational_str(self.hi)})"


@dataclass(frozen=True, eq=False)
class TruncatedSet:
    """Finite piece M cap B(R) of a generated set.

    ``points`` is an (N, 2) float array.  ``exact`` is an (N, 2) array of Python ints
    or Fractions (dtype object) or int64 when the family is rational-valued, else None.
    ``strip`` records (angle, lo, hi) when only the points with phi-projection in the
    closed interval [lo, hi] were kept.
    """

    points: np.ndarray
    radius: float
    spec_id: str
    seed: Optional[int] = None
    exact: Optional[np.ndarray] = None
    strip: Optional[tuple[float, float, float]] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "points", pts)
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite coordinates")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def norms(self) -> np.ndarray:
        return np.hypot(self.points[:, 0], self.points[:, 1])

    def restrict(self, radius: float) -> "TruncatedSet":
        """The sub-truncation at a smaller radius (order preserved)."""
        if radius > self.radius:
            raise ValueError("cannot enlarge a truncation")
        # same closed-ball test as materialization, so restrict(R) == materialize(R)
        keep = self.points[:, 0] ** 2 + self.points[:, 1] ** 2 <= float(radius) ** 2
        ex = self.exact[keep] if self.exact is not None else None
        return TruncatedSet(self.points[keep], radius, self.spec_id, self.seed, ex, self.strip, dict(self.meta))

    def point(self, i: int) -> Point2:
        if self.exact is not None:
            return Point2(float(self.points[i, 0]), float(self.points[i, 1]),
                          (Fraction(self.exact[i, 0]), Fraction(self.exact[i, 1])))
        return Point2(float(self.points[i, 0]), float(self.points[i, 1]))

    def to_json(self) -> dict:
        if self.exact is not None:
            pts = [[_num_json(a), _num_json(b)] for a, b in self.exact.tolist()]
        else:
            pts = self.points.tolist()
        return {
            "format_version": "1",
            "spec_id": self.spec_id,
            "radius": self.radius,
            "seed": self.seed,
            "strip": list(self.strip) if self.strip else None,
            "count": len(self),
            "points": pts,
        }


def _num_json(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else rational_str(x)
    return int(x) if isinstance(x, (int, np.integer)) else x


# -- single-point projections -------------------------------------------------

def project_phi(p: Point2, d: Direction) -> float:
    return p.x1 * math.cos(d.angle) + p.x2 * math.sin(d.angle)


def project_psi(p: Point2, beta):
    """x1 + beta*x2.  Exact (Fraction) when the point and beta are both rational."""
    if isinstance(beta, Direction):
        if beta.vertical:
            raise VerticalDirectionError("psi projection is undefined for vertical directions")
        beta = beta.exact_slope if beta.exact_slope is not None else beta.slope
    if beta is None:
        raise VerticalDirectionError("psi projection is undefined for vertical directions")
    if isinstance(beta, float) and not math.isfinite(beta):
        raise VerticalDirectionError("infinite slope")
    if p.exact is not None and is_exact(beta):
        if isinstance(beta, QuadraticIrrational):
            return beta * p.exact[1] + p.exact[0]
        return p.exact[0] + Fraction(beta) * p.exact[1]
    return p.x1 + float(beta) * p.x2


def phi_psi_consistency(p: Point2, d: Direction) -> float:
    if d.vertical:
        raise VerticalDirectionError("consistency check needs a non-vertical direction")
    return abs(project_phi(p, d) - math.cos(d.angle) * float(project_psi(p, d.slope)))


# -- vectorised projections ----------------------------------------------------

def phi_values(points: np.ndarray, angle: float) -> np.ndarray:
    return points[:, 0] * math.cos(angle) + points[:, 1] * math.sin(angle)


def psi_values(points: np.ndarray, beta: float) -> np.ndarray:
    return points[:, 0] + float(beta) * points[:, 1]


def exact_psi_numerators(exact: np.ndarray, beta: Fraction) -> Optional[tuple[np.ndarray, int]]:
    """Psi values of integer points at a rational slope as (numerators, denominator).

    Returns None when the coordinates are not integers or the numerators could
    overflow int64.
    """
    if exact is None or exact.dtype != np.int64:
        return None
    beta = Fraction(beta)
    p, q = beta.numerator, beta.denominator
    if len(exact):
        bound = int(np.abs(exact).max()) * (abs(p) + q)
        if bound >= 2**62:
            return None
    return exact[:, 0] * q + exact[:, 1] * p, q


def project_truncated(ts: TruncatedSet, d: Direction, form: str = "phi", exact: bool = False):
    """Sorted projected values of a truncation (multiplicities preserved).

    With ``exact=True`` and rational data, returns a sorted list of Fractions.
    """
    if len(ts) == 0:
        raise ValueError("empty truncated set")
    if form == "phi":
        return np.sort(phi_values(ts.points, d.angle))
    if form != "psi":
        raise ValueError(f"unknown projection form {form!r}")
    if d.vertical:
        raise VerticalDirectionError("psi projection is undefined for vertical directions")
    if exact and ts.exact is not None and isinstance(d.exact_slope, Fraction):
        b = d.exact_slope
        vals = [Fraction(x1) + b * Fraction(x2) for x1, x2 in ts.exact.tolist()]
        return sorted(vals)
    return np.sort(psi_values(ts.points, d.slope))
