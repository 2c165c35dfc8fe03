"""Evidence labels for directions: dense, discrete, exceptional or undetermined.

A direction is probed through a finite radii schedule R_0 < R_1 < ... < R_{J-1}.  At
each radius we look at the projected values of M cap B(R_j) inside [-T, T] and keep
counts, gaps and per-window counts.  The verdict rules:

* dense: final max gap <= delta_dense and max gap non-increasing over the last
  three radii;
* discrete: the number of distinct values is unchanged over the last two radii
  and the final min gap is >= gamma_disc;
* exceptional: some grid window stays empty at every radius while the number of
  distinct values in [-T, T] grows by a factor >= rho over each of the last two
  radius steps.

When several fire, exceptional wins over dense, dense over discrete, and the
conflict is recorded.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .exact import QuadraticIrrational, is_exact, parse_rational, rational_str, scalar_to_json
from .generators import GeneratorSpec, ResourceCapError, in_ball, materialize_strip
from .geometry import (TAU_GAP, Direction, TruncatedSet, VerticalDirectionError, Window,
                       exact_psi_numerators, phi_values, psi_values)

DENSE = "DenseEvidence"
DISCRETE = "DiscreteEvidence"
EXCEPTIONAL = "ExceptionalEvidence"
UNDETERMINED = "Undetermined"


class ClassifierError(ValueError):
    pass


class WitnessError(ValueError):
    pass


class WitnessInvariantError(WitnessError):
    """An emitted witness would violate one of its exact invariants."""


@dataclass(frozen=True)
class RadiiSchedule:
    R0: float = 100.0
    factor: float = 4.0
    steps: int = 6
    cap: float = 1e7

    def __post_init__(self):
        if not self.R0 > 0:
            raise ClassifierError("R0 must be positive")
        if not self.factor > 1:
            raise ClassifierError("factor must exceed 1")
        if self.steps < 2:
            raise ClassifierError("need at least two radii")
        if self.radii[-1] > self.cap:
            raise ResourceCapError(f"final radius {self.radii[-1]:g} exceeds cap {self.cap:g}")

    @property
    def radii(self) -> list[float]:
        return [float(self.R0) * float(self.factor) ** j for j in range(self.steps)]

    def to_json(self) -> dict:
        return {"R0": self.R0, "factor": self.factor, "steps": self.steps, "cap": self.cap}

    @classmethod
    def from_json(cls, obj) -> "RadiiSchedule":
        extra = set(obj) - {"R0", "factor", "steps", "cap"}
        if extra:
            raise ClassifierError(f"unexpected schedule fields {sorted(extra)}")
        return cls(**obj)


def default_window_grid(T) -> list[Window]:
    """The 32 windows of width T/16 partitioning [-T, T]."""
    T = parse_rational(T)
    w = T / 16
    return [Window(-T + i * w, -T + (i + 1) * w) for i in range(32)]


@dataclass(frozen=True)
class ClassifierParams:
    T: Fraction = Fraction(10)
    delta_dense: float = 0.05
    gamma_disc: float = 0.01
    rho: float = 1.5
    window_grid: Optional[tuple[Window, ...]] = None
    form: str = "psi"
    max_points: int = 30_000_000

    def __post_init__(self):
        object.__setattr__(self, "T", parse_rational(self.T))
        if not self.T > 0:
            raise ClassifierError("T must be positive")
        if not (self.delta_dense > 0 and self.gamma_disc > 0 and self.rho > 0):
            raise ClassifierError("delta_dense, gamma_disc and rho must be positive")
        if self.form not in ("phi", "psi"):
            raise ClassifierError(f"unknown form {self.form!r}")
        grid = tuple(self.window_grid) if self.window_grid is not None else tuple(default_window_grid(self.T))
        for w in grid:
            if w.lo < -self.T or w.hi > self.T:
                raise ClassifierError(f"grid window {w} is not inside [-T, T]")
        object.__setattr__(self, "window_grid", grid)

    def to_json(self) -> dict:
        return {
            "T": rational_str(self.T),
            "delta_dense": self.delta_dense,
            "gamma_disc": self.gamma_disc,
            "rho": self.rho,
            "form": self.form,
            "max_points": self.max_points,
            "window_grid": [w.to_json() for w in self.window_grid],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ClassifierParams":
        extra = set(obj) - {"T", "delta_dense", "gamma_disc", "rho", "form", "max_points", "window_grid",
                            "extra_windows"}
        if extra:
            raise ClassifierError(f"unexpected classifier fields {sorted(extra)}")
        kw = {k: v for k, v in obj.items() if k not in ("window_grid", "extra_windows")}
        if "T" in kw:
            kw["T"] = parse_rational(kw["T"])
        grid = None
        if obj.get("window_grid") is not None:
            grid = [Window.from_json(w) for w in obj["window_grid"]]
        if obj.get("extra_windows"):
            base = grid if grid is not None else default_window_grid(kw.get("T", Fraction(10)))
            grid = list(base) + [Window.from_json(w) for w in obj["extra_windows"]]
        return cls(window_grid=tuple(grid) if grid is not None else None, **kw)


# -- primitive statistics ----------------------------------------------------------------

def window_count(projected: Sequence, J: Window) -> int:
    """Number of values strictly inside J; exact when the values are exact."""
    if len(projected) == 0:
        return 0
    if isinstance(projected, np.ndarray):
        lo = np.searchsorted(projected, float(J.lo), side="right")
        hi = np.searchsorted(projected, float(J.hi), side="left")
        return int(max(hi - lo, 0))
    lo = bisect.bisect_right(projected, J.lo)
    hi = bisect.bisect_left(projected, J.hi)
    return max(hi - lo, 0)


@dataclass(frozen=True)
class GapStats:
    max_gap: float
    min_gap: float
    count: int


def _is_dup(diff, values, tol=TAU_GAP):
    return diff <= tol * (1.0 + np.abs(values))


def gap_stats(projected: Sequence, T) -> GapStats:
    """Gaps of the values inside [-T, T].

    max_gap includes the end distances -T -> first and last -> T; min_gap is the
    smallest positive consecutive difference (differences below the tolerance are
    treated as duplicates), inf if there is none; count keeps multiplicities.
    """
    T = float(T)
    v = np.asarray([float(x) for x in projected] if not isinstance(projected, np.ndarray) else projected,
                   dtype=float)
    v = v[(v >= -T) & (v <= T)]
    if len(v) == 0:
        return GapStats(2 * T, math.inf, 0)
    ext = np.concatenate(([-T], v, [T]))
    max_gap = float(np.max(np.diff(ext)))
    d = np.diff(v)
    pos = d[~_is_dup(d, v[1:])]
    min_gap = float(pos.min()) if len(pos) else math.inf
    return GapStats(max_gap, min_gap, int(len(v)))


# -- values of a truncation in [-T, T] -----------------------------------------------------

@dataclass
class _Values:
    """Sorted projected values in [-T, T], as floats or as integers over a denominator."""

    vals: np.ndarray
    norms2: np.ndarray
    denom: Optional[int] = None  # exact path: value = vals / denom

    def at_radius(self, R: float) -> "_Values":
        keep = self.norms2 <= float(R) ** 2
        return _Values(self.vals[keep], self.norms2[keep], self.denom)

    def floats(self) -> np.ndarray:
        return self.vals / self.denom if self.denom else self.vals

    def distinct(self) -> int:
        if len(self.vals) == 0:
            return 0
        d = np.diff(self.vals)
        if self.denom:
            return int(1 + np.count_nonzero(d))
        return int(1 + np.count_nonzero(~_is_dup(d, self.vals[1:])))

    def gaps(self, T: Fraction) -> tuple[float, float]:
        if self.denom:
            if len(self.vals) == 0:
                return float(2 * T), math.inf
            lo = -T * self.denom
            hi = T * self.denom
            first, last = Fraction(int(self.vals[0])), Fraction(int(self.vals[-1]))
            d = np.diff(self.vals)
            inner = int(d.max()) if len(d) else 0
            mx = max(Fraction(inner), first - lo, hi - last) / self.denom
            pos = d[d > 0]
            mn = float(Fraction(int(pos.min()), self.denom)) if len(pos) else math.inf
            return float(mx), mn
        g = gap_stats(self.vals, T)
        return g.max_gap, g.min_gap

    def count_in(self, w: Window) -> int:
        if self.denom:
            lo = w.lo * self.denom
            hi = w.hi * self.denom
            a = np.searchsorted(self.vals, math.floor(lo), side="right")
            b = np.searchsorted(self.vals, math.ceil(hi), side="left")
            return int(max(b - a, 0))
        return window_count(self.vals, w)


def _strip_values(spec: GeneratorSpec, d: Direction, R: float, params: ClassifierParams) -> tuple[_Values, int]:
    T = params.T
    Tf = float(T)
    if params.form == "psi":
        if d.vertical:
            raise VerticalDirectionError("psi form needs a non-vertical direction")
        c = abs(math.cos(d.angle))
        lo, hi = -Tf * c, Tf * c
    else:
        lo, hi = -Tf, Tf
    slack = 1e-9 * (1.0 + Tf)
    ts = materialize_strip(spec, R, d.angle, lo - slack, hi + slack)
    if len(ts) > params.max_points:
        raise ResourceCapError(f"{len(ts)} points in the strip exceed max_points={params.max_points}",
                               partial={"radius": R, "points": len(ts)})
    norms2 = ts.points[:, 0] ** 2 + ts.points[:, 1] ** 2
    if params.form == "psi" and isinstance(d.exact_slope, Fraction):
        ex = exact_psi_numerators(ts.exact, d.exact_slope)
        if ex is not None:
            num, q = ex
            keep = (num >= math.ceil(-T * q)) & (num <= math.floor(T * q))
            num, n2 = num[keep], norms2[keep]
            order = np.argsort(num, kind="stable")
            return _Values(num[order], n2[order], q), len(ts)
    v = psi_values(ts.points, d.slope) if params.form == "psi" else phi_values(ts.points, d.angle)
    keep = (v >= -Tf) & (v <= Tf)
    v, n2 = v[keep], norms2[keep]
    order = np.argsort(v, kind="stable")
    return _Values(v[order], n2[order]), len(ts)


# -- classification -------------------------------------------------------------------------

@dataclass
class Classification:
    verdict: str
    P: Optional[Window]
    Q: Optional[Window]
    stats: dict
    params: dict
    direction: dict

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "P": self.P.to_json() if self.P else None,
            "Q": self.Q.to_json() if self.Q else None,
            "stats": self.stats,
            "params": self.params,
            "direction": self.direction,
        }


def _as_direction(beta) -> Direction:
    if isinstance(beta, Direction):
        return beta
    return Direction.from_slope(beta)


def rederive_verdict(stats: dict, params: ClassifierParams) -> tuple[str, Optional[int], list[str]]:
    """Verdict from the per-radius statistics alone.

    Returns (verdict, index of the exceptional window or None, list of rules that fired).
    """
    rows = stats["per_radius"]
    last = rows[-1]
    maxg = [r["max_gap"] for r in rows[-3:]]
    dense = last["max_gap"] <= params.delta_dense and all(b <= a for a, b in zip(maxg, maxg[1:]))
    discrete = rows[-1]["distinct"] == rows[-2]["distinct"] and _num(last["min_gap"]) >= params.gamma_disc
    grow_ok = True
    for a, b in zip(rows[-3:], rows[-2:]):
        ca, cb = a["distinct"], b["distinct"]
        if not (cb > 0 and (ca == 0 or cb >= params.rho * ca)):
            grow_ok = False
    if len(rows) < 3:
        grow_ok = False
    empty = [i for i in range(len(params.window_grid)) if all(r["window_counts"][i] == 0 for r in rows)]
    q_idx = None
    if grow_ok and empty:
        # widest empty window, first on ties
        q_idx = max(empty, key=lambda i: (params.window_grid[i].width, -i))
    fired = [name for name, ok in ((EXCEPTIONAL, q_idx is not None), (DENSE, dense), (DISCRETE, discrete)) if ok]
    verdict = fired[0] if fired else UNDETERMINED
    return verdict, q_idx, fired


def _num(x):
    return math.inf if x == "inf" else float(x)


def _json_float(x: float):
    return "inf" if math.isinf(x) else x


def classify_direction(spec: GeneratorSpec, beta, sched: RadiiSchedule,
                       params: ClassifierParams = ClassifierParams()) -> Classification:
    """Evidence label for one direction (slope, exact slope, or Direction)."""
    d = _as_direction(beta)
    radii = sched.radii
    per_radius = []
    try:
        allv, n_strip = _strip_values(spec, d, radii[-1], params)
    except ResourceCapError as exc:
        exc.partial = {"per_radius": per_radius, **(exc.partial or {})}
        raise
    for R in radii:
        v = allv.at_radius(R)
        mx, mn = v.gaps(params.T)
        per_radius.append({
            "radius": R,
            "count": int(len(v.vals)),
            "distinct": v.distinct(),
            "max_gap": mx,
            "min_gap": _json_float(mn),
            "window_counts": [v.count_in(w) for w in params.window_grid],
        })
    stats = {
        "per_radius": per_radius,
        "strip_points": n_strip,
        "exact_path": allv.denom is not None,
        # a repeated value means psi_beta identifies two points: beta is a pair slope of M_R
        "in_pair_slope_set": per_radius[-1]["count"] > per_radius[-1]["distinct"],
    }
    verdict, q_idx, fired = rederive_verdict(stats, params)
    stats["rules_fired"] = fired
    stats["conflict"] = len(fired) > 1
    P = Window(-params.T, params.T) if verdict == EXCEPTIONAL else None
    Q = params.window_grid[q_idx] if q_idx is not None and verdict == EXCEPTIONAL else None
    return Classification(verdict, P, Q, stats, params.to_json(), d.to_json())


# -- exceptional witness ----------------------------------------------------------------------

@dataclass
class WitnessStep:
    z: tuple
    psi: object
    P_k: tuple
    Q_k: tuple
    J_k: tuple
    ratio: Fraction


@dataclass
class ExceptionalWitness:
    beta: object
    P: Window
    Q: Window
    steps: list[WitnessStep]
    ratio: Fraction
    q_empty_in_truncation: bool
    truncation_radius: float

    def __len__(self) -> int:
        return len(self.steps)

    def to_json(self) -> dict:
        def ep(x):
            if isinstance(x, QuadraticIrrational):
                return x.to_json()
            return rational_str(x)

        return {
            "beta": scalar_to_json(self.beta),
            "P": self.P.to_json(),
            "Q": self.Q.to_json(),
            "ratio": rational_str(self.ratio),
            "length": len(self.steps),
            "q_empty_in_truncation": self.q_empty_in_truncation,
            "truncation_radius": self.truncation_radius,
            "steps": [
                {
                    "z": [rational_str(s.z[0]), rational_str(s.z[1])],
                    "psi": ep(s.psi),
                    "P_k": [ep(s.P_k[0]), ep(s.P_k[1])],
                    "Q_k": [ep(s.Q_k[0]), ep(s.Q_k[1])],
                    "J_k": [ep(s.J_k[0]), ep(s.J_k[1])],
                    "ratio": rational_str(s.ratio),
                }
                for s in self.steps
            ],
        }


def _exact_beta(beta):
    if isinstance(beta, Direction):
        if beta.vertical:
            raise WitnessError("vertical direction")
        return beta.exact_slope if beta.exact_slope is not None else Fraction(beta.slope)
    if is_exact(beta):
        return beta if isinstance(beta, QuadraticIrrational) else Fraction(beta)
    return Fraction(float(beta))


def _lt(a, b) -> bool:
    """a < b for Fractions / quadratic irrationals in either position."""
    if isinstance(a, QuadraticIrrational):
        return a < b
    if isinstance(b, QuadraticIrrational):
        return b > a
    return a < b


def _exact_points(ts: TruncatedSet) -> list[tuple[Fraction, Fraction]]:
    if ts.exact is not None:
        return [(Fraction(a), Fraction(b)) for a, b in ts.exact.tolist()]
    return [(Fraction(float(a)), Fraction(float(b))) for a, b in ts.points.tolist()]


def build_exceptional_witness(ts_schedule, beta, P: Window, Q: Window, min_length: int = 3) -> ExceptionalWitness:
    """Nested-interval witness for beta in V(P, Q) on a finite truncation.

    Picks points z_k = (x_k, y_k) with psi_beta(z_k) in P and |y_k| strictly
    increasing and forms P_k = {t : x_k + t*y_k in P}, Q_k likewise, and
    J_k = (beta - d_k, beta + d_k) with d_k = diam(P u Q)/|y_k|.  All invariants
    are checked in exact arithmetic before returning.
    """
    if isinstance(ts_schedule, TruncatedSet):
        ts_schedule = [ts_schedule]
    ts = max(ts_schedule, key=lambda t: t.radius)
    b = _exact_beta(beta)
    bf = float(b)
    pts = ts.points
    psi_f = psi_values(pts, bf)
    slack = 1e-6 * (1 + np.abs(pts).sum(axis=1))
    cand = np.flatnonzero((psi_f > float(P.lo) - slack) & (psi_f < float(P.hi) + slack) & (pts[:, 1] != 0))
    exact_all = ts.exact
    chosen: dict = {}
    for i in cand.tolist():
        if exact_all is not None:
            x, y = Fraction(int(exact_all[i, 0])), Fraction(int(exact_all[i, 1]))
        else:
            x, y = Fraction(float(pts[i, 0])), Fraction(float(pts[i, 1]))
        if y == 0:
            continue
        v = b * y + x
        if not P.contains(v):
            continue
        key = abs(y)
        if key not in chosen or x < chosen[key][0]:
            chosen[key] = (x, y, v)
    if len(chosen) < min_length:
        raise WitnessError(f"only {len(chosen)} qualifying points (need {min_length})")

    d = max(P.hi, Q.hi) - min(P.lo, Q.lo)
    q = Q.width
    target = q / (2 * d)
    steps = []
    prev_abs_y = None
    for ay in sorted(chosen):
        x, y, v = chosen[ay]
        eps = 1 / ay
        pk = sorted(((P.lo - x) / y, (P.hi - x) / y))
        qk = sorted(((Q.lo - x) / y, (Q.hi - x) / y))
        dk = d * eps
        jk = (b - dk, b + dk)
        jw = jk[1] - jk[0]
        if isinstance(jw, QuadraticIrrational):
            raise WitnessInvariantError("interval width is not rational")
        ratio = (qk[1] - qk[0]) / Fraction(jw)
        # invariants, exactly
        if not (_lt(pk[0], b) and _lt(b, pk[1])):
            raise WitnessInvariantError(f"beta not in P_k at |y|={ay}")
        if ratio != target:
            raise WitnessInvariantError(f"ratio {ratio} differs from q/(2d) = {target}")
        if _lt(qk[0], jk[0]) or _lt(jk[1], qk[1]):
            raise WitnessInvariantError(f"Q_k not inside J_k at |y|={ay}")
        if prev_abs_y is not None and not ay > prev_abs_y:
            raise WitnessInvariantError("|y_k| not strictly increasing")
        prev_abs_y = ay
        steps.append(WitnessStep((x, y), v, tuple(pk), tuple(qk), jk, ratio))

    # finite evidence that Q is missed: exact test on points whose float value is near Q
    near = np.flatnonzero((psi_f > float(Q.lo) - 1e-6 * (1 + np.abs(psi_f))) &
                          (psi_f < float(Q.hi) + 1e-6 * (1 + np.abs(psi_f))))
    q_empty = True
    for i in near.tolist():
        if exact_all is not None:
            x, y = Fraction(int(exact_all[i, 0])), Fraction(int(exact_all[i, 1]))
        else:
            x, y = Fraction(float(pts[i, 0])), Fraction(float(pts[i, 1]))
        if Q.contains(b * y + x):
            q_empty = False
            break
    return ExceptionalWitness(b, P, Q, steps, target, q_empty, ts.radius)


# -- P-boundedness ------------------------------------------------------------------------------

@dataclass
class PBEvidence:
    verdict: str  # "stabilized" | "growing"
    radii: list[float]
    max_norms: list[float]
    counts: list[int]

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "radii": self.radii, "max_norms": self.max_norms, "counts": self.counts}


def pboundedness_evidence(spec: GeneratorSpec, d, J: Window, sched: RadiiSchedule,
                          max_points: int = 30_000_000) -> PBEvidence:
    """Largest norm of a point of M cap B(R_j) whose phi-projection lies in J, per radius.

    "stabilized" when that norm is the same at the last two radii, else "growing".
    """
    d = d if isinstance(d, Direction) else Direction.from_angle(float(d))
    radii = sched.radii
    lo, hi = float(J.lo), float(J.hi)
    ts = materialize_strip(spec, radii[-1], d.angle, lo, hi)
    if len(ts) > max_points:
        raise ResourceCapError(f"{len(ts)} strip points exceed max_points={max_points}")
    v = phi_values(ts.points, d.angle)
    keep = (v > lo) & (v < hi)
    pts = ts.points[keep]
    norms = np.hypot(pts[:, 0], pts[:, 1])
    norms2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
    max_norms, counts = [], []
    for R in radii:
        m = norms[norms2 <= float(R) ** 2]
        max_norms.append(float(m.max()) if len(m) else 0.0)
        counts.append(int(len(m)))
    verdict = "stabilized" if max_norms[-1] == max_norms[-2] else "growing"
    return PBEvidence(verdict, radii, max_norms, counts)
