"""Box-counting estimates for direction sets, and finite-depth survivor sets.

The survivor set for a rising sequence r and a target window T inside (0, 1) is
the set of grid boxes on [0, 1] whose center beta keeps frac(beta * r_k) outside T
for every k <= K.  It over-approximates, at finite depth, a subset of the betas for
which {beta r_k} is not dense mod 1.  Box counts are labelled as estimates at a
given depth; nothing here computes a Hausdorff dimension.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .exact import parse_rational, rational_str
from .geometry import Window
from .sequences import SequenceError, SequenceSpec


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class DirectionSet:
    """Either a sample of beta values or a disjoint sorted union of open rational windows."""

    kind: str  # "point_sample" | "interval_union"
    members: tuple
    ambient: Window = Window(Fraction(0), Fraction(1))

    def __post_init__(self):
        if self.kind == "point_sample":
            vals = tuple(float(b) for b in self.members)
            lo, hi = float(self.ambient.lo), float(self.ambient.hi)
            if any(not (lo <= v <= hi) for v in vals):
                raise DimensionError("sample point outside the ambient interval")
            object.__setattr__(self, "members", vals)
        elif self.kind == "interval_union":
            ws = tuple(self.members)
            for a, b in zip(ws, ws[1:]):
                if not a.hi <= b.lo:
                    raise DimensionError("intervals must be disjoint and sorted")
            if ws and (ws[0].lo < self.ambient.lo or ws[-1].hi > self.ambient.hi):
                raise DimensionError("interval outside the ambient interval")
            object.__setattr__(self, "members", ws)
        else:
            raise DimensionError(f"unknown direction-set kind {self.kind!r}")

    @classmethod
    def points(cls, betas, ambient=(0, 1)) -> "DirectionSet":
        return cls("point_sample", tuple(betas), Window(*ambient))

    @classmethod
    def intervals(cls, windows, ambient=(0, 1)) -> "DirectionSet":
        ws = [w if isinstance(w, Window) else Window(*w) for w in windows]
        return cls("interval_union", tuple(ws), Window(*ambient))

    def __len__(self) -> int:
        return len(self.members)

    @property
    def empty(self) -> bool:
        return len(self.members) == 0

    def measure(self) -> Fraction | float:
        if self.kind == "interval_union":
            return sum((w.width for w in self.members), Fraction(0))
        return 0.0

    def to_json(self) -> dict:
        if self.kind == "interval_union":
            mem = [w.to_json() for w in self.members]
        else:
            mem = list(self.members)
        return {"kind": self.kind, "ambient": self.ambient.to_json(), "members": mem}


def cantor_union(level: int) -> DirectionSet:
    """Level-n middle-thirds approximant: 2^n open intervals of width 3^-n."""
    ivs = [(Fraction(0), Fraction(1))]
    for _ in range(level):
        nxt = []
        for lo, hi in ivs:
            third = (hi - lo) / 3
            nxt.append((lo, lo + third))
            nxt.append((hi - third, hi))
        ivs = nxt
    return DirectionSet.intervals(ivs)


# -- survivors ---------------------------------------------------------------------------------

def survivors_nd(rseq: SequenceSpec, K: int, target: Window, grid_depth: int) -> DirectionSet:
    """Union of the width-2^-grid_depth boxes on [0, 1] whose centers avoid the target for all k <= K."""
    if K < 4:
        raise DimensionError("K must be at least 4")
    if not (target.lo >= 0 and target.hi <= 1):
        raise DimensionError("target must lie inside (0, 1)")
    if not 1 <= grid_depth <= 24:
        raise DimensionError("grid_depth must be in [1, 24]")
    terms = rseq.prefix(K)  # raises SequenceError when not rising
    n = 1 << grid_depth
    D = 2 * n  # centers are (2i+1)/D
    odd = 2 * np.arange(n, dtype=np.int64) + 1
    alive = np.ones(n, dtype=bool)
    integral = all(isinstance(r, int) for r in terms)
    if integral and max(terms) < (1 << 62) // D:
        # frac(c * r) = ((2i+1) r mod D) / D exactly; compare numerators against the target scaled by D
        lo_num, hi_num = target.lo * D, target.hi * D
        for r in terms:
            rm = r % D
            res = (odd * rm) % D
            inside = (res > math.floor(lo_num)) & (res < math.ceil(hi_num))
            alive &= ~inside
            if not alive.any():
                break
    else:
        centers = odd / D
        lo, hi = float(target.lo), float(target.hi)
        for r in terms:
            f = np.mod(centers * float(r), 1.0)
            alive &= ~((f > lo) & (f < hi))
            if not alive.any():
                break
    idx = np.flatnonzero(alive)
    wins = []
    # merge runs of consecutive boxes
    if len(idx):
        breaks = np.flatnonzero(np.diff(idx) != 1)
        starts = np.concatenate(([idx[0]], idx[breaks + 1]))
        ends = np.concatenate((idx[breaks], [idx[-1]]))
        for s, e in zip(starts.tolist(), ends.tolist()):
            wins.append(Window(Fraction(s, n), Fraction(e + 1, n)))
    return DirectionSet("interval_union", tuple(wins))


# -- box counting ------------------------------------------------------------------------------

def box_count(ds: DirectionSet, w) -> int:
    """Number of width-w boxes tiling the ambient interval that meet the set."""
    lo = ds.ambient.lo
    if ds.kind == "interval_union":
        w = parse_rational(w)
        if not w > 0:
            raise DimensionError("box width must be positive")
        total = 0
        last_end = -1
        for win in ds.members:
            # box j = (lo + j w, lo + (j+1) w) meets (a, b) iff j w < b - lo and (j+1) w > a - lo
            j0 = math.floor((win.lo - lo) / w)
            j1 = math.ceil((win.hi - lo) / w) - 1
            j0 = max(j0, last_end + 1)
            if j1 >= j0:
                total += j1 - j0 + 1
                last_end = j1
        return total
    wf = float(w)
    if not wf > 0:
        raise DimensionError("box width must be positive")
    if ds.empty:
        return 0
    v = (np.asarray(ds.members) - float(lo)) / wf
    nmax = math.ceil(float(ds.ambient.width) / wf) - 1
    j = np.clip(np.floor(v), 0, max(nmax, 0)).astype(np.int64)
    return int(len(np.unique(j)))


@dataclass
class BoxCountReport:
    scales: list
    counts: list[int]
    slope: float
    residual: float
    fit_scales: list
    degenerate: bool = False
    label: str = "box-dimension estimate"

    def to_json(self) -> dict:
        return {
            "scales": [rational_str(s) if isinstance(s, Fraction) else s for s in self.scales],
            "counts": self.counts,
            "slope": self.slope,
            "residual": self.residual,
            "fit_scales": [rational_str(s) if isinstance(s, Fraction) else s for s in self.fit_scales],
            "degenerate": self.degenerate,
            "label": self.label,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["log_inv_w", "log_N"])
        for s, c in zip(self.scales, self.counts):
            wr.writerow([repr(-math.log(float(s))), repr(math.log(c)) if c > 0 else "-inf"])
        return buf.getvalue()


def dyadic_scales(lo: int, hi: int) -> list[Fraction]:
    return [Fraction(1, 2**j) for j in range(lo, hi + 1)]


def box_dim_estimate(ds: DirectionSet, scales: Sequence, label: str = "box-dimension estimate") -> BoxCountReport:
    """Least-squares slope of log N(w) against log(1/w) on the finest half of the scales."""
    if len(scales) < 4:
        raise DimensionError("need at least four scales")
    sc = [parse_rational(s) if ds.kind == "interval_union" else float(s) for s in scales]
    sc = sorted(set(sc), reverse=True)  # coarse to fine
    counts = [box_count(ds, w) for w in sc]
    fit = sc[len(sc) // 2:]
    fc = counts[len(sc) - len(fit):]
    if ds.empty or min(fc) == 0:
        return BoxCountReport(sc, counts, 0.0, 0.0, fit, True, label)
    x = np.array([-math.log(float(w)) for w in fit])
    y = np.log(np.array(fc, dtype=float))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return BoxCountReport(sc, counts, float(coef[0]), resid, fit, False, label)
