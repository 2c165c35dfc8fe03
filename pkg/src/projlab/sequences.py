"""Rising sequences r_1 < r_2 < ... and finite-depth statistics on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .exact import is_exact, parse_rational, parse_scalar, scalar_to_json

SEQUENCE_KINDS = ("geometric", "polynomial", "arithmetic", "explicit")


class SequenceError(ValueError):
    """Invalid sequence parameters or a prefix that is not rising."""


def _num(v):
    """Keep exact numbers exact; floats stay floats."""
    v = parse_scalar(v)
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v)
    return v


@dataclass(frozen=True)
class SequenceSpec:
    kind: str
    params: tuple = field(default_factory=tuple)  # sorted (name, value) pairs

    def __post_init__(self):
        if self.kind not in SEQUENCE_KINDS:
            raise SequenceError(f"unknown sequence kind {self.kind!r}")
        p = dict(self.params)
        required = {
            "geometric": {"ratio", "r0"},
            "polynomial": {"exponent", "scale"},
            "arithmetic": {"step", "r0"},
            "explicit": {"values"},
        }[self.kind]
        missing = required - set(p)
        extra = set(p) - required
        if missing or extra:
            raise SequenceError(f"{self.kind}: missing {sorted(missing)}, unexpected {sorted(extra)}")
        if self.kind == "geometric" and not (p["ratio"] > 1 and p["r0"] > 0):
            raise SequenceError("geometric needs ratio > 1 and r0 > 0")
        if self.kind == "polynomial" and not (p["exponent"] > 0 and p["scale"] > 0):
            raise SequenceError("polynomial needs exponent > 0 and scale > 0")
        if self.kind == "arithmetic" and not (p["step"] > 0 and p["r0"] > 0):
            raise SequenceError("arithmetic needs step > 0 and r0 > 0")
        if self.kind == "explicit":
            vals = p["values"]
            if len(vals) == 0:
                raise SequenceError("explicit sequence is empty")
            check_rising(vals)

    # -- construction helpers ------------------------------------------------
    @classmethod
    def make(cls, kind: str, **params) -> "SequenceSpec":
        conv = {}
        for k, v in params.items():
            conv[k] = tuple(_num(x) for x in v) if k == "values" else _num(v)
        return cls(kind, tuple(sorted(conv.items())))

    @classmethod
    def geometric(cls, ratio, r0=1):
        return cls.make("geometric", ratio=ratio, r0=r0)

    @classmethod
    def polynomial(cls, exponent, scale=1):
        return cls.make("polynomial", exponent=exponent, scale=scale)

    @classmethod
    def arithmetic(cls, step=1, r0=1):
        return cls.make("arithmetic", step=step, r0=r0)

    @classmethod
    def explicit(cls, values: Sequence):
        return cls.make("explicit", values=values)

    @classmethod
    def from_json(cls, obj: dict) -> "SequenceSpec":
        if set(obj) - {"kind", "params"}:
            raise SequenceError(f"unexpected sequence fields {sorted(set(obj) - {'kind', 'params'})}")
        return cls.make(obj["kind"], **obj.get("params", {}))

    def to_json(self) -> dict:
        out = {}
        for k, v in self.params:
            out[k] = [scalar_to_json(x) for x in v] if k == "values" else scalar_to_json(v)
        return {"kind": self.kind, "params": out}

    @property
    def p(self) -> dict:
        return dict(self.params)

    # -- terms -------------------------------------------------------------------
    @property
    def is_exact(self) -> bool:
        p = self.p
        if self.kind == "explicit":
            return all(is_exact(v) for v in p["values"])
        if self.kind == "polynomial":
            return is_exact(p["scale"]) and isinstance(p["exponent"], int)
        return all(is_exact(v) for v in p.values())

    def term(self, k: int):
        """r_k for k >= 1 (exact when the parameters are exact)."""
        if k < 1:
            raise SequenceError("sequence index starts at 1")
        p = self.p
        if self.kind == "geometric":
            if self.is_exact:
                return _norm(Fraction(p["r0"]) * Fraction(p["ratio"]) ** k)
            return float(p["r0"]) * float(p["ratio"]) ** k
        if self.kind == "polynomial":
            if self.is_exact:
                return _norm(Fraction(p["scale"]) * k ** p["exponent"])
            return float(p["scale"]) * k ** float(p["exponent"])
        if self.kind == "arithmetic":
            if self.is_exact:
                return _norm(Fraction(p["r0"]) + Fraction(p["step"]) * (k - 1))
            return float(p["r0"]) + float(p["step"]) * (k - 1)
        vals = p["values"]
        if k > len(vals):
            raise SequenceError(f"explicit sequence has only {len(vals)} terms")
        return vals[k - 1]

    def prefix(self, K: int) -> list:
        """[r_1, ..., r_K], validated as strictly increasing and positive."""
        if self.kind == "explicit":
            vals = list(self.p["values"])
            if K > len(vals):
                raise SequenceError(f"explicit sequence has only {len(vals)} terms")
            out = vals[:K]
        elif self.kind == "arithmetic" and self.is_exact:
            r0, st = Fraction(self.p["r0"]), Fraction(self.p["step"])
            if r0.denominator == 1 and st.denominator == 1:
                out = list(range(int(r0), int(r0) + int(st) * K, int(st)))
            else:
                out = [_norm(r0 + st * k) for k in range(K)]
        elif self.kind == "polynomial" and self.is_exact and Fraction(self.p["scale"]).denominator == 1:
            s, e = int(self.p["scale"]), self.p["exponent"]
            out = [s * k**e for k in range(1, K + 1)]
        else:
            out = [self.term(k) for k in range(1, K + 1)]
        check_rising(out)
        return out

    def prefix_array(self, K: int) -> np.ndarray:
        return np.array([float(v) for v in self.prefix(K)], dtype=float)

    def count_le(self, R) -> int:
        """Number of k with r_k <= R."""
        p = self.p
        if self.kind == "explicit":
            vals = p["values"]
            if vals[-1] <= R:
                raise SequenceError("explicit sequence exhausted below the requested radius")
            return int(np.searchsorted(np.array([float(v) for v in vals]), float(R), side="right"))
        # analytic estimate, then exact correction
        R = float(R) if not is_exact(R) else R
        if self.kind == "geometric":
            r0, ratio = float(p["r0"]), float(p["ratio"])
            est = int(math.floor(math.log(max(float(R), 1e-300) / r0) / math.log(ratio))) if R >= r0 else 0
        elif self.kind == "polynomial":
            sc, e = float(p["scale"]), float(p["exponent"])
            est = int(math.floor((float(R) / sc) ** (1.0 / e))) if R > 0 else 0
        else:
            r0, st = float(p["r0"]), float(p["step"])
            est = int(math.floor((float(R) - r0) / st)) + 1 if R >= r0 else 0
        est = max(est, 0)
        while est >= 1 and self.term(est) > R:
            est -= 1
        while self.term(est + 1) <= R:
            est += 1
        return est

    def terms_up_to(self, R) -> list:
        return self.prefix(self.count_le(R)) if self.count_le(R) else []


def _norm(x: Fraction):
    return int(x) if x.denominator == 1 else x


def check_rising(values: Sequence) -> None:
    prev = None
    for i, v in enumerate(values):
        if not v > 0:
            raise SequenceError(f"term {i + 1} is not positive")
        if prev is not None and not v > prev:
            raise SequenceError(f"sequence is not strictly increasing at term {i + 1}")
        prev = v


# -- statistics ----------------------------------------------------------------

@dataclass
class SequenceReport:
    K: int
    min_tail_ratio: object
    max_tail_gap: object
    harmonic_partial: float
    dvoretzky: dict[int, float]
    dvoretzky_monotone: bool

    def to_json(self) -> dict:
        return {
            "prefix_length": self.K,
            "min_tail_ratio": scalar_to_json(self.min_tail_ratio),
            "max_tail_gap": scalar_to_json(self.max_tail_gap),
            "harmonic_partial": self.harmonic_partial,
            "dvoretzky_value": {str(n): v for n, v in self.dvoretzky.items()},
            "dvoretzky_monotone_growth": self.dvoretzky_monotone,
            "label": f"finite-depth statistics at K={self.K}",
        }


def harmonic_partial(rseq: SequenceSpec, K: int) -> float:
    return math.fsum(1.0 / float(v) for v in rseq.prefix(K))


def analyze_sequence(rseq: SequenceSpec, K: int, N_schedule: Sequence[int] = ()) -> SequenceReport:
    """Tail ratio/gap over k >= K/2, harmonic partial sum and sum_{k<=N} 1/(r_k ln N)."""
    if K < 8:
        raise SequenceError("K must be at least 8")
    N_schedule = list(N_schedule)
    if any(b <= a for a, b in zip(N_schedule, N_schedule[1:])):
        raise SequenceError("N_schedule must be increasing")
    if N_schedule and (N_schedule[0] < 2 or N_schedule[-1] > K):
        raise SequenceError("N_schedule entries must lie in [2, K]")
    terms = rseq.prefix(K)
    start = K // 2  # 0-based index of r_{K/2}
    tail = terms[start - 1:] if start >= 1 else terms
    arr = np.array([float(v) for v in tail])
    fratio = arr[1:] / arr[:-1]
    fgap = np.diff(arr)
    if all(is_exact(v) for v in terms):
        # floats locate the extremes; exact arithmetic settles near-ties
        cand = np.flatnonzero(fratio <= fratio.min() * (1 + 1e-9))
        min_ratio = _norm(min(Fraction(tail[i + 1]) / Fraction(tail[i]) for i in cand))
        cand = np.flatnonzero(fgap >= fgap.max() * (1 - 1e-9))
        max_gap = _norm(max(Fraction(tail[i + 1]) - Fraction(tail[i]) for i in cand))
    else:
        min_ratio = float(fratio.min())
        max_gap = float(fgap.max())
    inv = [1.0 / float(v) for v in terms]
    harm = math.fsum(inv)
    dv = {}
    for N in N_schedule:
        dv[N] = math.fsum(inv[:N]) / math.log(N)
    vals = list(dv.values())
    monotone = len(vals) >= 2 and all(b > a for a, b in zip(vals, vals[1:]))
    return SequenceReport(K, min_ratio, max_gap, harm, dv, monotone)
