"""Continued fractions, distance to the nearest integer, and the value sets alpha*m^2 - n^2.

Exact inputs (ints, Fractions, QuadraticIrrational) are expanded exactly.  Float
inputs are expanded as an interval [x - err, x + err]; the expansion stops at the
first partial quotient on which the two endpoints disagree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .exact import QuadraticIrrational, is_exact, parse_rational
from .geometry import Window


class DiophantineError(ValueError):
    pass


def frac_dist(x):
    """Distance from x to the nearest integer, in [0, 1/2].  Exact for exact input."""
    if isinstance(x, QuadraticIrrational):
        f = math.floor(x)
        lower = x - f
        return lower if lower <= Fraction(1, 2) else (f + 1) - x
    if is_exact(x):
        x = Fraction(x)
        f = x - math.floor(x)
        return min(f, 1 - f)
    if not math.isfinite(x):
        raise DiophantineError("frac_dist needs a finite value")
    return abs(x - round(x))


# -- continued fractions ------------------------------------------------------------

@dataclass(frozen=True)
class ContinuedFraction:
    """[a0; a1, a2, ...].

    ``kind`` is "terminating", "periodic" or "float-truncated".  For periodic
    expansions ``quotients`` holds the pre-period followed by one period, and
    ``period`` is the period length.  For float expansions ``quotients`` holds only
    the quotients certified by the input error bound.
    """

    a0: int
    quotients: tuple[int, ...]
    kind: str
    period: int = 0
    error_bound: float = 0.0

    @property
    def preperiod(self) -> int:
        return len(self.quotients) - self.period

    def quotient(self, i: int) -> int:
        """a_i for i >= 1."""
        if i == 0:
            return self.a0
        if i <= len(self.quotients):
            return self.quotients[i - 1]
        if self.kind == "periodic":
            j = (i - 1 - self.preperiod) % self.period
            return self.quotients[self.preperiod + j]
        raise DiophantineError(f"quotient a_{i} is not available ({self.kind}, depth {len(self.quotients)})")

    @property
    def depth(self) -> Optional[int]:
        """Number of available quotients after a0 (None = unlimited)."""
        return None if self.kind == "periodic" else len(self.quotients)

    def head(self, n: int) -> list[int]:
        return [self.quotient(i) for i in range(n)]


def _euclid(x: Fraction) -> ContinuedFraction:
    p, q = x.numerator, x.denominator
    a0, r = divmod(p, q)
    out = []
    p, q = q, r
    while q:
        a, r = divmod(p, q)
        out.append(a)
        p, q = q, r
    # Euclid already ends on a quotient >= 2 except for length-one tails
    if len(out) >= 1 and out[-1] == 1:
        if len(out) >= 2:
            out[-2] += 1
            out.pop()
        else:
            a0 += 1
            out.pop()
    return ContinuedFraction(a0, tuple(out), "terminating")


def _quadratic_cf(x: QuadraticIrrational, depth: int) -> ContinuedFraction:
    # Bring x to (P + sqrt(D)) / Q with Q | D - P^2.
    a, b, c, d = x.a, x.b, x.c, x.d
    if b < 0:
        a, b, c = -a, -b, -c
    D = b * b * d
    P, Q = a, c
    if (D - P * P) % Q:
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
    r = math.isqrt(D)

    def floor_state(P, Q):
        # floor((P + sqrt(D)) / Q) with D not a square
        if Q > 0:
            return (P + r) // Q
        return (P + r + 1) // Q

    seen = {}
    quots = []
    i = 0
    while True:
        if (P, Q) in seen and i > 0:
            start = seen[(P, Q)]
            a0 = quots[0]
            rest = quots[1:]
            if start == 0:
                # purely periodic from a0: list a_1..a_period
                rest = rest + [quots[0]]
            return ContinuedFraction(a0, tuple(rest), "periodic", period=i - start)
        seen[(P, Q)] = i
        ai = floor_state(P, Q)
        quots.append(ai)
        P = ai * Q - P
        Q = (D - P * P) // Q
        i += 1


def _float_cf(x: float, depth: int, err: float) -> ContinuedFraction:
    lo, hi = Fraction(x) - Fraction(err), Fraction(x) + Fraction(err)
    quots = []
    for _ in range(depth + 1):
        fa, fb = math.floor(lo), math.floor(hi)
        if fa != fb:
            break
        quots.append(fa)
        lo, hi = lo - fa, hi - fa
        if lo <= 0 or hi <= 0:
            break
        lo, hi = 1 / hi, 1 / lo
    if not quots:
        raise DiophantineError("input uncertainty too large to fix the integer part")
    return ContinuedFraction(quots[0], tuple(quots[1:]), "float-truncated", error_bound=err)


def cf_expand(x, depth: int = 64, input_error: Optional[float] = None) -> ContinuedFraction:
    """Continued fraction of x.

    Rationals give the full terminating expansion (last quotient > 1), quadratic
    irrationals their exact eventually periodic expansion.  Floats are expanded to
    at most ``depth`` quotients, fewer if the uncertainty ``input_error`` (default:
    a few ulps of x) makes a quotient ambiguous.
    """
    if depth < 1:
        raise DiophantineError("depth must be >= 1")
    if isinstance(x, QuadraticIrrational):
        return _quadratic_cf(x, depth)
    if is_exact(x):
        return _euclid(Fraction(x))
    x = float(x)
    if not math.isfinite(x):
        raise DiophantineError("cannot expand a non-finite value")
    if input_error is None:
        input_error = 4 * math.ulp(x) if x != 0 else 0.0
    if input_error == 0:
        return _euclid(Fraction(x))
    return _float_cf(x, depth, input_error)


def convergents(cf: ContinuedFraction, k: int) -> list[Fraction]:
    """The first k convergents p_0/q_0, ..., p_{k-1}/q_{k-1}."""
    if k < 1:
        raise DiophantineError("k must be >= 1")
    avail = cf.depth
    if avail is not None and k > avail + 1:
        if cf.kind == "float-truncated":
            raise DiophantineError(f"only {avail + 1} convergents are reliable at this input precision")
        raise DiophantineError(f"terminating expansion has only {avail + 1} convergents")
    return [Fraction(p, q) for p, q in _pq(cf, k)]


def _pq(cf: ContinuedFraction, k: int) -> list[tuple[int, int]]:
    p_prev, q_prev = 1, 0
    p, q = cf.a0, 1
    out = [(p, q)]
    for i in range(1, k):
        a = cf.quotient(i)
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append((p, q))
    return out


# -- badly approximable margins ------------------------------------------------------

@dataclass(frozen=True)
class BAMargin:
    value_x: object
    depth_M: int
    margin: float
    argmin: int

    def to_json(self) -> dict:
        return {"value_x": float(self.value_x), "depth_M": self.depth_M,
                "margin": self.margin, "argmin": self.argmin,
                "label": f"min over 1<=m<={self.depth_M} of m*<m*x>"}


def ba_margin(x, M: int) -> BAMargin:
    """Exhaustive min over 1 <= m <= M of m * dist(m*x, Z), with the minimising m."""
    if M < 1:
        raise DiophantineError("M must be >= 1")
    if isinstance(x, QuadraticIrrational):
        # exact fractional distances; floats only for the final comparison scale
        best, arg = None, 1
        for m in range(1, M + 1):
            v = m * frac_dist(x * m)
            if best is None or v < best:
                best, arg = v, m
        return BAMargin(x, M, float(best), arg)
    if is_exact(x):
        x = Fraction(x)
        best, arg = None, 1
        for m in range(1, M + 1):
            v = m * frac_dist(x * m)
            if best is None or v < best:
                best, arg = v, m
                if v == 0:
                    break
        return BAMargin(x, M, float(best), arg)
    m = np.arange(1, M + 1, dtype=float)
    mx = m * float(x)
    vals = m * np.abs(mx - np.round(mx))
    i = int(np.argmin(vals))
    return BAMargin(x, M, float(vals[i]), i + 1)


class ApproxPair(NamedTuple):
    m: int
    n: int


def iter_good_pairs(beta, max_depth: int = 200):
    """Solutions (m, n) of |m*beta - n| < 1/m taken from convergents, m strictly increasing.

    When two consecutive convergents share a denominator the closer one is kept.
    Every pair is re-checked directly (exactly for exact beta).
    """
    if is_exact(beta) and not isinstance(beta, QuadraticIrrational):
        raise DiophantineError("beta is rational: only finitely many solutions")
    cf = cf_expand(beta, depth=max_depth)
    k = max_depth if cf.depth is None else cf.depth + 1
    pq = _pq(cf, k)
    for idx, (p, q) in enumerate(pq):
        if idx + 1 < len(pq) and pq[idx + 1][1] == q:
            continue
        if _is_good(beta, q, p):
            yield ApproxPair(q, p)


def good_approx_pairs(beta, count: int, max_depth: int = 200) -> list[ApproxPair]:
    """The first ``count`` pairs of :func:`iter_good_pairs`."""
    if count < 1:
        raise DiophantineError("count must be >= 1")
    out = []
    for pair in iter_good_pairs(beta, max_depth):
        out.append(pair)
        if len(out) == count:
            return out
    raise DiophantineError(f"only {len(out)} certified pairs within depth {max_depth}")


def _is_good(beta, m: int, n: int) -> bool:
    if isinstance(beta, QuadraticIrrational):
        e = beta * m - n
        # |e| < 1/m  <=>  e*e*m*m < 1
        return (e * e) * (m * m) < 1
    return abs(m * float(beta) - n) < 1.0 / m


# -- L(alpha) = {alpha m^2 - n^2} ------------------------------------------------------

class LPoint(NamedTuple):
    value: object
    m: int
    n: int


def L_alpha_points(alpha, m_max: int, window: Window) -> list[LPoint]:
    """Values alpha*m^2 - n^2 (1 <= m <= m_max, n >= 1) inside the open window.

    For each m only n with n^2 in (alpha*m^2 - hi, alpha*m^2 - lo) are visited.
    Exact alphas are tested exactly; values are sorted ascending.
    """
    if m_max < 1:
        raise DiophantineError("m_max must be >= 1")
    af = float(alpha)
    lo, hi = float(window.lo), float(window.hi)
    m = np.arange(1, m_max + 1, dtype=np.int64)
    am2 = af * m.astype(float) ** 2
    n_lo = np.floor(np.sqrt(np.maximum(am2 - hi, 0.0))) - 1
    n_hi = np.floor(np.sqrt(np.maximum(am2 - lo, 0.0))) + 1
    n_lo = np.maximum(n_lo, 1).astype(np.int64)
    n_hi = n_hi.astype(np.int64)
    cnt = np.maximum(n_hi - n_lo + 1, 0)
    mm = np.repeat(m, cnt)
    nn = np.repeat(n_lo, cnt) + (np.arange(int(cnt.sum())) - np.repeat(np.cumsum(cnt) - cnt, cnt))
    vals = af * mm.astype(float) ** 2 - nn.astype(float) ** 2
    slack = 1e-6 * (1.0 + np.abs(af) * mm.astype(float) ** 2)
    cand = (vals > lo - slack) & (vals < hi + slack)
    out = []
    exact = is_exact(alpha)
    for mi, ni, v in zip(mm[cand].tolist(), nn[cand].tolist(), vals[cand].tolist()):
        if exact:
            ev = alpha * (mi * mi) - ni * ni
            if window.contains(ev):
                out.append(LPoint(ev, mi, ni))
        elif lo < v < hi:
            out.append(LPoint(v, mi, ni))
    out.sort(key=lambda t: float(t.value))
    return out


def accumulation_values(beta, m_limit: int) -> list[LPoint]:
    """Values alpha*m^2 - n^2 (alpha = beta^2) at the good pairs of beta with m <= m_limit.

    Each satisfies |alpha m^2 - n^2| < 2*beta + 1.
    """
    pairs = []
    for pair in iter_good_pairs(beta):
        if pair.m > m_limit:
            break
        pairs.append(pair)
    alpha = beta * beta
    return [LPoint(alpha * (p.m * p.m) - p.n * p.n, p.m, p.n) for p in pairs]


def factorization_check(alpha: float, m: int, n: int) -> float:
    """| |alpha m^2 - n^2| - |m sqrt(alpha) - n| * |m sqrt(alpha) + n| |."""
    if not alpha > 0:
        raise DiophantineError("alpha must be positive")
    alpha = float(alpha)
    b = math.sqrt(alpha)
    lhs = abs(alpha * m * m - n * n)
    rhs = abs(m * b - n) * abs(m * b + n)
    return abs(lhs - rhs)


def factorization_residuals(alpha: float, m_max: int) -> float:
    """Largest residual / (1 + alpha m^2 + n^2) over 1 <= m, n <= m_max."""
    if not alpha > 0:
        raise DiophantineError("alpha must be positive")
    alpha = float(alpha)
    b = math.sqrt(alpha)
    k = np.arange(1, m_max + 1, dtype=float)
    m, n = k[:, None], k[None, :]
    lhs = np.abs(alpha * m * m - n * n)
    rhs = np.abs(m * b - n) * np.abs(m * b + n)
    return float(np.max(np.abs(lhs - rhs) / (1.0 + alpha * m * m + n * n)))
