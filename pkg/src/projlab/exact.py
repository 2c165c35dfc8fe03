"""Exact scalars: rationals and real quadratic irrationals (a + b*sqrt(d)) / c."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Union

Exact = Union[int, Fraction, "QuadraticIrrational"]


def parse_rational(value) -> Fraction:
    """Parse ints, Fractions, floats (exactly) and "p/q" / decimal strings."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


def rational_str(x: Fraction | int) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _squarefree_split(d: int) -> tuple[int, int]:
    """Return (k, s) with d = k*k*s and s squarefree."""
    k, s, p = 1, d, 2
    while p * p <= s:
        while s % (p * p) == 0:
            s //= p * p
            k *= p
        p += 1
    return k, s


class QuadraticIrrational:
    """The real number (a + b*sqrt(d)) / c with integers a, b, c != 0 and d > 1 squarefree.

    Values with b == 0 are rejected by the constructor; arithmetic that cancels the
    irrational part returns a Fraction instead.
    """

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: int, b: int, d: int, c: int = 1):
        if c == 0:
            raise ZeroDivisionError("zero denominator")
        if d <= 1:
            raise ValueError("d must exceed 1")
        k, s = _squarefree_split(d)
        if s == 1:
            raise ValueError(f"d={d} is a perfect square")
        b *= k
        if b == 0:
            raise ValueError("b == 0 gives a rational; use Fraction")
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(math.gcd(a, b), c)
        self.a, self.b, self.c, self.d = a // g, b // g, c // g, s

    @classmethod
    def sqrt(cls, n: int | Fraction) -> "QuadraticIrrational | Fraction":
        """Exact square root of a non-negative rational."""
        n = Fraction(n)
        if n < 0:
            raise ValueError("negative radicand")
        p, q = n.numerator, n.denominator
        # sqrt(p/q) = sqrt(p*q)/q
        r = math.isqrt(p * q)
        if r * r == p * q:
            return Fraction(r, q)
        return cls(0, 1, p * q, q)

    # -- conversions ---------------------------------------------------------
    def __float__(self) -> float:
        # Fraction arithmetic on a tight isqrt bracket keeps the float correctly rounded
        scale = 1 << 80
        root = math.isqrt(self.b * self.b * self.d * scale * scale)
        val = Fraction(self.a * scale + (root if self.b > 0 else -root), self.c * scale)
        return float(val)

    def __repr__(self) -> str:
        return f"QuadraticIrrational(({self.a} + {self.b}*sqrt({self.d}))/{self.c})"

    def __str__(self) -> str:
        return f"({self.a}+{self.b}*sqrt({self.d}))/{self.c}"

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}

    def conjugate(self) -> "QuadraticIrrational":
        return QuadraticIrrational(self.a, -self.b, self.d, self.c)

    # -- exact sign / comparisons ----------------------------------------------
    @staticmethod
    def _sign(u: Fraction, v: Fraction, d: int) -> int:
        """Sign of u + v*sqrt(d)."""
        su = int(u > 0) - int(u < 0)
        sv = int(v > 0) - int(v < 0)
        if sv == 0:
            return su
        if su == 0 or su == sv:
            return sv
        # opposite signs: compare u^2 with v^2 d
        lhs, rhs = u * u, v * v * d
        return su if lhs > rhs else sv

    def _cmp_key(self, other) -> int:
        """Sign of self - other."""
        if isinstance(other, QuadraticIrrational):
            if other.d != self.d:
                diff = float(self) - float(other)
                # distinct radicands never coincide; floats are decisive away from ties
                if abs(diff) > 1e-9 * (1 + abs(float(self))):
                    return 1 if diff > 0 else -1
                raise ArithmeticError("comparison across radicands is too close to decide")
            u = Fraction(self.a, self.c) - Fraction(other.a, other.c)
            v = Fraction(self.b, self.c) - Fraction(other.b, other.c)
            return self._sign(u, v, self.d)
        o = parse_rational(other) if not isinstance(other, Fraction) else other
        return self._sign(Fraction(self.a, self.c) - o, Fraction(self.b, self.c), self.d)

    def __lt__(self, other):
        return self._cmp_key(other) < 0

    def __le__(self, other):
        return self._cmp_key(other) <= 0

    def __gt__(self, other):
        return self._cmp_key(other) > 0

    def __ge__(self, other):
        return self._cmp_key(other) >= 0

    def __eq__(self, other):
        if isinstance(other, QuadraticIrrational):
            return (self.a, self.b, self.c, self.d) == (other.a, other.b, other.c, other.d)
        return False

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.d))

    # -- arithmetic with rationals and same-radicand values --------------------
    def _parts(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.a, self.c), Fraction(self.b, self.c)

    @classmethod
    def _from_parts(cls, u: Fraction, v: Fraction, d: int):
        if v == 0:
            return u
        den = u.denominator * v.denominator // math.gcd(u.denominator, v.denominator)
        return cls(int(u * den), int(v * den), d, den)

    def _coerce(self, other) -> tuple[Fraction, Fraction]:
        if isinstance(other, QuadraticIrrational):
            if other.d != self.d:
                raise ValueError("mixed radicands are not supported")
            return other._parts()
        return parse_rational(other), Fraction(0)

    def __add__(self, other):
        u, v = self._parts()
        ou, ov = self._coerce(other)
        return self._from_parts(u + ou, v + ov, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticIrrational(-self.a, -self.b, self.d, self.c)

    def __sub__(self, other):
        return self + (-other if isinstance(other, QuadraticIrrational) else -parse_rational(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        u, v = self._parts()
        ou, ov = self._coerce(other)
        return self._from_parts(u * ou + v * ov * self.d, u * ov + v * ou, self.d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        ou, ov = self._coerce(other)
        if ov == 0:
            if ou == 0:
                raise ZeroDivisionError
            u, v = self._parts()
            return self._from_parts(u / ou, v / ou, self.d)
        # multiply by conjugate
        norm = ou * ou - ov * ov * self.d
        u, v = self._parts()
        return self._from_parts((u * ou - v * ov * self.d) / norm, (v * ou - u * ov) / norm, self.d)

    def __rtruediv__(self, other):
        o = parse_rational(other)
        u, v = self._parts()
        norm = u * u - v * v * self.d
        return self._from_parts(o * u / norm, -o * v / norm, self.d)

    def __floor__(self) -> int:
        guess = math.floor(float(self))
        # correct a possible off-by-one from rounding
        while self < guess:
            guess -= 1
        while self >= guess + 1:
            guess += 1
        return guess


# Named constants used throughout the lab.
PHI = QuadraticIrrational(1, 1, 5, 2)
PHI_SQUARED = PHI * PHI
SQRT2 = QuadraticIrrational(0, 1, 2)


def exact_floor(x: Exact) -> int:
    if isinstance(x, QuadraticIrrational):
        return math.floor(x)
    return math.floor(Fraction(x))


def to_float(x) -> float:
    return float(x)


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, QuadraticIrrational)) and not isinstance(x, bool)


def parse_scalar(value):
    """Parse a JSON-level scalar: number, "p/q", or a named constant.

    Named constants: "phi", "phi_squared", "sqrt2", "e", "pi", and "sqrt(n)".
    Floats stay floats; everything else is exact.
    """
    if isinstance(value, QuadraticIrrational):
        return value
    if isinstance(value, dict) and set(value) == {"a", "b", "c", "d"}:
        return QuadraticIrrational(value["a"], value["b"], value["d"], value["c"])
    if isinstance(value, str):
        s = value.strip().lower()
        if s == "phi":
            return PHI
        if s == "phi_squared":
            return PHI_SQUARED
        if s == "sqrt2":
            return SQRT2
        if s == "e":
            return math.e
        if s == "pi":
            return math.pi
        if s.startswith("sqrt(") and s.endswith(")"):
            return QuadraticIrrational.sqrt(parse_rational(s[5:-1]))
        return parse_rational(s)
    if isinstance(value, float):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return value
    raise TypeError(f"cannot parse scalar {value!r}")


def scalar_to_json(x):
    if isinstance(x, QuadraticIrrational):
        return x.to_json()
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else rational_str(x)
    return x
