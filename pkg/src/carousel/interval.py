"""Self-contained outward-rounded interval arithmetic.

Endpoint representation with double endpoints.  Directed rounding modes
are not portable from pure Python, so every operation rounds to nearest
and then inflates the endpoints outward by one ulp (`math.nextafter`),
which is a valid enclosure.  Transcendental functions (sin) additionally
assume the platform libm is faithfully rounded (error < 1 ulp) and
inflate by two ulps; square roots are correctly rounded by IEEE 754 and
get the standard one-ulp inflation.

This is the engine behind the rigorous gravitational certificates; it
deliberately stays small (no interval Newton, no affine arithmetic, no
arbitrary precision).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "Interval",
    "iadd",
    "isub",
    "imul",
    "idiv",
    "ineg",
    "iscale",
    "isqrt",
    "isin",
    "ipow",
    "excludes_zero",
    "PI",
    "TWO_PI",
    "HALF_PI",
]

_INF = math.inf


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with lo <= hi, both finite."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("interval endpoints must be finite")
        if self.lo > self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(float(x), float(x))

    @classmethod
    def around(cls, x: float) -> "Interval":
        """One-ulp ball around a nearest-rounded value."""
        x = float(x)
        return cls(_down(x), _up(x))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def __contains__(self, x) -> bool:
        return self.contains(float(x))

    def mag(self) -> float:
        """Largest absolute value over the interval."""
        return max(abs(self.lo), abs(self.hi))

    def __add__(self, other):
        return iadd(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return isub(self, _coerce(other))

    def __rsub__(self, other):
        return isub(_coerce(other), self)

    def __mul__(self, other):
        return imul(self, _coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return idiv(self, _coerce(other))

    def __rtruediv__(self, other):
        return idiv(_coerce(other), self)

    def __neg__(self):
        return ineg(self)

    def __repr__(self):
        return f"[{self.lo!r}, {self.hi!r}]"


def _coerce(x) -> Interval:
    if isinstance(x, Interval):
        return x
    return Interval.point(float(x))


def iadd(a: Interval, b: Interval) -> Interval:
    return Interval(_down(a.lo + b.lo), _up(a.hi + b.hi))


def isub(a: Interval, b: Interval) -> Interval:
    return Interval(_down(a.lo - b.hi), _up(a.hi - b.lo))


def ineg(a: Interval) -> Interval:
    return Interval(-a.hi, -a.lo)


def imul(a: Interval, b: Interval) -> Interval:
    p = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
    return Interval(_down(min(p)), _up(max(p)))


def idiv(a: Interval, b: Interval) -> Interval:
    if b.lo <= 0.0 <= b.hi:
        raise ZeroDivisionError(f"division by interval containing zero: {b}")
    p = (a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi)
    return Interval(_down(min(p)), _up(max(p)))


def iscale(a: Interval, c: float) -> Interval:
    """Multiply by an exact scalar (e.g. a power of two or a small integer)."""
    if c >= 0:
        return Interval(_down(c * a.lo), _up(c * a.hi))
    return Interval(_down(c * a.hi), _up(c * a.lo))


def isqrt(a: Interval) -> Interval:
    if a.lo < 0.0:
        raise ValueError(f"isqrt of interval with negative part: {a}")
    lo = _down(math.sqrt(a.lo))
    return Interval(max(lo, 0.0), _up(math.sqrt(a.hi)))


def ipow(a: Interval, e: int) -> Interval:
    """Integer power by repeated interval multiplication (exact semantics
    for even powers of sign-straddling intervals)."""
    if e < 0:
        return idiv(Interval.point(1.0), ipow(a, -e))
    if e == 0:
        return Interval.point(1.0)
    if e % 2 == 0 and a.lo < 0.0 <= a.hi:
        m = a.mag()
        out = Interval(0.0, m)
        for _ in range(e - 1):
            out = imul(out, Interval(0.0, m))
        return Interval(0.0, out.hi)
    out = a
    for _ in range(e - 1):
        out = imul(out, a)
    return out


# Two-float enclosure of pi (math.pi is the nearest double, below the
# true value).
PI = Interval(math.pi, _up(math.pi))
TWO_PI = iscale(PI, 2.0)
HALF_PI = iscale(PI, 0.5)

# libm sin is assumed faithful to < 1 ulp; add one more ulp of slack.
def _sin_pt_lo(x: float) -> float:
    return _down(_down(math.sin(x)))


def _sin_pt_hi(x: float) -> float:
    return _up(_up(math.sin(x)))


def isin(a: Interval) -> Interval:
    """Enclosure of sin over the interval by monotone-branch decomposition.

    Critical points at pi/2 + k*pi are located with the pi enclosure; a
    branch that may contain one contributes the exact extremum +/-1.
    """
    if a.width >= TWO_PI.hi:
        return Interval(-1.0, 1.0)
    # Indices k with pi/2 + k*pi possibly inside [lo, hi].
    k_lo = math.floor((a.lo - HALF_PI.hi) / PI.lo)
    k_hi = math.ceil((a.hi - HALF_PI.lo) / PI.lo)
    lo, hi = 1.0, -1.0
    for k in range(k_lo, k_hi + 1):
        # Enclosure of the critical point pi/2 + k*pi.
        c = iadd(HALF_PI, iscale(PI, float(k)))
        if c.hi < a.lo or c.lo > a.hi:
            continue
        if k % 2 == 0:
            hi = 1.0
        else:
            lo = -1.0
    lo = min(lo, _sin_pt_lo(a.lo), _sin_pt_lo(a.hi))
    hi = max(hi, _sin_pt_hi(a.lo), _sin_pt_hi(a.hi))
    return Interval(max(lo, -1.0), min(hi, 1.0))


def excludes_zero(a: Interval) -> bool:
    """True iff the enclosure proves the enclosed value is nonzero."""
    return a.lo > 0.0 or a.hi < 0.0
