"""
Parameter functions of the rule families.

* ``SpeedSchedule`` -- earning speed ``alpha(i)`` of a voter who has paid for
  ``i - 1`` candidates.
* ``CostFunction`` -- price ``beta(x)`` of a candidate approved by a fraction
  ``x`` of the voters.
* ``ThieleWeights`` -- marginal weights ``lambda(j)`` of a Thiele score.

Closed forms evaluate to :class:`fractions.Fraction` whenever the value is
rational. ``CostFunction.exact`` raises :class:`IrrationalValue` otherwise,
and every function offers a float evaluation for the approximate engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable


class IrrationalValue(ArithmeticError):
    """An exact evaluation was requested for an irrational value."""


def as_fraction(x) -> Fraction:
    """Convert ints, Fractions and decimal strings exactly; floats via ``str``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(str(x).strip())


def _iroot(a: int, s: int) -> int | None:
    """Exact integer ``s``-th root of ``a >= 0``, or None."""
    if a < 2:
        return a
    x = 1 << ((a.bit_length() + s - 1) // s)
    while True:
        y = ((s - 1) * x + a // x ** (s - 1)) // s
        if y >= x:
            break
        x = y
    return x if x**s == a else None


def rational_power(base: Fraction, exponent: Fraction) -> Fraction:
    """``base ** exponent`` for ``base > 0``, exactly, or raise IrrationalValue."""
    base, exponent = Fraction(base), Fraction(exponent)
    if exponent.denominator == 1:
        return base ** exponent.numerator
    s = exponent.denominator
    num, den = _iroot(base.numerator, s), _iroot(base.denominator, s)
    if num is None or den is None:
        raise IrrationalValue(f"{base}^{exponent} is irrational")
    return Fraction(num, den) ** exponent.numerator


@dataclass(frozen=True)
class SpeedSchedule:
    """
    Earning speed ``alpha(i)``, ``i = 1, 2, ...``.

    ``kind`` is one of ``const``, ``geom`` (``q**(i-1)``), ``geomshift``
    (``q**i``), ``power`` (``i**p``) or ``table`` (explicit values; the last
    value repeats).
    """

    kind: str = "const"
    q: Fraction | None = None
    p: int | None = None
    table: tuple[Fraction, ...] = ()

    @classmethod
    def constant(cls):
        return cls("const")

    @classmethod
    def geometric(cls, q):
        return cls("geom", q=as_fraction(q))

    @classmethod
    def geometric_shifted(cls, q):
        return cls("geomshift", q=as_fraction(q))

    @classmethod
    def power(cls, p: int):
        return cls("power", p=int(p))

    @classmethod
    def from_table(cls, values):
        return cls("table", table=tuple(as_fraction(v) for v in values))

    def __post_init__(self):
        if self.kind not in ("const", "geom", "geomshift", "power", "table"):
            raise ValueError(f"unknown speed schedule {self.kind!r}")
        if self.kind in ("geom", "geomshift") and not (self.q is not None and self.q > 0):
            raise ValueError("geometric speed needs q > 0")
        if self.kind == "table" and (not self.table or min(self.table) <= 0):
            raise ValueError("speed table must be nonempty and positive")

    def __call__(self, i: int) -> Fraction:
        if i < 1:
            raise ValueError("speed index starts at 1")
        if self.kind == "const":
            return Fraction(1)
        if self.kind == "geom":
            return self.q ** (i - 1)
        if self.kind == "geomshift":
            return self.q**i
        if self.kind == "power":
            return Fraction(i) ** self.p
        return self.table[min(i, len(self.table)) - 1]

    def approx(self, i: int) -> float:
        if self.kind == "const":
            return 1.0
        if self.kind == "geom":
            return float(self.q) ** (i - 1)
        if self.kind == "geomshift":
            return float(self.q) ** i
        if self.kind == "power":
            return float(i) ** self.p
        return float(self.table[min(i, len(self.table)) - 1])

    def is_non_increasing(self, upto: int) -> bool:
        values = [self(i) for i in range(1, upto + 2)]
        return all(a >= b for a, b in zip(values, values[1:]))

    def describe(self) -> str:
        if self.kind == "const":
            return "const"
        if self.kind in ("geom", "geomshift"):
            return f"{self.kind}:{self.q}"
        if self.kind == "power":
            return f"power:{self.p}"
        return "table:" + ",".join(str(v) for v in self.table)


@dataclass(frozen=True)
class CostFunction:
    """
    Candidate price ``beta(x)`` as a function of the approving share ``x``.

    ``kind`` is ``const``, ``exp`` (``b**(c*x)``) or ``table`` (a mapping from
    exact shares to prices, or any callable returning a price).
    """

    kind: str = "const"
    b: Fraction | None = None
    c: Fraction | None = None
    table: Callable | None = None

    @classmethod
    def constant(cls):
        return cls("const")

    @classmethod
    def exponential(cls, b, c):
        return cls("exp", b=as_fraction(b), c=as_fraction(c))

    @classmethod
    def from_table(cls, table):
        return cls("table", table=table)

    def __post_init__(self):
        if self.kind not in ("const", "exp", "table"):
            raise ValueError(f"unknown cost function {self.kind!r}")
        if self.kind == "exp" and not (0 < self.b <= 1 and self.c > 0):
            raise ValueError("exponential cost needs 0 < b <= 1 and c > 0")

    def _lookup(self, x: Fraction):
        if callable(self.table):
            return self.table(x)
        return self.table[x]

    def exact(self, x) -> Fraction:
        x = as_fraction(x)
        if self.kind == "const":
            return Fraction(1)
        if self.kind == "exp":
            return rational_power(self.b, self.c * x)
        value = self._lookup(x)
        if isinstance(value, float):
            raise IrrationalValue(f"table cost at {x} is a float")
        return as_fraction(value)

    def approx(self, x) -> float:
        if self.kind == "const":
            return 1.0
        if self.kind == "exp":
            return float(self.b) ** (float(self.c) * float(x))
        return float(self._lookup(as_fraction(x)))

    def mp(self, x, ctx):
        """High-precision value in an mpmath context."""
        if self.kind == "exp":
            x = as_fraction(x)
            return ctx.power(
                ctx.mpf(self.b.numerator) / self.b.denominator,
                ctx.mpf((self.c * x).numerator) / (self.c * x).denominator,
            )
        try:
            v = self.exact(x)
            return ctx.mpf(v.numerator) / v.denominator
        except IrrationalValue:
            return ctx.mpf(self.approx(x))

    def describe(self) -> str:
        if self.kind == "const":
            return "const"
        if self.kind == "exp":
            return f"exp:{self.b}:{self.c}"
        return "table"


@dataclass(frozen=True)
class ThieleWeights:
    """
    Thiele marginal weights ``lambda(j)``, ``j >= 1``.

    ``kind`` is ``av`` (constant 1), ``pav`` (``1/j``), ``geom``
    (``q**j``) or ``table`` (explicit values, then 0).
    """

    kind: str = "pav"
    q: Fraction | None = None
    table: tuple[Fraction, ...] = ()

    @classmethod
    def av(cls):
        return cls("av")

    @classmethod
    def pav(cls):
        return cls("pav")

    @classmethod
    def geometric(cls, q):
        return cls("geom", q=as_fraction(q))

    @classmethod
    def from_table(cls, values):
        return cls("table", table=tuple(as_fraction(v) for v in values))

    def __post_init__(self):
        if self.kind not in ("av", "pav", "geom", "table"):
            raise ValueError(f"unknown Thiele weights {self.kind!r}")
        if self.kind == "geom" and not (self.q is not None and 0 < self.q <= 1):
            raise ValueError("geometric weights need 0 < q <= 1")

    def __call__(self, j: int) -> Fraction:
        if j < 0:
            raise ValueError("weight index must be non-negative")
        if self.kind == "av":
            return Fraction(1)
        if self.kind == "pav":
            if j == 0:
                raise ZeroDivisionError("PAV weight at 0 is undefined")
            return Fraction(1, j)
        if self.kind == "geom":
            return self.q**j
        if j == 0:
            raise ValueError("table weights start at index 1")
        return self.table[j - 1] if j <= len(self.table) else Fraction(0)

    def prefix(self, upto: int) -> list[Fraction]:
        """``[0, l(1), l(1)+l(2), ...]`` up to index ``upto``."""
        out = [Fraction(0)]
        for j in range(1, upto + 1):
            out.append(out[-1] + self(j))
        return out

    def validate(self, upto: int) -> None:
        """Check ``lambda(1) > 0``, non-increasing and convex on ``[1, upto]``."""
        w = [self(j) for j in range(1, upto + 3)]
        if w[0] <= 0:
            raise ValueError("lambda(1) must be positive")
        for j in range(len(w) - 2):
            d1, d2 = w[j] - w[j + 1], w[j + 1] - w[j + 2]
            if d2 < 0 or d1 < d2:
                raise ValueError(f"weights not non-increasing convex at j={j + 1}")

    def describe(self) -> str:
        if self.kind == "geom":
            return f"geom:{self.q}"
        if self.kind == "table":
            return "table:" + ",".join(str(v) for v in self.table)
        return self.kind

