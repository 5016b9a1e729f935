"""Exact Gaussian-rational scalars.

A :class:`GaussianRational` is a complex number whose real and imaginary
parts are :class:`fractions.Fraction` values.  Floating scalars are plain
Python ``complex``; the two never mix implicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational


class MixedScalarError(TypeError):
    """Raised when exact and floating values meet without a conversion."""


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise MixedScalarError(f"cannot use {type(x).__name__} as an exact component")


@dataclass(frozen=True, slots=True)
class GaussianRational:
    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", _as_fraction(self.re))
        object.__setattr__(self, "im", _as_fraction(self.im))

    @classmethod
    def coerce(cls, x) -> GaussianRational:
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (float, complex)):
            raise MixedScalarError("floating value used where an exact scalar is required")
        return cls(_as_fraction(x))

    @classmethod
    def from_parts(cls, re_num: int, re_den: int, im_num: int, im_den: int) -> GaussianRational:
        return cls(Fraction(re_num, re_den), Fraction(im_num, im_den))

    def parts(self) -> tuple[int, int, int, int]:
        """Return ``(re_num, re_den, im_num, im_den)`` in lowest terms."""
        return (self.re.numerator, self.re.denominator, self.im.numerator, self.im.denominator)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def conjugate(self) -> GaussianRational:
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        """Squared modulus ``re**2 + im**2``."""
        return self.re * self.re + self.im * self.im

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __add__(self, other):
        o = self.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self.coerce(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return self.coerce(other) - self

    def __mul__(self, other):
        o = self.coerce(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def inverse(self) -> GaussianRational:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * self.coerce(other).inverse()

    def __rtruediv__(self, other):
        return self.coerce(other) * self.inverse()

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        if self.im == 0:
            return f"GaussianRational({self.re})"
        return f"GaussianRational({self.re}, {self.im})"


ZERO = GaussianRational(0)
ONE = GaussianRational(1)


def nearest_fraction(x: float, denominator_limit: int) -> Fraction:
    """Closest fraction with denominator at most ``denominator_limit``.

    ``Fraction.limit_denominator`` walks the continued-fraction expansion
    and compares the two best candidates, which is exactly what we need.
    """
    if denominator_limit < 1:
        raise ValueError("denominator_limit must be >= 1")
    return Fraction(x).limit_denominator(denominator_limit)
