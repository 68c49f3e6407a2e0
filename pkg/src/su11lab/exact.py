"""Exact scalar helpers: Gaussian rationals, Pochhammer symbols, conjugation.

Everything here is coefficient-type agnostic: the same helpers accept ``int``,
:class:`fractions.Fraction`, :class:`GaussianRational`, ``float`` and
``complex``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Union

__all__ = [
    "GaussianRational",
    "Scalar",
    "conj",
    "to_complex",
    "is_zero",
    "rising",
    "falling",
    "as_exact",
    "stirling2",
]


class GaussianRational:
    """Element of Q(i), stored as a pair of :class:`Fraction`."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _coerce(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction, Rational)):
            return GaussianRational(other, 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) + other
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) - other
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return other - complex(self)
        return GaussianRational(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) * other
        if o.im == 0:
            return GaussianRational(self.re * o.re, self.im * o.re)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return complex(self) / other
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * o.conjugate()
        return GaussianRational(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return other / complex(self)
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return complex(self) ** n
        if n < 0:
            return GaussianRational(1) / (self ** (-n))
        result = GaussianRational(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            try:
                return complex(self) == complex(other)
            except TypeError:
                return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        return abs(complex(self))

    @property
    def real(self) -> Fraction:
        return self.re

    @property
    def imag(self) -> Fraction:
        return self.im

    def __repr__(self):
        if self.im == 0:
            return f"GaussianRational({self.re})"
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"({self.re} {sign} {abs(self.im)}i)"


Scalar = Union[int, Fraction, GaussianRational, float, complex]


def conj(x):
    """Complex conjugate that keeps exact types exact."""
    if isinstance(x, GaussianRational):
        return x.conjugate()
    if isinstance(x, (int, Fraction)):
        return x
    return x.conjugate()


def to_complex(x) -> complex:
    return complex(x)


def is_zero(x) -> bool:
    return not x


def as_exact(x):
    """Convert ``int``/``Fraction``/``GaussianRational``/``str`` to an exact scalar.

    Floats are converted through ``Fraction(str(x))`` so ``0.1`` becomes ``1/10``.
    """
    if isinstance(x, (GaussianRational, Fraction)):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    if isinstance(x, complex):
        return GaussianRational(Fraction(str(x.real)), Fraction(str(x.imag)))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact scalar")


def rising(a, n: int):
    """Pochhammer symbol (a)_n = a (a+1) ... (a+n-1); exact for exact ``a``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = 1 if not isinstance(a, float) else 1.0
    for k in range(n):
        out = out * (a + k)
    return out


def falling(x, n: int):
    out = 1
    for k in range(n):
        out = out * (x - k)
    return out


_STIRLING2_CACHE: dict = {(0, 0): 1}


def stirling2(n: int, k: int) -> int:
    """Stirling numbers of the second kind, S(n, k)."""
    if (n, k) in _STIRLING2_CACHE:
        return _STIRLING2_CACHE[(n, k)]
    if n == 0 or k == 0 or k > n:
        return 0
    val = k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)
    _STIRLING2_CACHE[(n, k)] = val
    return val


def exact_sum(values: Iterable):
    total = 0
    for v in values:
        total = total + v
    return total


def log_rising(a: float, n: int) -> float:
    """log (a)_n for float a > 0."""
    return math.lgamma(a + n) - math.lgamma(a)
