"""Sparse multivariate polynomials with exact coefficients.

A polynomial in S variables is a dict {exponent tuple: coefficient}; zero
coefficients are never stored.  Coefficients may be ``int``, ``Fraction`` or
:class:`~su11lab.exact.GaussianRational`; floats also work but lose exactness.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np

from .exact import conj

__all__ = ["Polynomial", "Exponent"]

Exponent = Tuple[int, ...]


class Polynomial:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Exponent, object] | None = None):
        self.nvars = nvars
        clean: Dict[Exponent, object] = {}
        if terms:
            for e, c in terms.items():
                if len(e) != nvars:
                    raise ValueError(f"exponent {e} does not have {nvars} entries")
                if c:
                    clean[tuple(e)] = c
        self.terms = clean

    # constructors
    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars)

    @classmethod
    def const(cls, nvars: int, c=1) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, i: int) -> "Polynomial":
        if not 0 <= i < nvars:
            raise IndexError(f"variable {i} out of range for {nvars} variables")
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    @classmethod
    def linear(cls, coeffs: Sequence, const=0) -> "Polynomial":
        """sum_i coeffs[i] x_i + const."""
        n = len(coeffs)
        terms = {(0,) * n: const}
        for i, c in enumerate(coeffs):
            e = [0] * n
            e[i] = 1
            terms[tuple(e)] = c
        return cls(n, terms)

    @classmethod
    def univariate_in(cls, coeffs: Sequence, linear: "Polynomial") -> "Polynomial":
        """q(linear) for q with coefficient list ``coeffs`` (lowest first)."""
        out = cls.zero(linear.nvars)
        for c in reversed(coeffs):
            out = out * linear + cls.const(linear.nvars, c)
        return out

    # basic protocol
    def copy(self) -> "Polynomial":
        return Polynomial(self.nvars, dict(self.terms))

    def _check(self, other: "Polynomial"):
        if other.nvars != self.nvars:
            raise ValueError("polynomials live in different numbers of variables")

    def _lift(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        return Polynomial.const(self.nvars, other)

    def __add__(self, other) -> "Polynomial":
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        p = Polynomial(self.nvars)
        p.terms = out
        return p

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        p = Polynomial(self.nvars)
        p.terms = {e: -c for e, c in self.terms.items()}
        return p

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._lift(other) - self

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            if not other:
                return Polynomial(self.nvars)
            p = Polynomial(self.nvars)
            p.terms = {e: c * other for e, c in self.terms.items() if c * other}
            return p
        self._check(other)
        out: Dict[Exponent, object] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial(self.nvars, out)

    def __rmul__(self, other) -> "Polynomial":
        return self * other

    def __truediv__(self, c) -> "Polynomial":
        if isinstance(c, int):
            c = Fraction(c)
        return self * (1 / c)

    def __pow__(self, n: int) -> "Polynomial":
        out = Polynomial.const(self.nvars, 1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            other = Polynomial.const(self.nvars, other)
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=lambda e: (sum(e), e), reverse=True):
            mon = "*".join(f"x{i}^{k}" if k > 1 else f"x{i}" for i, k in enumerate(e) if k)
            parts.append(f"{self.terms[e]}" + (f"*{mon}" if mon else ""))
        return " + ".join(parts)

    # structure
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def coefficient(self, e: Exponent):
        return self.terms.get(tuple(e), 0)

    def homogeneous_part(self, d: int) -> "Polynomial":
        return Polynomial(self.nvars, {e: c for e, c in self.terms.items() if sum(e) == d})

    def map_coefficients(self, f: Callable) -> "Polynomial":
        return Polynomial(self.nvars, {e: f(c) for e, c in self.terms.items()})

    def conjugate(self) -> "Polynomial":
        return self.map_coefficients(conj)

    # calculus
    def diff(self, i: int, order: int = 1) -> "Polynomial":
        if not 0 <= i < self.nvars:
            raise IndexError(f"variable {i} out of range for {self.nvars} variables")
        out: Dict[Exponent, object] = {}
        for e, c in self.terms.items():
            k = e[i]
            if k < order:
                continue
            f = math.perm(k, order)
            ne = list(e)
            ne[i] = k - order
            out[tuple(ne)] = c * f
        return Polynomial(self.nvars, out)

    def mul_var(self, i: int) -> "Polynomial":
        out = {}
        for e, c in self.terms.items():
            ne = list(e)
            ne[i] += 1
            out[tuple(ne)] = c
        p = Polynomial(self.nvars)
        p.terms = out
        return p

    def shift(self, i: int, delta: int) -> "Polynomial":
        """Substitute x_i -> x_i + delta."""
        if delta == 0:
            return self.copy()
        out: Dict[Exponent, object] = {}
        for e, c in self.terms.items():
            k = e[i]
            for j in range(k + 1):
                coef = c * math.comb(k, j) * delta ** (k - j)
                ne = list(e)
                ne[i] = j
                t = tuple(ne)
                out[t] = out.get(t, 0) + coef
        return Polynomial(self.nvars, out)

    # evaluation
    def __call__(self, point: Sequence):
        total = 0
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * x ** k
            total = total + term
        return total

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized float/complex evaluation at the rows of ``points``."""
        points = np.asarray(points, dtype=float)
        out = np.zeros(points.shape[0], dtype=complex)
        for e, c in self.terms.items():
            term = np.full(points.shape[0], complex(c))
            for i, k in enumerate(e):
                if k:
                    term = term * points[:, i] ** k
            out += term
        if np.all(out.imag == 0):
            return out.real
        return out

    def items(self) -> Iterable:
        return self.terms.items()
