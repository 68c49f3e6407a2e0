import random
from fractions import Fraction

import numpy as np

from su11lab.axioms import AxiomReport, random_polynomial
from su11lab.exact import GaussianRational
from su11lab.polynomial import Polynomial


def test_polynomial_arithmetic():
    x, y = Polynomial.var(2, 0), Polynomial.var(2, 1)
    p = (x + y) * (x - y)
    assert p == x * x - y * y
    assert p.degree() == 2
    assert p.diff(0) == x * 2
    assert (x * y).shift(0, 1) == x * y + y
    assert p.mul_var(1) == x * x * y - y * y * y


def test_evaluate_many():
    rng = random.Random(0)
    P = random_polynomial(rng, 2, 4)
    pts = np.array([[0.5, -1.0], [2.0, 0.25]])
    vals = P.evaluate_many(pts)
    for row, v in zip(pts, vals):
        direct = sum(complex(c) * row[0] ** e[0] * row[1] ** e[1] for e, c in P.items())
        assert abs(direct - v) < 1e-12


def test_univariate_substitution():
    lin = Polynomial.linear([1, 1])
    P = Polynomial.univariate_in([Fraction(-1), 0, 1], lin)
    x, y = Polynomial.var(2, 0), Polynomial.var(2, 1)
    assert P == (x + y) * (x + y) - 1


def test_gaussian_coefficients_are_exact():
    i = GaussianRational(0, 1)
    x = Polynomial.var(1, 0)
    assert (x * i) * (x * i) == x * x * -1


def test_axiom_report_merge():
    a, b = AxiomReport(), AxiomReport()
    a.record("ok", True)
    b.record("bad", False)
    a.merge(b)
    assert a.checks == 2 and a.failures == ["bad"] and not a.passed
