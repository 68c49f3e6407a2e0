import math
from fractions import Fraction

import numpy as np
import pytest

from su11lab import su11
from su11lab.exact import GaussianRational, conj, falling, rising, stirling2


def test_gaussian_rational_field_ops():
    a, b = GaussianRational(1, 2), GaussianRational(Fraction(1, 3), -1)
    assert a * b == GaussianRational(Fraction(1, 3) + 2, Fraction(2, 3) - 1)
    assert (a / b) * b == a
    assert conj(a) == GaussianRational(1, -2)
    assert a * conj(a) == 5
    assert complex(a + 1) == 2 + 2j


def test_rising_falling_stirling():
    assert rising(Fraction(1, 2), 3) == Fraction(15, 8)
    assert rising(3, 0) == 1
    assert falling(5, 2) == 20
    # x^n = sum S(n,k) x_(k)
    for x in range(6):
        assert x ** 4 == sum(stirling2(4, k) * falling(x, k) for k in range(5))


def test_basis_relations():
    assert su11.basis_relations_residual() == 0


@pytest.mark.parametrize("xi", [0.0, 0.3, 0.7 - 0.2j, 2.5j])
@pytest.mark.parametrize("theta", [0.0, 0.4, -1.3])
def test_group_element_closed_form(xi, theta):
    p = su11.GroupParams(xi, theta)
    g = su11.build_group_element(p)
    assert g.det_residual() < 1e-12
    assert np.abs(g.matrix - su11.group_element_by_expm(p)).max() < 1e-12


@pytest.mark.parametrize("xi", [0.0, 0.5, 1 + 1j, -3j])
def test_scalar_bch(xi):
    assert su11.scalar_bch_check(xi) < 1e-12


def test_mobius_step():
    xi = 0.4 - 0.3j
    u = xi / abs(xi)
    assert abs(su11.mobius_step(0, xi) - u * math.tanh(0.5)) < 1e-15
    # the step maps the unit disc to itself and is inverted by -xi
    z = 0.2 + 0.1j
    w = su11.mobius_step(z, xi)
    assert abs(w) < 1
    assert abs(su11.mobius_step(w, -xi) - z) < 1e-14
    assert su11.mobius_step(z, 0) == z
    with pytest.raises(ValueError):
        su11.mobius_step(1.0, xi)


def test_sl2_needs_half():
    assert su11.sl2_isomorphism_check(True) < 1e-14
    assert su11.sl2_isomorphism_check(False) > 1


def test_from_matrix_rejects_non_su11():
    with pytest.raises(ValueError):
        su11.Su11Element.from_matrix(np.eye(2) * (1 + 1j))
    assert math.isclose(su11.Su11Element.from_matrix(np.eye(2)).a.real, 1.0)
