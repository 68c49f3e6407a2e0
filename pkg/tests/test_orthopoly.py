from fractions import Fraction

import pytest
from scipy import special

from su11lab.orthopoly import (FamilyParams, generating_function_check, hypergeometric_monic, measure_mean,
                               monic_family, orthogonality_oracle, squared_norm)

FAMILIES = [
    FamilyParams("laguerre", Fraction(1, 2)),
    FamilyParams("laguerre", Fraction(3)),
    FamilyParams("meixner", Fraction(2), s=Fraction(1, 3)),
    FamilyParams("meixner", Fraction(1, 2), s=Fraction(1, 2)),
    FamilyParams("charlier", lam=Fraction(3, 2)),
]


@pytest.mark.parametrize("params", FAMILIES, ids=lambda p: p.family)
def test_recurrence_matches_hypergeometric(params):
    fam = monic_family(params, 7)
    for n, poly in enumerate(fam):
        assert poly == hypergeometric_monic(params, n)


@pytest.mark.parametrize("params", FAMILIES, ids=lambda p: p.family)
def test_orthogonality_oracle(params):
    fam = monic_family(params, 4)
    for i in range(5):
        for j in range(i, 5):
            r = orthogonality_oracle(params, fam[i], fam[j])
            if i == j:
                ref = float(squared_norm(params, i))
                assert abs(float(r.value) - ref) <= 1e-10 * ref
            else:
                assert abs(float(r.value)) <= 1e-10


def test_first_polynomial_is_centered():
    for params in FAMILIES:
        p1 = monic_family(params, 1)[1]
        assert p1.coefficients == (-measure_mean(params), 1)


def test_laguerre_against_scipy():
    a = 2.5
    params = FamilyParams("laguerre", Fraction(5, 2))
    for n, poly in enumerate(monic_family(params, 6)):
        lead = (-1) ** n / special.factorial(n)
        for x in (0.1, 1.7, 6.0):
            assert abs(lead * float(poly(Fraction(x))) - special.eval_genlaguerre(n, a - 1, x)) < 1e-9


@pytest.mark.parametrize("params", FAMILIES, ids=lambda p: p.family)
def test_generating_function(params):
    r = generating_function_check(params, 0.05, [0.0, 1.0, 3.0])
    assert not r.diverges
    assert r.residual < 1e-10


def test_generating_function_divergence_flag():
    params = FamilyParams("meixner", Fraction(1), s=Fraction(1, 2))
    assert generating_function_check(params, 0.3, [1.0]).diverges


def test_parameter_validation():
    with pytest.raises(ValueError):
        FamilyParams("laguerre", Fraction(0))
    with pytest.raises(ValueError):
        FamilyParams("meixner", Fraction(1), s=Fraction(3, 2))
    with pytest.raises(ValueError):
        FamilyParams("charlier")
    with pytest.raises(ValueError):
        FamilyParams("hermite")
