import json
import random
from fractions import Fraction

import numpy as np
import pytest

from su11lab.axioms import AxiomReport, FockRepresentation, check_axioms, random_fock_vector, random_test_function
from su11lab.exact import GaussianRational
from su11lab.fock import (FockVector, SiteSpace, basis_vector, cyclicity_rank, decomposition_check,
                          direct_formula_oracle, exp_inner_closed_form, exp_inner_tail_bound, exponential_vector,
                          inner_product, k_minus, k_plus, k_zero, lambda_weight, lambda_weight_bruteforce,
                          lambda_weight_recursive, vacuum)


def test_site_weight_is_rising_over_factorial(space2):
    # (1/2)_2 / 2! * (3/2)_1 / 1!
    assert space2.weight((2, 1)) == Fraction(3, 8) * Fraction(3, 2)


@pytest.mark.parametrize("point", [(0,), (0, 0), (0, 1, 0), (2, 2, 2, 1), (1, 0, 2, 0, 1)])
def test_lambda_weights_agree(space3, point):
    v = lambda_weight(space3, point)
    assert v == lambda_weight_bruteforce(space3, point) == lambda_weight_recursive(space3, point)


def test_ladder_action_on_basis(space2):
    e = basis_vector(space2, (1, 0))
    phi = (1, 0)
    assert k_plus(space2, phi).apply(e) == basis_vector(space2, (2, 0), value=2)
    assert k_minus(space2, phi).apply(e) == vacuum(space2) * Fraction(1, 2)
    assert k_zero(space2, phi).apply(e) == e * Fraction(5, 4)
    assert k_minus(space2, phi).apply(vacuum(space2)).is_zero()


@pytest.mark.parametrize("which", ["plus", "minus", "zero"])
def test_direct_formula_oracle(space3, which):
    rng = random.Random(5)
    ops = {"plus": k_plus, "minus": k_minus, "zero": k_zero}
    for _ in range(5):
        phi = random_test_function(rng, space3.S)
        f = random_fock_vector(rng, space3, 3)
        got = ops[which](space3, phi).apply(f)
        assert got == direct_formula_oracle(phi, f, which, max_degree=5)


def test_factor_free_variant_is_a_representation():
    rng = random.Random(11)
    good, bad = AxiomReport(), AxiomReport()
    for _ in range(10):
        sp = SiteSpace([Fraction(rng.randint(1, 6), 2) for _ in range(2)])
        phi, th = random_test_function(rng, 2), random_test_function(rng, 2)
        vecs = [random_fock_vector(rng, sp, 3, (5, 5)) for _ in range(2)]
        check_axioms(FockRepresentation(sp, (5, 5)), phi, th, vecs, report=good)
        check_axioms(FockRepresentation(sp, (5, 5), "prefactor"), phi, th, vecs, report=bad)
    assert good.passed and good.checks > 0
    assert not bad.passed


def test_decomposition_exact(space3):
    rng = random.Random(2)
    r = decomposition_check(space3, random_test_function(rng, 3), random_test_function(rng, 3), (4, 4, 4))
    assert r.max() == 0


def test_cyclicity(space3):
    rank, dim = cyclicity_rank(space3, 4)
    assert rank == dim


@pytest.mark.parametrize("u,v", [((0.3, 0.1j), (0.2, -0.5)), ((0.6, 0.0), (0.6, 0.6))])
def test_exponential_vector_inner_product(space2, u, v):
    caps = (40, 40)
    eu, ev = exponential_vector(space2, u, caps), exponential_vector(space2, v, caps)
    err = abs(complex(inner_product(eu, ev)) - exp_inner_closed_form(space2, u, v))
    assert err <= exp_inner_tail_bound(space2, u, v, caps) + 1e-13


def test_exponential_vector_domain(space2):
    with pytest.raises(ValueError):
        exponential_vector(space2, (1.0, 0), (3, 3))


def test_vector_validation_and_roundtrips(space2):
    with pytest.raises(ValueError):
        FockVector(space2, {(1,): 1})
    with pytest.raises(ValueError):
        FockVector(space2, {(3, 0): 1}, caps=(2, 2))
    f = FockVector(space2, {(1, 2): GaussianRational(1, -2), (0, 0): Fraction(1, 3)}, caps=(3, 3))
    back = FockVector.from_json(f.to_json())
    assert back.caps == f.caps and set(back.amps) == set(f.amps)
    assert max(abs(complex(back[m]) - complex(f[m])) for m in f.amps) < 1e-15
    back = FockVector.from_dense(space2, f.to_dense())
    assert max(abs(complex(back[m]) - complex(f[m])) for m in f.amps) < 1e-15
    assert f.norm2() == Fraction(1, 9) + 5 * space2.weight((1, 2))
    json.loads(k_plus(space2, (1, 1)).to_json((2, 2)))


def test_sparse_matrix_matches_apply(space2):
    op = k_minus(space2, (GaussianRational(1, 1), 2))
    mat = op.to_scipy((3, 3)).toarray()
    f = FockVector(space2, {(1, 2): 1, (2, 0): GaussianRational(0, 1)}, caps=(3, 3))
    got = op.apply(f)
    dense_in = f.to_dense().reshape(-1)
    dense_out = (mat @ dense_in).reshape(4, 4)
    assert np.allclose(dense_out, got.with_caps((3, 3)).to_dense())
