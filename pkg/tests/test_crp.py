import random
from fractions import Fraction

import numpy as np
import pytest

from su11lab import crp
from su11lab.axioms import random_fock_vector, random_test_function
from su11lab.fock import FockVector, SiteSpace


def test_partitions():
    assert crp.partitions(4) == ((4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1))
    assert crp.partitions(4, 2) == ((2, 2), (2, 1, 1), (1, 1, 1, 1))
    assert crp.partitions(0) == ((),)


def test_table_weights_sum_to_site_weight():
    # sum over seatings of m customers of prod (a/n)^k / k! equals (a)_m / m!
    sp = SiteSpace([Fraction(3, 2), Fraction(1, 3)])
    for occ in [(3, 0), (2, 4), (5, 1)]:
        total = sum(crp.table_weight(sp, k) for k in crp.table_configurations(occ))
        assert total == sp.weight(occ)


def test_lift_is_isometric_and_intertwines():
    rng = random.Random(17)
    for _ in range(5):
        sp = SiteSpace([Fraction(rng.randint(1, 7), rng.randint(1, 3)) for _ in range(3)])
        f = random_fock_vector(rng, sp, 5)
        assert crp.lift(f).norm2() == f.norm2()
        assert all(crp.intertwine_check(sp, random_test_function(rng, 3), f).values())


def test_lift_rejects_small_cap():
    sp = SiteSpace([1])
    with pytest.raises(ValueError):
        crp.lift(FockVector(sp, {(3,): 1}), n_cap=2)


def test_single_table_algebra():
    assert not any(crp.single_table_commutators(25).values())
    assert crp.bargmann_index() == 1


def test_single_table_unitary_is_unitary():
    N = 40
    U = crp.single_table_unitary(0.3 - 0.4j, 0.7, N)
    n = np.arange(1, N + 1)
    W = np.diag(1.0 / n)
    assert np.abs(U.conj().T @ W @ U - W).max() < 1e-12


@pytest.mark.parametrize("t", [0.0, 0.5, -1.0, 2.0])
@pytest.mark.parametrize("z", [0.0, 0.3, -0.2])
def test_single_table_ode(t, z):
    res, _ = crp.single_table_ode_check(t, z=z)
    assert res <= 1e-9


def test_ode_domain():
    with pytest.raises(ValueError):
        crp.single_table_ode_check(2.5)


def test_araki_identity():
    sp = SiteSpace([1, Fraction(1, 2)])
    r = crp.araki_identity_check(sp, [0.4 + 0.3j, -0.7j], [0.3, -1.1], [0.2, 0.5j])
    assert max(r.inner_residual, r.norm_residual, r.prefactor_residual, r.tail_bound) <= 1e-9
    assert r.vector_residual <= 1e-8


def test_araki_requires_phase_convention():
    sp = SiteSpace([1])
    bad = crp.araki_identity_check(sp, [0.5], [0.4], [0.3], phase_sign=+1)
    assert bad.vector_residual > 1e-3
