from fractions import Fraction

import numpy as np
import pytest

from su11lab import univariate as uv
from su11lab.polynomial import Polynomial

ALPHAS = [Fraction(1, 2), Fraction(1), Fraction(2)]
SS = [Fraction(1, 3), Fraction(1, 2)]


@pytest.mark.parametrize("alpha", ALPHAS)
def test_weighted_sequence_rep(alpha):
    w = uv.build_weighted_rep(alpha, 10)
    assert not any(w.commutator_residuals().values())
    assert w.casimir_residual() == 0
    assert w.adjoint_residual() == 0
    m0 = alpha / 2
    assert w.casimir_value() == m0 * (m0 - 1)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_laguerre_intertwining(alpha):
    rep = uv.build_laguerre_rep(alpha)
    assert sum(uv.intertwine_residuals(rep, 8).values()) == 0
    assert uv.casimir_failures(rep, 6) == 0


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("s", SS)
def test_meixner_intertwining(alpha, s):
    rep = uv.build_meixner_rep(alpha, s)
    assert sum(uv.intertwine_residuals(rep, 8).values()) == 0
    assert uv.casimir_failures(rep, 6) == 0


def test_laguerre_basis_is_normalized_laguerre():
    from scipy.special import eval_genlaguerre
    rep = uv.build_laguerre_rep(Fraction(3, 2))
    for n in range(6):
        for x in (0.3, 2.0):
            assert abs(complex(rep.basis(n).evaluate_many(np.array([[x]]))[0]) - eval_genlaguerre(n, 0.5, x)) < 1e-10


def test_oscillator_ccr():
    osc = uv.build_oscillator(8)
    assert osc.ccr_residual() == 0
    assert osc.vacuum_moment(osc.number, 3) == 0


@pytest.mark.parametrize("case,par", [("gauss", None), ("poisson", Fraction(1, 2)), ("poisson", Fraction(-1, 3)),
                                      ("gamma", None), ("pascal", Fraction(5, 2)), ("pascal", Fraction(-10, 3))])
def test_vacuum_moments(case, par):
    vm = uv.vacuum_moment_dictionary(case, par, 8)
    assert vm.max_relative_error() <= 1e-9
    assert len(list(vm)) == 9


def test_pascal_constants():
    vm = uv.vacuum_moment_dictionary("pascal", Fraction(5, 2), 8)
    assert vm.constants["c1"] == 3 and vm.constants["c2"] == Fraction(-1, 2)
    assert vm.constants["p"] == Fraction(1, 4)


def test_vacuum_moment_errors():
    with pytest.raises(ValueError):
        uv.vacuum_moment_dictionary("pascal", Fraction(2), 4)
    with pytest.raises(ValueError):
        uv.vacuum_moment_dictionary("gauss", None, 8, n_max=5)
    with pytest.raises(ValueError):
        uv.vacuum_moment_dictionary("cauchy")


@pytest.mark.parametrize("alpha", ALPHAS)
def test_laguerre_generators(alpha):
    lag = uv.LaguerreRep(alpha)
    r = uv.markov_generator_extract(lag, "laguerre_semigroup")
    assert r.diagnostics["spectrum"] == [Fraction(-k) for k in range(9)]
    assert r.diagnostics["reversible"] and r.diagnostics["conservative"]
    b = uv.markov_generator_extract(lag, "squared_bessel")
    assert b.diagnostics["conservative"]
    assert set(b.diagnostics["spectrum"]) == {0}


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("s", SS)
def test_birth_death_generators(alpha, s):
    m = uv.MeixnerRep(alpha, s)
    d = uv.markov_generator_extract(m, "bd_neutral").diagnostics
    assert d["markov"] and d["detailed_balance"]
    assert d["spectrum"] == [Fraction(-k) for k in range(9)]
    d = uv.markov_generator_extract(m, "bd_lowering").diagnostics
    assert d["markov"] and d["detailed_balance"]


def test_generator_rep_mismatch():
    with pytest.raises(ValueError):
        uv.markov_generator_extract(uv.LaguerreRep(1), "bd_neutral")
    with pytest.raises(ValueError):
        uv.markov_generator_extract(uv.MeixnerRep(1, Fraction(1, 2)), "laguerre_semigroup")


def test_inclusion_process():
    g = uv.assemble_sip_generator(2, [(0, 1)], 6)
    assert g.is_markov_on_interior()
    assert g.rate((3, 2), (2, 3)) == pytest.approx(3 * 2.5)
    assert g.rate((0, 2), (1, 1)) == pytest.approx(2 * 0.5)
    with pytest.raises(ValueError):
        uv.assemble_sip_generator(2, [(0, 0)])


def test_cir_moments(np_rng):
    x = uv.cir_euler_maruyama(1.5, 2.0, 1.0, 2e-3, 20000, np_rng)
    for k in (1, 2):
        se = (x ** k).std(ddof=1) / np.sqrt(x.size)
        assert abs((x ** k).mean() - uv.cir_exact_moment(Fraction(3, 2), 2.0, 1.0, k)) <= 4 * se
    # first moment relaxes to alpha at rate 1
    assert uv.cir_exact_moment(Fraction(3, 2), 2.0, 1.0, 1) == pytest.approx(1.5 + 0.5 * np.exp(-1))
