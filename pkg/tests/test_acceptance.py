"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line; the lines are printed in the terminal
summary (see conftest.py) and also when this file is run as a script.
"""

import random
import time
from fractions import Fraction

import numpy as np
import pytest

from su11lab import crp, gamma, harness, orthopoly, pascal, unitary, univariate
from su11lab.axioms import random_fock_vector, random_polynomial, random_test_function
from su11lab.fock import FockVector, SiteSpace

RESULTS = {}


def _report(n, ok, text):
    RESULTS[n] = f"{'PASS' if ok else 'FAIL'} criterion {n:>2}: {text}"


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.dt = time.perf_counter() - self.t0


def _ns_full(l, n_max=5):
    if l == 1:
        return [(n,) for n in range(n_max + 1)]
    return [(a, b) for a in range(n_max + 1) for b in range(n_max + 1)]


BLOCKS = ([[0]], [[1, 2]], [[0, 1, 2]], [[0], [1, 2]], [[2], [0]], [[1], [0, 2]])


def test_c01_current_algebra_axioms_exact():
    cfg = harness.RunConfig.from_mapping({"suites": [], "n_pairs": 50, "seed": 101})
    with Timer() as t:
        reports = {k: harness._axiom_run(cfg, "acceptance", k) for k in ("fock", "gamma", "pascal")}
    ok = all(r.passed for r in reports.values()) and t.dt <= 60
    counts = ", ".join(f"{k} {r.checks - len(r.failures)}/{r.checks}" for k, r in reports.items())
    _report(1, ok, f"axioms exact on 50 pairs ({counts}) in {t.dt:.1f}s")
    assert all(r.passed for r in reports.values()), {k: r.failures[:3] for k, r in reports.items()}
    assert t.dt <= 60


def test_c02_exponential_vector_action():
    sp = SiteSpace([Fraction(1, 2), Fraction(3, 2)])
    xis, thetas, zs = harness._unitary_instances()
    d = 6
    with Timer() as t:
        def worst(M):
            return max(unitary.exponential_action_check(sp, unitary.UnitaryParams(xi, th), z, (M, M), min(d, M))[0]
                       for xi in xis for th in thetas for z in zs)
        at_default = worst(d + 20)
        ladder = [worst(M) for M in (10, 20, 30)]
    monotone = all(b <= a + 1e-12 for a, b in zip(ladder, ladder[1:]))
    ok = at_default <= 1e-8 and monotone and t.dt <= 120
    _report(2, ok, f"max residual {at_default:.2e} at M=26 on 27-point grid; M=10,20,30 -> "
                   + ", ".join(f"{r:.1e}" for r in ladder) + f"; {t.dt:.1f}s")
    assert at_default <= 1e-8
    assert monotone
    assert t.dt <= 120


def test_c03_bch_certified():
    rng = random.Random(303)
    cases = []
    for k in range(8):
        S = 1 + k % 2
        sp = SiteSpace([Fraction(rng.randint(1, 6), 2) for _ in range(S)])
        f = random_fock_vector(rng, sp, rng.randint(0, 4))
        f = FockVector(sp, {m: complex(v) for m, v in f.amps.items()})
        xi = []
        for _ in range(S):
            r, ph = rng.uniform(0.1, 1.0), rng.uniform(0, 2 * np.pi)
            xi.append(r * np.exp(1j * ph))
        if k == 0:
            xi[0] = 1.0  # boundary |xi| = 1
        cases.append((sp, xi, f))
    with Timer() as t:
        results = []
        for sp, xi, f in cases:
            M = unitary.bch_certified_cap(sp, xi, f, 1e-8)
            results.append((M, unitary.bch_check(sp, xi, f, [M] * sp.S, 4, 1e-8)))
    worst = max(r.residual for _, r in results)
    tail = max(float(r.tail_bound) for _, r in results)
    cert = all(r.certified for _, r in results)
    ok = worst <= 1e-8 and cert and t.dt <= 120
    _report(3, ok, f"BCH residual {worst:.1e}, certified tail {tail:.1e} "
                   f"(M up to {max(M for M, _ in results)}) in {t.dt:.1f}s")
    assert cert and worst <= 1e-8
    assert t.dt <= 120


def test_c04_vacuum_expectation():
    sp = SiteSpace([1])
    with Timer() as t:
        errs = []
        for xi in (0.2, 0.5, 1.0):
            for th in (0.0, 0.3):
                v, _ = unitary.vacuum_expectation(sp, unitary.UnitaryParams((xi,), (th,)))
                errs.append(abs(v - np.exp(1j * th - np.log(np.cosh(xi)))))
    ok = max(errs) <= 1e-8 and t.dt <= 30
    _report(4, ok, f"vacuum expectation max error {max(errs):.1e} in {t.dt:.2f}s")
    assert max(errs) <= 1e-8
    assert t.dt <= 30


def _gate(params, n):
    fam = orthopoly.monic_family(params, n)
    off, norm = 0.0, 0.0
    for i in range(n + 1):
        for j in range(i, n + 1):
            v = float(orthopoly.orthogonality_oracle(params, fam[i], fam[j]).value)
            if i == j:
                ref = float(orthopoly.squared_norm(params, i))
                norm = max(norm, abs(v - ref) / ref)
            else:
                off = max(off, abs(v))
    return off, norm


def test_c05_iterate_identities():
    sp = SiteSpace([Fraction(1, 2), Fraction(3, 2), Fraction(2)])
    prm = pascal.PascalParams(Fraction(1, 3))
    with Timer() as t:
        gates = []
        alphas = sorted({sum(sp.alpha[i] for i in b) for bl in BLOCKS for b in bl})
        for a in alphas:
            gates.append(_gate(orthopoly.FamilyParams("laguerre", a), 5))
            gates.append(_gate(orthopoly.FamilyParams("meixner", a, s=prm.s), 5))
        bad = total = 0
        for blocks in BLOCKS:
            for ns in _ns_full(len(blocks)):
                total += 2
                bad += gamma.laguerre_iterates(sp, blocks, ns) != gamma.laguerre_product(sp, blocks, ns)
                bad += pascal.meixner_iterates(sp, prm, blocks, ns) != pascal.meixner_product(sp, prm, blocks, ns)
    off = max(g[0] for g in gates)
    norm = max(g[1] for g in gates)
    ok = bad == 0 and off <= 1e-10 and norm <= 1e-10 and t.dt <= 60
    _report(5, ok, f"{total - bad}/{total} iterate identities exact; oracle off-diag {off:.1e}, "
                   f"norm rel {norm:.1e}; {t.dt:.1f}s")
    assert bad == 0 and off <= 1e-10 and norm <= 1e-10
    assert t.dt <= 60


def test_c06_ibp_and_mecke():
    sp = SiteSpace([Fraction(1, 2), Fraction(3, 2), Fraction(2)])
    prm = pascal.PascalParams(Fraction(1, 2))
    rng = random.Random(606)
    R, seed = 100_000, 606
    with Timer() as t:
        ibp_bad = mecke_bad = 0
        for _ in range(20):
            phi = random_test_function(rng, 3, complex_=False)
            ibp_bad += gamma.ibp_residual(sp, phi, random_polynomial(rng, 3, 4)) != 0
            mecke_bad += pascal.mecke_residual(sp, prm, [random_polynomial(rng, 3, 3) for _ in range(3)]) != 0
        phi = random_test_function(rng, 3, complex_=False)
        F = random_polynomial(rng, 3, 3, complex_=False)
        G = [random_polynomial(rng, 3, 2, complex_=False) for _ in range(3)]
        xs = np.concatenate([gamma.sample_gamma(gamma.GammaSampler(sp), g, n)
                             for g, n in harness.mc_blocks(seed, "acceptance/ibp", R)])
        ns = np.concatenate([pascal.sample_pascal(pascal.PascalSampler(sp, prm), g, n)
                             for g, n in harness.mc_blocks(seed, "acceptance/mecke", R)])
        ibp = gamma.ibp_mc(sp, phi, F, xs)
        mk = pascal.mecke_mc(sp, prm, G, ns.astype(float))
    mc_ok = abs(ibp.mean) <= 3 * ibp.stderr and abs(mk.mean) <= 3 * mk.stderr
    ok = ibp_bad == 0 and mecke_bad == 0 and mc_ok and t.dt <= 120
    _report(6, ok, f"exact residual 0 on {20 - ibp_bad}/20 IBP and {20 - mecke_bad}/20 Mecke; "
                   f"MC R={R}: IBP {ibp.mean:.2e}+-{ibp.stderr:.1e}, Mecke {mk.mean:.2e}+-{mk.stderr:.1e}; "
                   f"{t.dt:.1f}s")
    assert ibp_bad == 0 and mecke_bad == 0
    assert mc_ok
    assert t.dt <= 120


def test_c07_spectra():
    sp = SiteSpace([Fraction(1, 2), Fraction(3, 2)])
    target = [Fraction(-k) for k in range(9)]
    with Timer() as t:
        dw = gamma.dw_spectrum_check(sp, 8)
        nb = pascal.neutral_spectrum_check(sp, pascal.PascalParams(Fraction(1, 3)), 8)
    ok = sorted(set(dw), reverse=True) == target and sorted(set(nb), reverse=True) == target and t.dt <= 10
    _report(7, ok, f"eigenvalues {{0,...,-8}} for both generators ({len(dw)} monomials) in {t.dt:.2f}s")
    assert sorted(set(dw), reverse=True) == target
    assert sorted(set(nb), reverse=True) == target
    assert t.dt <= 10


def test_c08_birth_death():
    R, seed = 10_000, 808
    rows, ok_all = [], True
    with Timer() as t:
        for a in (Fraction(1, 2), Fraction(1), Fraction(2)):
            for s in (Fraction(1, 3), Fraction(1, 2)):
                d = univariate.markov_generator_extract(univariate.MeixnerRep(a, s), "bd_neutral").diagnostics
                gap = -sorted(set(d["spectrum"]), reverse=True)[1]
                tv, bound = harness.birth_death_tv(float(a), float(s * s), R,
                                                   harness.rng_stream(seed, f"acceptance/bd/{a}/{s}"),
                                                   horizon=50.0 / float(gap))
                good = d["detailed_balance"] and d["markov"] and tv <= 3 * bound
                ok_all &= good
                rows.append(f"a={a},s={s}: TV {tv:.4f} <= {3 * bound:.4f}")
    ok = ok_all and t.dt <= 120
    _report(8, ok, "detailed balance exact; " + "; ".join(rows) + f"; {t.dt:.1f}s")
    assert ok_all, rows
    assert t.dt <= 120


def test_c09_vacuum_moments():
    with Timer() as t:
        errs = {}
        for case, par in (("gauss", None), ("poisson", Fraction(1, 2)), ("gamma", None),
                          ("pascal", Fraction(5, 2))):
            errs[case] = univariate.vacuum_moment_dictionary(case, par, 8).max_relative_error()
    ok = max(errs.values()) <= 1e-9 and t.dt <= 10
    _report(9, ok, "moments to order 8, relative error " + ", ".join(f"{k} {v:.0e}" for k, v in errs.items())
            + f"; {t.dt:.2f}s")
    assert max(errs.values()) <= 1e-9
    assert t.dt <= 10


def test_c10_table_lift():
    rng = random.Random(1010)
    with Timer() as t:
        bad = 0
        for _ in range(20):
            sp = SiteSpace([Fraction(rng.randint(1, 7), rng.randint(1, 3)) for _ in range(rng.randint(1, 3))])
            f = random_fock_vector(rng, sp, 5)
            bad += crp.lift(f).norm2() != f.norm2()
            bad += not all(crp.intertwine_check(sp, random_test_function(rng, sp.S), f).values())
        sp = SiteSpace([1, Fraction(1, 2)])
        scal, vec = 0.0, 0.0
        for xi, th, z in (([0.4, 0.0], [0.3, 0.0], [0.2, 0.0]),
                          ([0.4 + 0.3j, -0.7j], [0.3, -1.1], [0.2, 0.5j]),
                          ([1.0, 0.2j], [0.0, 0.5], [-0.3, 0.1])):
            r = crp.araki_identity_check(sp, xi, th, z)
            scal = max(scal, r.inner_residual, r.norm_residual, r.prefactor_residual, r.tail_bound)
            vec = max(vec, r.vector_residual)
        ode = max(crp.single_table_ode_check(tt)[0] for tt in (0.0, 0.5, 1.0, -1.5, 2.0))
        alg = not any(crp.single_table_commutators(30).values()) and crp.bargmann_index() == 1
    ok = bad == 0 and scal <= 1e-9 and ode <= 1e-9 and alg and t.dt <= 60
    _report(10, ok, f"lift isometry/intertwining exact (failures {bad}); scalar identities {scal:.1e}, "
                    f"vector {vec:.1e}; ODE {ode:.1e}; {t.dt:.1f}s")
    assert bad == 0 and scal <= 1e-9 and ode <= 1e-9 and alg
    assert t.dt <= 60


def test_c11_determinism():
    cfg = harness.RunConfig.from_mapping({"suites": ["crp", "univariate", "mc-crosschecks"],
                                          "replicas": 2000, "seed": 1111})
    h1 = harness.determinism_hash(cfg, harness.run_suite(cfg))
    h2 = harness.determinism_hash(cfg, harness.run_suite(cfg))
    other = harness.RunConfig.from_mapping({"suites": ["mc-crosschecks"], "replicas": 2000, "seed": 1112})
    h3 = harness.determinism_hash(other, harness.run_suite(other))
    _report(11, h1 == h2, f"two runs hash {h1[:16]}... == {h2[:16]}...")
    assert h1 == h2
    assert h3 != h1


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
