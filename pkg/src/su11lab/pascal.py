"""Pascal (negative binomial) representation: polynomials in site counts.

Counts n_i are independent NB(alpha_i, p) with P(n) = (1-p)^alpha p^n (alpha)_n / n!.
Everything is parametrized by a rational s = sqrt(p), so c = (1 - p)/s and all
operator coefficients stay rational.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, List, Sequence, Tuple

import numpy as np

from .exact import conj, rising, stirling2
from .fock import SiteSpace, TestFunction
from .gamma import MCResult, _indicator, _triangular_spectrum, _monomials, check_disjoint
from .orthopoly import FamilyParams, monic_family
from .polynomial import Polynomial
from .univariate import birth_death_rates

__all__ = [
    "CountPolynomial",
    "PascalParams",
    "difference",
    "PascalRepresentation",
    "AuxOperators",
    "pascal_expectation",
    "poisson_expectation",
    "mecke_residual",
    "mecke_mc",
    "meixner_iterates",
    "meixner_product",
    "field_combination_residual",
    "linear_combination_residuals",
    "CharlierOperators",
    "charlier_iterates",
    "charlier_product",
    "neutral_generator_matrix",
    "neutral_spectrum_check",
    "PascalSampler",
    "sample_pascal",
    "simulate_birth_death",
    "birth_death_endpoints",
    "write_counts_csv",
    "write_trajectory_csv",
]

CountPolynomial = Polynomial


@dataclass(frozen=True)
class PascalParams:
    s: Fraction

    def __post_init__(self):
        object.__setattr__(self, "s", Fraction(self.s))
        if not 0 < self.s < 1:
            raise ValueError("s must lie in (0, 1)")

    @property
    def p(self) -> Fraction:
        return self.s * self.s

    @property
    def c(self) -> Fraction:
        return (1 - self.p) / self.s


def difference(F: Polynomial, site: int, direction: str) -> Polynomial:
    """D+ F = F(n + e_i) - F, D- F = F(n - e_i) - F."""
    if direction not in ("+", "-"):
        raise ValueError("direction must be '+' or '-'")
    return F.shift(site, 1 if direction == "+" else -1) - F


class PascalRepresentation:
    def __init__(self, space: SiteSpace, params: PascalParams):
        self.space = space
        self.params = params

    @property
    def nvars(self) -> int:
        return self.space.S

    def lowering(self, phi: Sequence):
        """K-(phi) F = (1/c) sum_i conj(phi_i) ((alpha_i + n_i) D+_i F + n_i D-_i F)."""
        phi = TestFunction(phi)
        alpha, c = self.space.alpha, self.params.c

        def op(F: Polynomial) -> Polynomial:
            out = Polynomial.zero(self.nvars)
            for i in phi.support():
                dp, dm = difference(F, i, "+"), difference(F, i, "-")
                out = out + (dp * alpha[i] + dp.mul_var(i) + dm.mul_var(i)) * (conj(phi[i]) / c)
            return out
        return op

    def raising(self, phi: Sequence):
        """K+(phi) F = (1/c) sum_i phi_i (p (n_i + alpha_i) F(n + e_i) + n_i F(n - e_i) / p)
        - (2 eta(phi) + alpha(phi)) F / c."""
        phi = TestFunction(phi)
        alpha, c, p = self.space.alpha, self.params.c, self.params.p

        def op(F: Polynomial) -> Polynomial:
            out = (F * Polynomial.linear(list(phi)) * 2 + F * self.space.total_alpha(phi)) * (-1 / c)
            for i in phi.support():
                up, down = F.shift(i, 1), F.shift(i, -1)
                out = out + ((up * alpha[i] + up.mul_var(i)) * p + down.mul_var(i) / p) * (phi[i] / c)
            return out
        return op

    def number(self, phi: Sequence):
        """The first line of K0: -(1/c) sum_i phi_i (s (alpha_i + n_i) D+ F + n_i D- F / s)."""
        phi = TestFunction(phi)
        alpha, c, s = self.space.alpha, self.params.c, self.params.s

        def op(F: Polynomial) -> Polynomial:
            out = Polynomial.zero(self.nvars)
            for i in phi.support():
                dp, dm = difference(F, i, "+"), difference(F, i, "-")
                out = out - ((dp * alpha[i] + dp.mul_var(i)) * s + dm.mul_var(i) / s) * (phi[i] / c)
            return out
        return op

    def neutral(self, phi: Sequence):
        half = Fraction(1, 2) * self.space.total_alpha(phi)
        num = self.number(phi)
        return lambda F: num(F) + F * half

    def vacuum(self) -> Polynomial:
        return Polynomial.const(self.nvars, 1)

    def inner(self, F: Polynomial, G: Polynomial):
        return pascal_expectation(self.space, self.params, F.conjugate() * G)

    def aux(self) -> "AuxOperators":
        return AuxOperators(self.space, self.params)


class AuxOperators:
    """Auxiliary su(1,1) triple on count polynomials.

    k+(phi) F = (1/s) sum_i phi_i n_i F(n - e_i)
    k-(phi) F = s sum_i conj(phi_i) (alpha_i + n_i) F(n + e_i)
    k0(phi) F = sum_i phi_i (n_i + alpha_i/2) F
    """

    def __init__(self, space: SiteSpace, params: PascalParams):
        self.space = space
        self.params = params

    @property
    def nvars(self):
        return self.space.S

    def raising(self, phi):
        phi = TestFunction(phi)
        s = self.params.s

        def op(F):
            out = Polynomial.zero(self.nvars)
            for i in phi.support():
                out = out + F.shift(i, -1).mul_var(i) * (phi[i] / s)
            return out
        return op

    def lowering(self, phi):
        phi = TestFunction(phi)
        s, alpha = self.params.s, self.space.alpha

        def op(F):
            out = Polynomial.zero(self.nvars)
            for i in phi.support():
                up = F.shift(i, 1)
                out = out + (up * alpha[i] + up.mul_var(i)) * (conj(phi[i]) * s)
            return out
        return op

    def neutral(self, phi):
        phi = TestFunction(phi)

        def op(F):
            return F * Polynomial.linear(list(phi), Fraction(1, 2) * self.space.total_alpha(phi))
        return op

    def vacuum(self):
        return Polynomial.const(self.nvars, 1)

    def inner(self, F, G):
        return pascal_expectation(self.space, self.params, F.conjugate() * G)


def _factorial_moment_expectation(F: Polynomial, per_site_factorial) -> object:
    total = 0
    for e, c in F.items():
        term = c
        for i, k in enumerate(e):
            if k:
                term = term * sum(stirling2(k, j) * per_site_factorial(i, j) for j in range(1, k + 1))
        total = total + term
    return total


def pascal_expectation(space: SiteSpace, params: PascalParams, F: Polynomial):
    """E[F] under independent NB(alpha_i, p): E[n^(j)] = (alpha)_j (p/(1-p))^j."""
    r = params.p / (1 - params.p)
    return _factorial_moment_expectation(F, lambda i, j: rising(space.alpha[i], j) * r ** j)


def poisson_expectation(space: SiteSpace, F: Polynomial):
    """E[F] under independent Poisson(lambda_i = alpha_i): E[n^(j)] = lambda^j."""
    return _factorial_moment_expectation(F, lambda i, j: space.alpha[i] ** j)


def _mecke_integrands(space: SiteSpace, params: PascalParams, G: Sequence[Polynomial]):
    lhs = Polynomial.zero(space.S)
    rhs = Polynomial.zero(space.S)
    for x, g in enumerate(G):
        lhs = lhs + g.mul_var(x)
        up = g.shift(x, 1)
        rhs = rhs + (up * space.alpha[x] + up.mul_var(x)) * params.p
    return lhs, rhs


def mecke_residual(space: SiteSpace, params: PascalParams, G: Sequence[Polynomial]):
    """E[sum_x G_x(eta) n_x] - E[sum_x p (alpha_x + n_x) G_x(eta + delta_x)]."""
    if len(G) != space.S:
        raise ValueError("need one polynomial per site")
    lhs, rhs = _mecke_integrands(space, params, G)
    return pascal_expectation(space, params, lhs) - pascal_expectation(space, params, rhs)


def mecke_mc(space: SiteSpace, params: PascalParams, G: Sequence[Polynomial], samples: np.ndarray) -> MCResult:
    lhs, rhs = _mecke_integrands(space, params, G)
    vals = np.real_if_close((lhs - rhs).evaluate_many(samples))
    return MCResult(float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(len(vals))), len(vals))


def meixner_iterates(space: SiteSpace, params: PascalParams, blocks, ns) -> Polynomial:
    check_disjoint(blocks, space.S)
    rep = PascalRepresentation(space, params)
    F = rep.vacuum()
    for block, n in reversed(list(zip(blocks, ns))):
        op = rep.raising(_indicator(space.S, block))
        for _ in range(n):
            F = op(F)
    return F


def meixner_product(space: SiteSpace, params: PascalParams, blocks, ns) -> Polynomial:
    """prod_j c^{n_j} M_{n_j}(eta(B_j); alpha(B_j), p), M monic."""
    out = Polynomial.const(space.S, 1)
    for block, n in zip(blocks, ns):
        a = sum(space.alpha[i] for i in block)
        poly = monic_family(FamilyParams("meixner", a, s=params.s), n)[n]
        lin = Polynomial.linear(list(_indicator(space.S, block)))
        out = out * Polynomial.univariate_in(poly.coefficients, lin) * params.c ** n
    return out


def field_combination_residual(space: SiteSpace, params: PascalParams, phi: Sequence, F: Polynomial) -> Polynomial:
    """(K+ + K- + (s + 1/s) N)(phi) F - (c eta(phi) - s alpha(phi)) F, real phi."""
    rep = PascalRepresentation(space, params)
    s = params.s
    lhs = rep.raising(phi)(F) + rep.lowering(phi)(F) + rep.number(phi)(F) * (s + 1 / s)
    mult = Polynomial.linear(list(phi)) * params.c - s * space.total_alpha(phi)
    return lhs - F * mult


def linear_combination_residuals(space: SiteSpace, params: PascalParams, phi: Sequence,
                                 F: Polynomial) -> Tuple[Polynomial, Polynomial, Polynomial]:
    """K# minus the stated combinations of the auxiliary k#."""
    rep = PascalRepresentation(space, params)
    aux = AuxOperators(space, params)
    phi = TestFunction(phi)
    phib = phi.conj()
    s, c = params.s, params.c
    km = (aux.raising(phib)(F) * s + aux.lowering(phi)(F) / s - aux.neutral(phib)(F) * 2) / c
    kp = (aux.raising(phi)(F) / s + aux.lowering(phib)(F) * s - aux.neutral(phi)(F) * 2) / c
    k0 = (aux.raising(phi)(F) * -1 - aux.lowering(phib)(F) + aux.neutral(phi)(F) * (s + 1 / s)) / c
    return (rep.lowering(phi)(F) - km, rep.raising(phi)(F) - kp, rep.neutral(phi)(F) - k0)


class CharlierOperators:
    """Poisson CCR pair with intensity lambda = alpha.

    c(f) F = sum_i conj(f_i) (F(n + e_i) - F) lambda_i
    c+(g) F = sum_i g_i n_i F(n - e_i) - F sum_i g_i lambda_i
    """

    def __init__(self, space: SiteSpace):
        self.space = space

    def annihilation(self, f):
        f = TestFunction(f)
        lam = self.space.alpha

        def op(F):
            out = Polynomial.zero(self.space.S)
            for i in f.support():
                out = out + difference(F, i, "+") * (conj(f[i]) * lam[i])
            return out
        return op

    def creation(self, g):
        g = TestFunction(g)

        def op(F):
            out = F * (-self.space.total_alpha(g))
            for i in g.support():
                out = out + F.shift(i, -1).mul_var(i) * g[i]
            return out
        return op

    def inner(self, F, G):
        return poisson_expectation(self.space, F.conjugate() * G)


def charlier_iterates(space: SiteSpace, block: Sequence[int], n: int) -> Polynomial:
    op = CharlierOperators(space).creation(_indicator(space.S, block))
    F = Polynomial.const(space.S, 1)
    for _ in range(n):
        F = op(F)
    return F


def charlier_product(space: SiteSpace, block: Sequence[int], n: int) -> Polynomial:
    lam = sum(space.alpha[i] for i in block)
    poly = monic_family(FamilyParams("charlier", lam=lam), n)[n]
    return Polynomial.univariate_in(poly.coefficients, Polynomial.linear(list(_indicator(space.S, block))))


def neutral_generator_matrix(space: SiteSpace, params: PascalParams, degree_cap: int):
    """Matrix of L = -N(1) = alpha(1)/2 - K0(1) on monomials of degree <= cap.

    L F = (1/(1-p)) sum_i (p (alpha_i + n_i) D+_i F + n_i D-_i F).
    """
    rep = PascalRepresentation(space, params)
    ones = [1] * space.S
    mons = _monomials(space.S, degree_cap)
    pos = {e: k for k, e in enumerate(mons)}
    mat = [[Fraction(0)] * len(mons) for _ in mons]
    for j, e in enumerate(mons):
        image = rep.number(ones)(Polynomial(space.S, {e: 1})) * -1
        for t, c in image.items():
            mat[pos[t]][j] = c
    return mons, mat


def neutral_spectrum_check(space: SiteSpace, params: PascalParams, degree_cap: int) -> List:
    mons, mat = neutral_generator_matrix(space, params, degree_cap)
    return sorted(_triangular_spectrum(mons, mat), reverse=True)


# sampling and simulation

@dataclass(frozen=True)
class PascalSampler:
    space: SiteSpace
    params: PascalParams


def sample_pascal(sampler: PascalSampler, rng: np.random.Generator, size: int) -> np.ndarray:
    """NB(alpha_i, p) counts by Gamma-Poisson mixture, shape (size, S)."""
    alpha = np.array([float(a) for a in sampler.space.alpha])
    p = float(sampler.params.p)
    g = rng.gamma(alpha, 1.0, size=(size, alpha.size))
    return rng.poisson(g * p / (1 - p))


def _rates(x, alpha: float, p: float):
    return birth_death_rates(x, alpha, p)


def simulate_birth_death(alpha: float, p: float, x0: int, T: float,
                         rng: np.random.Generator) -> List[Tuple[float, int]]:
    """Gillespie path of the linear birth-death chain, as (jump time, new state).

    Birth rate p (alpha + x)/(1 - p), death rate x/(1 - p).
    """
    t, x = 0.0, int(x0)
    path = [(0.0, x)]
    while True:
        b, d = _rates(x, alpha, p)
        total = b + d
        t += rng.exponential(1.0 / total)
        if t > T:
            return path
        x += 1 if rng.random() * total < b else -1
        path.append((t, x))


def birth_death_endpoints(alpha: float, p: float, x0: int, T: float, R: int,
                          rng: np.random.Generator) -> np.ndarray:
    """States at time T of R independent chains, simulated in lockstep."""
    x = np.full(R, int(x0), dtype=np.int64)
    t = np.zeros(R)
    active = np.ones(R, dtype=bool)
    while active.any():
        idx = np.flatnonzero(active)
        b, d = _rates(x[idx], alpha, p)
        total = b + d
        t[idx] += rng.exponential(1.0, idx.size) / total
        done = t[idx] > T
        active[idx[done]] = False
        move = idx[~done]
        up = rng.random(move.size) * total[~done] < b[~done]
        x[move] += np.where(up, 1, -1)
    return x


def write_counts_csv(out: IO, seed: int, samples: np.ndarray):
    w = csv.writer(out)
    w.writerow(["seed", "replicate"] + [f"n{i + 1}" for i in range(samples.shape[1])])
    for r, row in enumerate(samples):
        w.writerow([seed, r] + [int(v) for v in row])


def write_trajectory_csv(out: IO, path: Sequence[Tuple[float, int]]):
    w = csv.writer(out)
    w.writerow(["t", "state"])
    for t, x in path:
        w.writerow([repr(float(t)), int(x)])
