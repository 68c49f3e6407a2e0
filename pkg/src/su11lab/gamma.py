"""Gamma representation: polynomials in the site masses m_1..m_S.

Under the Gamma random measure the masses are independent Gamma(alpha_i, 1).
On a finite site space every functional in the polynomial domain is an
ordinary polynomial in the masses and the variational derivative at site i is
the partial derivative in m_i.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, List, Sequence, Tuple

import numpy as np
from scipy import special

from .exact import conj, rising
from .fock import SiteSpace, TestFunction
from .orthopoly import FamilyParams, monic_family
from .polynomial import Polynomial

__all__ = [
    "MassPolynomial",
    "variational_derivative",
    "GammaRepresentation",
    "gamma_expectation",
    "ibp_residual",
    "ibp_mc",
    "laguerre_iterates",
    "laguerre_product",
    "field_operator_residual",
    "dw_generator_matrix",
    "dw_spectrum_check",
    "sl2_flow_residual",
    "GammaSampler",
    "sample_gamma",
    "write_samples_csv",
    "check_disjoint",
]

MassPolynomial = Polynomial


def variational_derivative(F: Polynomial, site: int, order: int = 1) -> Polynomial:
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    return F.diff(site, order)


class GammaRepresentation:
    """K+-, K0 acting on polynomials in the site masses."""

    def __init__(self, space: SiteSpace):
        self.space = space

    @property
    def nvars(self) -> int:
        return self.space.S

    def _mu(self, phi) -> Polynomial:
        return Polynomial.linear(list(phi))

    def lowering(self, phi: Sequence):
        """K-(phi) F = sum_i conj(phi_i) (m_i F_ii + alpha_i F_i)."""
        phi = TestFunction(phi)

        def op(F: Polynomial) -> Polynomial:
            out = Polynomial.zero(self.nvars)
            for i in phi.support():
                d1 = F.diff(i)
                out = out + (d1.diff(i).mul_var(i) + d1 * self.space.alpha[i]) * conj(phi[i])
            return out
        return op

    def raising(self, phi: Sequence):
        """K+(phi) F = sum_i phi_i (m_i F_ii + (alpha_i - 2 m_i) F_i) + (mu(phi) - alpha(phi)) F."""
        phi = TestFunction(phi)
        alpha = self.space.alpha

        def op(F: Polynomial) -> Polynomial:
            out = F * self._mu(phi) - F * self.space.total_alpha(phi)
            for i in phi.support():
                d1 = F.diff(i)
                out = out + (d1.diff(i).mul_var(i) + d1 * alpha[i] - d1.mul_var(i) * 2) * phi[i]
            return out
        return op

    def neutral(self, phi: Sequence):
        """K0(phi) F = -sum_i phi_i (m_i F_ii + (alpha_i - m_i) F_i) + alpha(phi)/2 F."""
        phi = TestFunction(phi)
        alpha = self.space.alpha

        def op(F: Polynomial) -> Polynomial:
            out = F * (Fraction(1, 2) * self.space.total_alpha(phi))
            for i in phi.support():
                d1 = F.diff(i)
                out = out - (d1.diff(i).mul_var(i) + d1 * alpha[i] - d1.mul_var(i)) * phi[i]
            return out
        return op

    def vacuum(self) -> Polynomial:
        return Polynomial.const(self.nvars, 1)

    def inner(self, F: Polynomial, G: Polynomial):
        return gamma_expectation(self.space, F.conjugate() * G)


def gamma_expectation(space: SiteSpace, F: Polynomial):
    """E[F] with independent m_i ~ Gamma(alpha_i, 1); E[m^k] = (alpha)_k."""
    total = 0
    for e, c in F.items():
        term = c
        for a, k in zip(space.alpha, e):
            if k:
                term = term * rising(a, k)
        total = total + term
    return total


def ibp_residual(space: SiteSpace, phi: Sequence, F: Polynomial):
    """E[sum_i phi_i m_i dF/dm_i] - E[(mu(phi) - alpha(phi)) F], exactly."""
    lhs = Polynomial.zero(space.S)
    for i, p in enumerate(phi):
        if p:
            lhs = lhs + F.diff(i).mul_var(i) * p
    rhs = F * Polynomial.linear(list(phi)) - F * space.total_alpha(phi)
    return gamma_expectation(space, lhs - rhs)


@dataclass(frozen=True)
class MCResult:
    mean: float
    stderr: float
    R: int


def ibp_mc(space: SiteSpace, phi: Sequence, F: Polynomial, samples: np.ndarray) -> MCResult:
    """MC estimate of the same difference with masses from ``samples``."""
    lhs = Polynomial.zero(space.S)
    for i, p in enumerate(phi):
        if p:
            lhs = lhs + F.diff(i).mul_var(i) * p
    diff = lhs - (F * Polynomial.linear(list(phi)) - F * space.total_alpha(phi))
    vals = np.real_if_close(diff.evaluate_many(samples))
    return MCResult(float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(len(vals))), len(vals))


def check_disjoint(blocks: Sequence[Sequence[int]], S: int):
    seen = set()
    for b in blocks:
        for i in b:
            if not 0 <= i < S:
                raise IndexError(f"site {i} out of range")
            if i in seen:
                raise ValueError("blocks must be disjoint")
            seen.add(i)


def _indicator(S: int, block: Iterable[int]) -> TestFunction:
    b = set(block)
    return TestFunction(1 if i in b else 0 for i in range(S))


def laguerre_iterates(space: SiteSpace, blocks: Sequence[Sequence[int]], ns: Sequence[int]) -> Polynomial:
    """K+(1_{B_1})^{n_1} ... K+(1_{B_l})^{n_l} 1, applied right to left."""
    check_disjoint(blocks, space.S)
    rep = GammaRepresentation(space)
    F = rep.vacuum()
    for block, n in reversed(list(zip(blocks, ns))):
        op = rep.raising(_indicator(space.S, block))
        for _ in range(n):
            F = op(F)
    return F


def laguerre_product(space: SiteSpace, blocks: Sequence[Sequence[int]], ns: Sequence[int]) -> Polynomial:
    """prod_j monic Laguerre_{n_j}^{(alpha(B_j) - 1)}(mu(B_j))."""
    out = Polynomial.const(space.S, 1)
    for block, n in zip(blocks, ns):
        a = sum(space.alpha[i] for i in block)
        poly = monic_family(FamilyParams("laguerre", a), n)[n]
        out = out * Polynomial.univariate_in(poly.coefficients, Polynomial.linear(list(_indicator(space.S, block))))
    return out


def field_operator_residual(space: SiteSpace, phi: Sequence, F: Polynomial) -> Polynomial:
    """(K+ + K- + 2 K0)(phi) F - mu(phi) F for real phi."""
    rep = GammaRepresentation(space)
    lhs = rep.raising(phi)(F) + rep.lowering(phi)(F) + rep.neutral(phi)(F) * 2
    return lhs - F * Polynomial.linear(list(phi))


def _monomials(S: int, degree_cap: int) -> List[Tuple[int, ...]]:
    out = []
    for d in range(degree_cap + 1):
        for e in _compositions(d, S):
            out.append(e)
    return out


def _compositions(d: int, S: int):
    if S == 1:
        yield (d,)
        return
    for k in range(d, -1, -1):
        for rest in _compositions(d - k, S - 1):
            yield (k,) + rest


def dw_generator_matrix(space: SiteSpace, degree_cap: int):
    """Exact matrix of L = -K0(1) + alpha(1)/2 on monomials of degree <= cap.

    L F = sum_i (m_i F_ii + (alpha_i - m_i) F_i).  Column j holds L applied to
    monomial j.  Monomials are graded by total degree.
    """
    rep = GammaRepresentation(space)
    ones = [1] * space.S
    half = Fraction(1, 2) * space.total_alpha(ones)
    mons = _monomials(space.S, degree_cap)
    pos = {e: k for k, e in enumerate(mons)}
    mat = [[Fraction(0)] * len(mons) for _ in mons]
    for j, e in enumerate(mons):
        image = rep.neutral(ones)(Polynomial(space.S, {e: 1})) * -1 + Polynomial(space.S, {e: half})
        for t, c in image.items():
            mat[pos[t]][j] = c
    return mons, mat


def _triangular_spectrum(mons, mat) -> List:
    deg = [sum(e) for e in mons]
    n = len(mons)
    for i in range(n):
        for j in range(n):
            if mat[i][j] and deg[i] > deg[j]:
                raise ArithmeticError("generator raises degree; not triangular")
            if mat[i][j] and deg[i] == deg[j] and i != j:
                raise ArithmeticError("generator mixes monomials of equal degree")
    return [mat[i][i] for i in range(n)]


def dw_spectrum_check(space: SiteSpace, degree_cap: int) -> List:
    """Eigenvalues of the branching generator, read off the triangular matrix."""
    mons, mat = dw_generator_matrix(space, degree_cap)
    return sorted(_triangular_spectrum(mons, mat), reverse=True)


def sl2_flow_residual(space: SiteSpace, phi: Sequence, F: Polynomial) -> Polynomial:
    """2 sum phi_i m_i F_i + (alpha(phi) - mu(phi)) F - (K-(phi) - K+(phi)) F."""
    rep = GammaRepresentation(space)
    lhs = Polynomial.zero(space.S)
    for i, p in enumerate(phi):
        if p:
            lhs = lhs + F.diff(i).mul_var(i) * (2 * p)
    lhs = lhs + F * space.total_alpha(phi) - F * Polynomial.linear(list(phi))
    return lhs - (rep.lowering(phi)(F) - rep.raising(phi)(F))


# samplers

@dataclass(frozen=True)
class GammaSampler:
    space: SiteSpace
    mode: str = "exact"
    eps: float = 1e-4

    def __post_init__(self):
        if self.mode not in ("exact", "compound"):
            raise ValueError("mode must be 'exact' or 'compound'")
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    def neglected_mass(self) -> np.ndarray:
        """Mean mass lost per site by dropping jumps below eps."""
        return np.array([float(a) for a in self.space.alpha]) * -math.expm1(-self.eps)


def _jump_sizes(rng: np.random.Generator, n: int, eps: float) -> np.ndarray:
    """Draws from z^-1 e^-z on (eps, inf), normalized.

    Mixture of (eps, 1] (log-uniform proposal, accept w.p. e^-z) and (1, inf)
    (shifted exponential proposal, accept w.p. 1/z).
    """
    if n == 0:
        return np.empty(0)
    w_low = special.exp1(eps) - special.exp1(1.0)
    w_high = special.exp1(1.0)
    n_low = rng.binomial(n, w_low / (w_low + w_high))
    out = []
    need = n_low
    while need > 0:
        z = eps ** rng.random(2 * need + 8)
        z = z[rng.random(z.size) < np.exp(-z)]
        out.append(z[:need])
        need -= min(need, z.size)
    need = n - n_low
    while need > 0:
        z = 1.0 + rng.exponential(size=2 * need + 8)
        z = z[rng.random(z.size) < 1.0 / z]
        out.append(z[:need])
        need -= min(need, z.size)
    return np.concatenate(out) if out else np.empty(0)


def sample_gamma(sampler: GammaSampler, rng: np.random.Generator, size: int) -> np.ndarray:
    """Array of shape (size, S) of site masses."""
    alpha = np.array([float(a) for a in sampler.space.alpha])
    if sampler.mode == "exact":
        return rng.gamma(alpha, 1.0, size=(size, alpha.size))
    rate = alpha * special.exp1(sampler.eps)
    counts = rng.poisson(rate, size=(size, alpha.size))
    jumps = _jump_sizes(rng, int(counts.sum()), sampler.eps)
    rng.shuffle(jumps)
    owner = np.repeat(np.arange(counts.size), counts.reshape(-1))
    totals = np.bincount(owner, weights=jumps, minlength=counts.size)
    return totals.reshape(size, alpha.size)


def write_samples_csv(out: IO, seed: int, samples: np.ndarray):
    w = csv.writer(out)
    w.writerow(["seed", "replicate"] + [f"m{i + 1}" for i in range(samples.shape[1])])
    for r, row in enumerate(samples):
        w.writerow([seed, r] + [repr(float(v)) for v in row])
