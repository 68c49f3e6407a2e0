"""Executable form of the Fock-representation axioms for su(1,1) currents.

A representation here is any object with ``raising(phi)``, ``lowering(phi)``,
``neutral(phi)`` (each returning a map on vectors), ``vacuum()`` and
``inner(f, g)``.  Vectors must support +, -, scalar * and ==, which holds for
:class:`~su11lab.fock.FockVector` and :class:`~su11lab.polynomial.Polynomial`.
With exact scalars every check is an equality test, so a pass means zero
residual.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Sequence

from .exact import GaussianRational, conj
from .fock import FockVector, SiteSpace, TestFunction, k_minus, k_plus, k_zero, occupations, vacuum
from .polynomial import Polynomial

__all__ = [
    "FockRepresentation",
    "AxiomReport",
    "check_axioms",
    "random_gaussian_rational",
    "random_test_function",
    "random_fock_vector",
    "random_polynomial",
]


class FockRepresentation:
    """Extended Fock space operators behind the generic interface."""

    def __init__(self, space: SiteSpace, caps: Sequence[int] | None = None, variant: str = "factor_free"):
        self.space = space
        self.caps = None if caps is None else tuple(caps)
        self.variant = variant

    def _wrap(self, op):
        def apply(f: FockVector) -> FockVector:
            out = op.apply(f)
            if out.truncation_loss:
                raise ArithmeticError("axiom check left the truncation interior")
            return out
        return apply

    def raising(self, phi):
        return self._wrap(k_plus(self.space, phi))

    def lowering(self, phi):
        return self._wrap(k_minus(self.space, phi, self.variant))

    def neutral(self, phi):
        return self._wrap(k_zero(self.space, phi))

    def vacuum(self):
        return vacuum(self.space, self.caps)

    def inner(self, f, g):
        from .fock import inner_product
        return inner_product(f, g)


@dataclass
class AxiomReport:
    checks: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, name: str, ok: bool):
        self.checks += 1
        if not ok:
            self.failures.append(name)

    def merge(self, other: "AxiomReport"):
        self.checks += other.checks
        self.failures.extend(other.failures)


def _comm(a: Callable, b: Callable, v):
    return a(b(v)) - b(a(v))


def check_axioms(rep, phi: Sequence, theta: Sequence, vectors: Sequence, scalars=(2, GaussianRational(1, -3)),
                 report: AxiomReport | None = None) -> AxiomReport:
    """Commutation relations, (anti)linearity, adjointness and vacuum axioms.

    Each relation is tested on every vector in ``vectors``; adjointness on all
    ordered pairs.
    """
    rep_ = report or AxiomReport()
    phi, theta = TestFunction(phi), TestFunction(theta)
    phib = phi.conj()
    Kp, Km, K0 = rep.raising, rep.lowering, rep.neutral
    a, b = scalars
    lin = TestFunction(a * x + b * y for x, y in zip(phi, theta))
    for k, v in enumerate(vectors):
        tag = f"[v{k}]"
        rep_.record("[K-(phi),K+(theta)] = 2K0(conj(phi) theta)" + tag,
                    _comm(Km(phi), Kp(theta), v) == K0(phib * theta)(v) * 2)
        rep_.record("[K0(phi),K+(theta)] = K+(phi theta)" + tag,
                    _comm(K0(phi), Kp(theta), v) == Kp(phi * theta)(v))
        rep_.record("[K0(phi),K-(theta)] = -K-(conj(phi) theta)" + tag,
                    _comm(K0(phi), Km(theta), v) == -Km(phib * theta)(v))
        for name, op in (("+", Kp), ("-", Km), ("0", K0)):
            rep_.record(f"[K{name}(phi),K{name}(theta)] = 0" + tag, _comm(op(phi), op(theta), v) * 1 == v * 0)
        rep_.record("K+ linear" + tag, Kp(lin)(v) == Kp(phi)(v) * a + Kp(theta)(v) * b)
        rep_.record("K0 linear" + tag, K0(lin)(v) == K0(phi)(v) * a + K0(theta)(v) * b)
        rep_.record("K- antilinear" + tag, Km(lin)(v) == Km(phi)(v) * conj(a) + Km(theta)(v) * conj(b))
    for (i, f), (j, g) in itertools.product(enumerate(vectors), repeat=2):
        tag = f"[v{i},v{j}]"
        rep_.record("<f,K0(phi)g> = <K0(conj phi)f,g>" + tag,
                    rep.inner(f, K0(phi)(g)) == rep.inner(K0(phib)(f), g))
        rep_.record("<f,K+(phi)g> = <K-(phi)f,g>" + tag,
                    rep.inner(f, Kp(phi)(g)) == rep.inner(Km(phi)(f), g))
    psi = rep.vacuum()
    rep_.record("<Psi,Psi> = 1", rep.inner(psi, psi) == 1)
    rep_.record("K-(phi) Psi = 0", Km(phi)(psi) == psi * 0)
    alpha_phi = sum(x * y for x, y in zip(phi, rep.space.alpha))
    rep_.record("K0(phi) Psi = alpha(phi)/2 Psi", K0(phi)(psi) == psi * (Fraction(1, 2) * alpha_phi))
    return rep_


# random exact inputs

def random_gaussian_rational(rng: random.Random, num: int = 5, den: int = 4, complex_: bool = True):
    re = Fraction(rng.randint(-num, num), rng.randint(1, den))
    im = Fraction(rng.randint(-num, num), rng.randint(1, den)) if complex_ else 0
    return GaussianRational(re, im)


def random_test_function(rng: random.Random, S: int, complex_: bool = True, sparsity: float = 0.2) -> TestFunction:
    vals = []
    for _ in range(S):
        vals.append(GaussianRational(0) if rng.random() < sparsity else random_gaussian_rational(rng, complex_=complex_))
    return TestFunction(vals)


def random_fock_vector(rng: random.Random, space: SiteSpace, degree: int, caps=None, terms: int = 6) -> FockVector:
    index = [m for m in occupations((degree,) * space.S) if sum(m) <= degree]
    amps: Dict = {}
    for m in rng.sample(index, min(terms, len(index))):
        amps[m] = random_gaussian_rational(rng)
    return FockVector(space, amps, caps=caps)


def random_polynomial(rng: random.Random, S: int, degree: int, terms: int = 6, complex_: bool = True) -> Polynomial:
    index = [m for m in itertools.product(range(degree + 1), repeat=S) if sum(m) <= degree]
    out = {}
    for m in rng.sample(index, min(terms, len(index))):
        out[m] = random_gaussian_rational(rng, complex_=complex_)
    return Polynomial(S, out)
