"""Monic Laguerre, Meixner and Charlier polynomials with exact coefficients.

Conventions (all weights are probability measures):

* Laguerre(alpha): weight x^(alpha-1) e^(-x) / Gamma(alpha) on (0, inf);
  the monic family is n! (-1)^n L_n^(alpha-1).
* Meixner(alpha, p = s^2): weight (1-p)^alpha p^x (alpha)_x / x! on N_0.
* Charlier(lambda): weight e^(-lambda) lambda^x / x! on N_0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

import mpmath

from .exact import rising

__all__ = [
    "MonicPolynomial",
    "FamilyParams",
    "recurrence_coefficients",
    "monic_family",
    "hypergeometric_monic",
    "squared_norm",
    "orthogonality_oracle",
    "OrthogonalityResult",
    "generating_function_check",
    "GeneratingCheck",
    "measure_mean",
]

FAMILIES = ("laguerre", "meixner", "charlier")


@dataclass(frozen=True)
class MonicPolynomial:
    """Polynomial with exact coefficients, lowest degree first."""

    coefficients: tuple

    def __post_init__(self):
        c = list(self.coefficients)
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coefficients", tuple(c))
        if self.coefficients[-1] != 1:
            raise ValueError("leading coefficient must be exactly 1")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        out = 0
        for c in reversed(self.coefficients):
            out = out * x + c
        return out

    def scaled(self, factor) -> List:
        return [factor * c for c in self.coefficients]


@dataclass(frozen=True)
class FamilyParams:
    family: str
    alpha: Fraction = Fraction(1)
    s: Optional[Fraction] = None
    lam: Optional[Fraction] = None

    def __post_init__(self):
        fam = self.family.lower()
        object.__setattr__(self, "family", fam)
        if fam not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        if fam in ("laguerre", "meixner") and self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if fam == "meixner":
            if self.s is None:
                raise ValueError("Meixner needs s")
            object.__setattr__(self, "s", Fraction(self.s))
            if not 0 < self.s < 1:
                raise ValueError("s must lie in (0, 1)")
        if fam == "charlier":
            if self.lam is None:
                raise ValueError("Charlier needs lam")
            object.__setattr__(self, "lam", Fraction(self.lam))
            if self.lam <= 0:
                raise ValueError("lambda must be positive")

    @property
    def p(self) -> Fraction:
        return self.s * self.s


def recurrence_coefficients(params: FamilyParams, n: int):
    """(b_n, a_n) with x p_n = p_{n+1} + b_n p_n + a_n p_{n-1}."""
    a = params.alpha
    if params.family == "laguerre":
        return 2 * n + a, n * (n + a - 1)
    if params.family == "meixner":
        p = params.p
        return (n + (n + a) * p) / (1 - p), n * (n + a - 1) * p / (1 - p) ** 2
    lam = params.lam
    return n + lam, n * lam


def monic_family(params: FamilyParams, n_max: int) -> List[MonicPolynomial]:
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    prev: List = []
    cur: List = [Fraction(1)]
    out = [MonicPolynomial(tuple(cur))]
    for n in range(n_max):
        b, a = recurrence_coefficients(params, n)
        nxt = [Fraction(0)] + cur
        for k, c in enumerate(cur):
            nxt[k] -= b * c
        for k, c in enumerate(prev):
            nxt[k] -= a * c
        prev, cur = cur, nxt
        out.append(MonicPolynomial(tuple(cur)))
    return out


def _poly_mul_linear(c: List, root) -> List:
    # c(x) * (x - root)
    out = [Fraction(0)] * (len(c) + 1)
    for k, v in enumerate(c):
        out[k + 1] += v
        out[k] -= root * v
    return out


def hypergeometric_monic(params: FamilyParams, n: int) -> MonicPolynomial:
    """Monic polynomial from the terminating hypergeometric series.

    Independent of the recurrence: Laguerre via 1F1(-n; alpha; x), Meixner via
    2F1(-n, -x; alpha; 1 - 1/p), Charlier via 2F0(-n, -x; ; -1/lambda).
    """
    a = params.alpha
    total = [Fraction(0)] * (n + 1)
    if params.family == "laguerre":
        # L_n^(a-1)(x) = (a)_n/n! sum_j (-n)_j x^j / ((a)_j j!)
        pref = Fraction(rising(a, n), math.factorial(n))
        for j in range(n + 1):
            total[j] += pref * rising(-n, j) / (rising(a, j) * math.factorial(j))
        lead = Fraction((-1) ** n, math.factorial(n))
    else:
        if params.family == "meixner":
            z = 1 - 1 / params.p
            den = lambda j: rising(a, j) * math.factorial(j)  # noqa: E731
        else:
            z = -1 / params.lam
            den = lambda j: math.factorial(j)  # noqa: E731
        falling_x = [Fraction(1)]  # (-x)_j as polynomial in x
        for j in range(n + 1):
            coef = rising(-n, j) * z ** j / den(j)
            for k, v in enumerate(falling_x):
                total[k] += coef * v
            # (-x)_{j+1} = (-x)_j (-x + j) = -(x - j) (-x)_j
            falling_x = [-v for v in _poly_mul_linear(falling_x, j)]
        lead = total[n]
    return MonicPolynomial(tuple(c / lead for c in total))


def squared_norm(params: FamilyParams, n: int) -> Fraction:
    a = params.alpha
    nf = math.factorial(n)
    if params.family == "laguerre":
        return nf * rising(a, n)
    if params.family == "meixner":
        p = params.p
        return nf * rising(a, n) * p ** n / (1 - p) ** (2 * n)
    return nf * params.lam ** n


def measure_mean(params: FamilyParams) -> Fraction:
    if params.family == "laguerre":
        return params.alpha
    if params.family == "meixner":
        return params.alpha * params.p / (1 - params.p)
    return params.lam


@dataclass(frozen=True)
class OrthogonalityResult:
    value: float
    error_estimate: float
    cutoff: float


def _mp(x):
    return mpmath.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else mpmath.mpf(x)


def _abs_poly(coeffs: Sequence) -> List:
    return [abs(_mp(c)) for c in coeffs]


def _product_coeffs(p: MonicPolynomial, q: MonicPolynomial) -> List:
    out = [Fraction(0)] * (p.degree + q.degree + 1)
    for i, a in enumerate(p.coefficients):
        for j, b in enumerate(q.coefficients):
            out[i + j] += a * b
    return out


def orthogonality_oracle(
    params: FamilyParams,
    p_m: MonicPolynomial,
    p_n: MonicPolynomial,
    tail_tol: float = 1e-14,
    dps: int = 40,
) -> OrthogonalityResult:
    """<p_m, p_n> under the family's probability weight.

    Laguerre uses tanh-sinh quadrature on [0, X] in ``dps`` digits, with the tail
    beyond X bounded through upper incomplete Gamma functions.  The discrete
    families are summed up to X with a ratio-test bound on the remainder.
    """
    prod = _product_coeffs(p_m, p_n)
    absc = _abs_poly(prod)
    deg = len(prod) - 1
    with mpmath.workdps(dps):
        a = _mp(params.alpha)
        if params.family == "laguerre":
            x_cut = max(50.0, 20.0 * float(params.alpha))
            while True:
                tail = mpmath.fsum(c * mpmath.gammainc(a + k, x_cut, mpmath.inf, regularized=True) * mpmath.rf(a, k)
                                   for k, c in enumerate(absc))
                if tail < tail_tol:
                    break
                x_cut *= 1.25
            coeffs = [_mp(c) for c in prod][::-1]
            logg = mpmath.loggamma(a)

            def integrand(x):
                if x == 0:
                    return mpmath.mpf(0)
                return mpmath.polyval(coeffs, x) * mpmath.exp((a - 1) * mpmath.log(x) - x - logg)

            pts = sorted(set(x for x in (0, 1, 4, 10, 25, 50, 100, 200, 400, x_cut) if x <= x_cut))
            val, err = mpmath.quad(integrand, pts, error=True)
            if err > 1e-12:
                raise ArithmeticError(f"quadrature did not converge; error estimate {float(err)}")
            return OrthogonalityResult(float(val), float(err + tail), x_cut)
        if params.family == "meixner":
            p = _mp(params.p)
            logw0 = a * mpmath.log(1 - p)

            def ratio(x):
                return p * (a + x) / (x + 1)
        else:
            lam = _mp(params.lam)
            logw0 = -lam

            def ratio(x):
                return lam / (x + 1)

        coeffs = [_mp(c) for c in prod]
        w = mpmath.exp(logw0)
        total = mpmath.mpf(0)
        x = 0
        while True:
            total += w * mpmath.polyval(coeffs[::-1], x)
            w *= ratio(x)
            x += 1
            if x > 2 * deg + 10:
                rho = ratio(x) * (mpmath.mpf(x + 1) / x) ** deg
                if rho < 0.9:
                    bound = w * mpmath.polyval(absc[::-1], x) / (1 - rho)
                    if bound < tail_tol:
                        return OrthogonalityResult(float(total), float(bound), float(x))


@dataclass(frozen=True)
class GeneratingCheck:
    residual: float
    tail_bound: float
    diverges: bool
    terms: int


def _standard_factor(params: FamilyParams, n: int) -> Fraction:
    """Factor turning monic p_n into the generating-function normalization."""
    a = params.alpha
    if params.family == "laguerre":
        return Fraction((-1) ** n, math.factorial(n))
    if params.family == "meixner":
        # M_n = monic (1 - 1/p)^n / (alpha)_n, weighted by (alpha)_n / n!
        return (1 - 1 / params.p) ** n / math.factorial(n)
    # C_n = (-1/lambda)^n monic, weighted by 1/n!
    return (-1 / params.lam) ** n / math.factorial(n)


def _closed_form(params: FamilyParams, t, x):
    a = _mp(params.alpha)
    if params.family == "laguerre":
        return (1 - t) ** (-a) * mpmath.exp(x * t / (t - 1))
    if params.family == "meixner":
        p = _mp(params.p)
        return (1 - t / p) ** x * (1 - t) ** (-a - x)
    lam = _mp(params.lam)
    return mpmath.exp(t) * (1 - t / lam) ** x


def _radius(params: FamilyParams) -> float:
    if params.family == "laguerre":
        return 1.0
    if params.family == "meixner":
        return float(params.p)
    return math.inf


def _tail_bound(params: FamilyParams, terms, t, x, n_terms: int):
    """Bound on sum_{n > N} of the generating-series terms.

    Laguerre uses |L_n^(b)(x)| <= (b+1)_n/n! e^(x/2) for b >= 0 and
    (2 - (b+1)_n/n!) e^(x/2) for -1 < b < 0 (x >= 0).  The discrete families
    use a geometric envelope C r^k fitted over the last ten terms.
    """
    big = mpmath.mpf(10) ** -25
    at = abs(t)
    if params.family == "laguerre" and x >= 0:
        a = _mp(params.alpha)
        n0 = n_terms + 1
        if a >= 1:
            c0 = mpmath.rf(a, n0) / mpmath.factorial(n0)
            r = at * max(mpmath.mpf(1), (a + n0) / (n0 + 1))
        else:
            c0 = mpmath.mpf(2)
            r = at
        if r >= 1:
            return mpmath.inf
        return mpmath.exp(x / 2) * c0 * at ** n0 / (1 - r) + big
    window = [abs(v) for v in terms[-11:]]
    base = window[0]
    if base == 0:
        base = max(window)
        if base == 0:
            return big
    r = max((window[k] / base) ** (mpmath.mpf(1) / k) for k in range(1, 11))
    if r >= 1:
        return mpmath.inf
    return base * r ** 11 / (1 - r) + big


def generating_function_check(
    params: FamilyParams, t: float, x_grid: Sequence[float], n_terms: int = 40
) -> GeneratingCheck:
    """Truncated series vs closed form of the family's generating function.

    The tail bound assumes geometric domination from the last ten terms.  If
    |t| reaches the radius of convergence or the terms stop shrinking the
    result is flagged as divergent.
    """
    if abs(t) >= _radius(params):
        return GeneratingCheck(math.inf, math.inf, True, 0)
    fam = monic_family(params, n_terms)
    factors = [_standard_factor(params, n) for n in range(n_terms + 1)]
    worst, worst_bound, diverges = 0.0, 0.0, False
    with mpmath.workdps(30):
        tm = mpmath.mpf(t)
        for x in x_grid:
            xm = mpmath.mpf(x)
            xq = Fraction(x)
            terms = [_mp(factors[n] * fam[n](xq)) * tm ** n for n in range(n_terms + 1)]
            series = mpmath.fsum(terms)
            bound = _tail_bound(params, terms, tm, xm, n_terms)
            if not mpmath.isfinite(bound):
                diverges = True
            res = abs(series - _closed_form(params, tm, xm))
            worst = max(worst, float(res))
            worst_bound = max(worst_bound, float(bound))
    return GeneratingCheck(worst, worst_bound, diverges, n_terms + 1)
