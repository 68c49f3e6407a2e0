"""Univariate su(1,1): weighted sequences, Laguerre and Meixner polynomials.

Three realizations of the discrete-series representation with k0 e_0 = (alpha/2) e_0:

* weighted l2(N_0, w_alpha), w_alpha(n) = (alpha)_n / n!, as exact banded matrices;
* differential operators on polynomials (Laguerre, Gamma(alpha) reference law);
* difference operators on polynomials (Meixner, NB(alpha, p) reference law, p = s^2).

Also here: the harmonic oscillator and its vacuum-moment dictionary, the Markov
generators hidden inside the neutral and lowering operators, the symmetric
inclusion process generator and a CIR Euler-Maruyama cross-check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sps
from scipy.linalg import expm

from .exact import rising, stirling2
from .orthopoly import FamilyParams, monic_family
from .polynomial import Polynomial

__all__ = [
    "WeightedSeqRep",
    "build_weighted_rep",
    "LaguerreRep",
    "MeixnerRep",
    "build_laguerre_rep",
    "build_meixner_rep",
    "intertwine_residuals",
    "casimir_failures",
    "OscillatorRep",
    "build_oscillator",
    "VacuumMoments",
    "vacuum_moment_dictionary",
    "birth_death_rates",
    "GeneratorResult",
    "markov_generator_extract",
    "SIPGenerator",
    "assemble_sip_generator",
    "cir_euler_maruyama",
    "cir_exact_moment",
]


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _zeros(n: int) -> np.ndarray:
    out = np.empty((n, n), dtype=object)
    out[...] = Fraction(0)
    return out


def _matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.dot(A, B)


# ---------------------------------------------------------------- weighted l2

@dataclass
class WeightedSeqRep:
    """k+, k-, k0 on span(e_0..e_nmax), column j = image of e_j."""

    alpha: Fraction
    n_max: int
    kplus: np.ndarray
    kminus: np.ndarray
    kzero: np.ndarray

    @property
    def weights(self) -> List[Fraction]:
        return [rising(self.alpha, n) / math.factorial(n) for n in range(self.n_max + 1)]

    def commutator_residuals(self) -> Dict[str, Fraction]:
        """Max |entry| of each relation restricted to columns 0..n_max-1."""
        kp, km, k0 = self.kplus, self.kminus, self.kzero
        rels = {
            "[k-,k+]-2k0": _matmul(km, kp) - _matmul(kp, km) - 2 * k0,
            "[k0,k+]-k+": _matmul(k0, kp) - _matmul(kp, k0) - kp,
            "[k0,k-]+k-": _matmul(k0, km) - _matmul(km, k0) + km,
        }
        return {k: max(abs(v) for v in M[:, : self.n_max].ravel()) for k, M in rels.items()}

    def casimir(self) -> np.ndarray:
        k0, kp, km = self.kzero, self.kplus, self.kminus
        return _matmul(k0, k0) - (_matmul(kp, km) + _matmul(km, kp)) / 2

    def casimir_value(self) -> Fraction:
        """m0 (m0 - 1) with m0 = alpha/2, forced by k0 e_0 = m0 e_0 and k- e_0 = 0."""
        m0 = self.alpha / 2
        return m0 * (m0 - 1)

    def casimir_residual(self) -> Fraction:
        C = self.casimir()[: self.n_max, : self.n_max]
        target = self.casimir_value()
        return max(abs(C[i, j] - (target if i == j else 0)) for i in range(self.n_max) for j in range(self.n_max))

    def adjoint_residual(self) -> Fraction:
        """max |<e_i, k+ e_j> - <k- e_i, e_j>| in the w_alpha inner product."""
        w = self.weights
        n = self.n_max + 1
        return max(abs(w[i] * self.kplus[i, j] - self.kminus[j, i] * w[j]) for i in range(n) for j in range(n))


def build_weighted_rep(alpha, n_max: int) -> WeightedSeqRep:
    alpha = _frac(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    n = n_max + 1
    kp, km, k0 = _zeros(n), _zeros(n), _zeros(n)
    for j in range(n):
        if j + 1 < n:
            kp[j + 1, j] = Fraction(j + 1)
        if j >= 1:
            km[j - 1, j] = alpha + j - 1
        k0[j, j] = j + alpha / 2
    return WeightedSeqRep(alpha, n_max, kp, km, k0)


# ------------------------------------------------------- polynomial pictures

def _x() -> Polynomial:
    return Polynomial.var(1, 0)


def _as_poly(coeffs: Sequence) -> Polynomial:
    return Polynomial(1, {(k,): c for k, c in enumerate(coeffs)})


class LaguerreRep:
    """Differential operators on polynomials in x; vacuum the constant 1.

    K+ = -x d^2 + (2x - alpha) d + (alpha - x)
    K- = -x d^2 - alpha d
    K0 = alpha/2 - (x d^2 + (alpha - x) d)
    """

    family = "laguerre"

    def __init__(self, alpha):
        self.alpha = _frac(alpha)
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    def raising(self, f: Polynomial) -> Polynomial:
        x, a = _x(), self.alpha
        return -(x * f.diff(0, 2)) + (2 * x - a) * f.diff(0) + (a - x) * f

    def lowering(self, f: Polynomial) -> Polynomial:
        return -(_x() * f.diff(0, 2)) - self.alpha * f.diff(0)

    def neutral(self, f: Polynomial) -> Polynomial:
        x, a = _x(), self.alpha
        return (a / 2) * f - (x * f.diff(0, 2) + (a - x) * f.diff(0))

    def basis(self, n: int) -> Polynomial:
        """Image of e_n: the hypergeometric L_n^(alpha-1) = (-1)^n / n! times monic."""
        monic = monic_family(FamilyParams("laguerre", self.alpha), n)[n]
        return _as_poly(monic.scaled(Fraction((-1) ** n, math.factorial(n))))


class MeixnerRep:
    """Difference operators on polynomials in x, p = s^2.

    K+ f = -(s/(1-p)) (p(alpha+x) f(x+1) + x f(x-1)/p - (alpha+2x) f(x))
    K- f = -(s/(1-p)) ((alpha+x) D+ f + x D- f)
    K0 f = alpha/2 f - (1/(1-p)) (p(alpha+x) D+ f + x D- f)
    """

    family = "meixner"

    def __init__(self, alpha, s):
        self.alpha, self.s = _frac(alpha), _frac(s)
        if self.alpha <= 0 or not 0 < self.s < 1:
            raise ValueError("need alpha > 0 and 0 < s < 1")
        self.p = self.s ** 2

    def _dplus(self, f):
        return f.shift(0, 1) - f

    def _dminus(self, f):
        return f.shift(0, -1) - f

    def raising(self, f: Polynomial) -> Polynomial:
        x, a, p = _x(), self.alpha, self.p
        inner = p * (a + x) * f.shift(0, 1) + (x * f.shift(0, -1)) / p - (a + 2 * x) * f
        return -(self.s / (1 - p)) * inner

    def lowering(self, f: Polynomial) -> Polynomial:
        x, a = _x(), self.alpha
        return -(self.s / (1 - self.p)) * ((a + x) * self._dplus(f) + x * self._dminus(f))

    def neutral(self, f: Polynomial) -> Polynomial:
        x, a, p = _x(), self.alpha, self.p
        return (a / 2) * f - (p * (a + x) * self._dplus(f) + x * self._dminus(f)) / (1 - p)

    def basis(self, n: int) -> Polynomial:
        """Image of e_n: (s - 1/s)^n / n! times the monic Meixner polynomial."""
        fam = FamilyParams("meixner", self.alpha, s=self.s)
        monic = monic_family(fam, n)[n]
        return _as_poly(monic.scaled((self.s - 1 / self.s) ** n / math.factorial(n)))


def build_laguerre_rep(alpha) -> LaguerreRep:
    return LaguerreRep(alpha)


def build_meixner_rep(alpha, s) -> MeixnerRep:
    return MeixnerRep(alpha, s)


def intertwine_residuals(rep, n_max: int) -> Dict[str, int]:
    """Count of basis vectors e_n (n <= n_max - 1) with U k# e_n != K# U e_n."""
    a = rep.alpha
    basis = [rep.basis(n) for n in range(n_max + 1)]
    bad = {"raising": 0, "lowering": 0, "neutral": 0}
    for n in range(n_max):
        if rep.raising(basis[n]) != (n + 1) * basis[n + 1]:
            bad["raising"] += 1
        low = (a + n - 1) * basis[n - 1] if n else Polynomial.zero(1)
        if rep.lowering(basis[n]) != low:
            bad["lowering"] += 1
        if rep.neutral(basis[n]) != (n + a / 2) * basis[n]:
            bad["neutral"] += 1
    return bad


def casimir_failures(rep, n_max: int) -> int:
    """Number of monomials x^n (n <= n_max) with C x^n != m0 (m0 - 1) x^n."""
    m0 = rep.alpha / 2
    bad = 0
    for n in range(n_max + 1):
        f = Polynomial(1, {(n,): Fraction(1)})
        k0f = rep.neutral(f)
        C = rep.neutral(k0f) - (rep.raising(rep.lowering(f)) + rep.lowering(rep.raising(f))) / 2
        bad += C != m0 * (m0 - 1) * f
    return bad


# ---------------------------------------------------------------- oscillator

@dataclass
class OscillatorRep:
    """a, a-dagger on span(e_0..e_nmax) with weights w(n) = n!.

    a+ e_n = e_{n+1}, a e_n = n e_{n-1}; [a, a+] = Id on columns < n_max.
    """

    n_max: int
    a: np.ndarray
    adag: np.ndarray

    @property
    def number(self) -> np.ndarray:
        return _matmul(self.adag, self.a)

    def ccr_residual(self) -> Fraction:
        C = _matmul(self.a, self.adag) - _matmul(self.adag, self.a)
        n = self.n_max
        return max(abs(C[i, j] - (1 if i == j else 0)) for i in range(n + 1) for j in range(n))

    def vacuum_moment(self, X: np.ndarray, k: int) -> Fraction:
        v = np.array([Fraction(1)] + [Fraction(0)] * self.n_max, dtype=object)
        for _ in range(k):
            v = np.dot(X, v)
        return v[0]


def build_oscillator(n_max: int) -> OscillatorRep:
    n = n_max + 1
    a, ad = _zeros(n), _zeros(n)
    for j in range(n):
        if j + 1 < n:
            ad[j + 1, j] = Fraction(1)
        if j >= 1:
            a[j - 1, j] = Fraction(j)
    return OscillatorRep(n_max, a, ad)


def _moments_from_factorial(fact: Sequence, k_max: int) -> List:
    """Raw moments E[N^k] from factorial moments via Stirling numbers."""
    return [sum(stirling2(k, j) * fact[j] for j in range(k + 1)) for k in range(k_max + 1)]


def _central(raw: Sequence, mean) -> List:
    out = []
    for k in range(len(raw)):
        out.append(sum(math.comb(k, j) * raw[j] * (-mean) ** (k - j) for j in range(k + 1)))
    return out


def _exact_sqrt(q: Fraction) -> Optional[Fraction]:
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


@dataclass
class VacuumMoments:
    case: str
    rows: List[Tuple[int, object, object]]
    constants: Dict[str, object] = field(default_factory=dict)

    def __iter__(self):
        return iter(self.rows)

    def max_relative_error(self) -> float:
        worst = 0.0
        for _, lhs, rhs in self.rows:
            err = abs(float(lhs) - float(rhs)) if not isinstance(lhs, Fraction) or not isinstance(rhs, Fraction) \
                else float(abs(lhs - rhs))
            worst = max(worst, err / max(abs(float(rhs)), 1e-300) if rhs != 0 else err)
        return worst


def vacuum_moment_dictionary(case: str, beta_or_c=None, k_max: int = 8, n_max: Optional[int] = None) -> VacuumMoments:
    """Vacuum moments <e_0, X^k e_0> of oscillator fields against named laws.

    gauss:   X = a + a+                    vs N(0, 1)
    poisson: X = a + a+ + c a+ a           vs c (N - lam), N ~ Poisson(lam = 1/c^2)
    gamma:   X = (a + a+)^2 / 2            vs Gamma(1/2, 1)
    pascal:  X = a^2 + a+^2 + beta a+ a    vs c1 N + c2, N ~ NB(1/2, p), sqrt p + 1/sqrt p = |beta|

    X^k e_0 returns to e_0 only through degrees <= k (quadratic X) or k/2
    (linear X), so n_max >= k makes the truncated moments exact.
    """
    if n_max is None:
        n_max = k_max + 2
    if n_max < k_max:
        raise ValueError(f"n_max={n_max} too small for moments up to order {k_max}")
    osc = build_oscillator(n_max)
    a, ad, num = osc.a, osc.adag, osc.number
    consts: Dict[str, object] = {}
    if case == "gauss":
        X = a + ad
        rhs = [Fraction(0) if k % 2 else Fraction(math.prod(range(k - 1, 0, -2))) for k in range(k_max + 1)]
    elif case == "poisson":
        c = _frac(beta_or_c if beta_or_c is not None else 1)
        if c == 0:
            raise ValueError("c must be nonzero")
        lam = 1 / c ** 2
        X = a + ad + c * num
        raw = _moments_from_factorial([lam ** j for j in range(k_max + 1)], k_max)
        rhs = [m * c ** k for k, m in enumerate(_central(raw, lam))]
        consts["lambda"] = lam
    elif case == "gamma":
        X = _matmul(a + ad, a + ad) / 2
        rhs = [rising(Fraction(1, 2), k) for k in range(k_max + 1)]
    elif case == "pascal":
        beta = _frac(beta_or_c if beta_or_c is not None else Fraction(5, 2))
        if abs(beta) <= 2:
            raise ValueError("pascal case needs |beta| > 2")
        X = _matmul(a, a) + _matmul(ad, ad) + beta * num
        root = _exact_sqrt(beta ** 2 - 4)
        s = (abs(beta) - root) / 2 if root is not None else (abs(float(beta)) - math.sqrt(float(beta) ** 2 - 4)) / 2
        p = s * s
        alpha = Fraction(1, 2)
        r = p / (1 - p)
        raw = _moments_from_factorial([rising(alpha, j) * r ** j for j in range(k_max + 1)], k_max)
        mean, var = raw[1], raw[2] - raw[1] ** 2
        central = _central(raw, mean)
        m1, m2, m3 = (osc.vacuum_moment(X, k) for k in (1, 2, 3))
        q = (m2 - m1 ** 2) / var
        c1 = _exact_sqrt(q) if isinstance(q, Fraction) else None
        c1 = c1 if c1 is not None else math.sqrt(float(q))
        # the sign of c1 is fixed by the third central moment
        if (m3 - 3 * m1 * m2 + 2 * m1 ** 3) * central[3] < 0:
            c1 = -c1
        c2 = m1 - c1 * mean
        # E[(c1 N + c2)^k] = sum_j C(k,j) c1^j E[(N - mean)^j] (c1 mean + c2)^(k-j)
        shift = c1 * mean + c2
        rhs = [sum(math.comb(k, j) * c1 ** j * central[j] * shift ** (k - j) for j in range(k + 1)) for k in range(k_max + 1)]
        consts.update({"p": p, "alpha": alpha, "c1": c1, "c2": c2})
    else:
        raise ValueError(f"unknown case {case!r}")
    rows = [(k, osc.vacuum_moment(X, k), rhs[k]) for k in range(k_max + 1)]
    return VacuumMoments(case, rows, consts)


# ----------------------------------------------------------- Markov pieces

def birth_death_rates(x, alpha, p):
    """Rates of L = (1/(1-p)) (p(alpha+x) D+ + x D-): birth p(alpha+x)/(1-p), death x/(1-p)."""
    return p * (alpha + x) / (1 - p), x / (1 - p)


def _poly_matrix(op, n_max: int) -> np.ndarray:
    """Column j = coefficients of op(x^j) in the monomial basis."""
    M = _zeros(n_max + 1)
    for j in range(n_max + 1):
        img = op(Polynomial(1, {(j,): Fraction(1)}))
        if img.degree() > n_max:
            raise ValueError("operator raises degree")
        for (k,), c in img.items():
            M[k, j] = c
    return M


@dataclass
class GeneratorResult:
    which: str
    poly_matrix: np.ndarray
    state_matrix: Optional[np.ndarray]
    diagnostics: Dict[str, object]


def _is_upper_triangular(M: np.ndarray) -> bool:
    n = M.shape[0]
    return all(M[i, j] == 0 for i in range(n) for j in range(i))


def markov_generator_extract(rep, which: str, n_max: int = 8, n_states: int = 40) -> GeneratorResult:
    """Markov generators inside a polynomial representation.

    laguerre_semigroup: alpha/2 - K0 = x d^2 + (alpha - x) d  (CIR / Laguerre diffusion)
    squared_bessel:     -K-        = x d^2 + alpha d
    bd_neutral:         alpha/2 - K0 of the Meixner picture, a birth-death chain
                        reversible for NB(alpha, p)
    bd_lowering:        -K- of the Meixner picture, rates s(alpha + x)/(1-p), s x/(1-p)
    """
    a = rep.alpha
    if which in ("laguerre_semigroup", "squared_bessel") and not isinstance(rep, LaguerreRep):
        raise ValueError(f"{which} needs the Laguerre representation")
    if which in ("bd_neutral", "bd_lowering") and not isinstance(rep, MeixnerRep):
        raise ValueError(f"{which} needs the Meixner representation")
    if which in ("laguerre_semigroup", "bd_neutral"):
        op = lambda f: (a / 2) * f - rep.neutral(f)
    elif which in ("squared_bessel", "bd_lowering"):
        op = lambda f: -rep.lowering(f)
    else:
        raise ValueError(f"unknown generator {which!r}")
    P = _poly_matrix(op, n_max)
    diag = {
        "conservative": all(v == 0 for v in P[:, 0]),
        "triangular": _is_upper_triangular(P),
        "spectrum": sorted((P[i, i] for i in range(n_max + 1)), reverse=True),
    }
    state = None
    if which == "laguerre_semigroup":
        # symmetry under Gamma(alpha): E[x^i L x^j] = E[x^j L x^i]
        mom = [rising(a, k) for k in range(2 * n_max + 2)]
        def pair(i, j):
            return sum(P[k, j] * mom[i + k] for k in range(n_max + 1))
        diag["reversible"] = all(pair(i, j) == pair(j, i) for i in range(n_max + 1) for j in range(n_max + 1))
    elif which.startswith("bd"):
        p, s = rep.p, rep.s
        if which == "bd_neutral":
            rates = lambda x: birth_death_rates(x, a, p)
            pi_ratio = lambda x: p * (a + x) / (x + 1)
        else:
            rates = lambda x: (s * (a + x) / (1 - p), s * x / (1 - p))
            pi_ratio = lambda x: (a + x) / (x + 1)
        state = _zeros(n_states + 1)
        for x in range(n_states + 1):
            b, d = rates(Fraction(x))
            if x + 1 <= n_states:
                state[x, x + 1] = b
            if x >= 1:
                state[x, x - 1] = d
            state[x, x] = -(b + d)
        interior = range(n_states)
        diag["markov"] = all(state[i, j] >= 0 for i in range(n_states + 1) for j in range(n_states + 1) if i != j) \
            and all(sum(state[i, :]) == 0 for i in interior)
        # pi(x) b(x) = pi(x+1) d(x+1) with pi(x+1)/pi(x) the NB (or sigma-finite) ratio
        pi = [Fraction(1)]
        for x in range(n_states):
            pi.append(pi[-1] * pi_ratio(x))
        diag["detailed_balance"] = all(pi[x] * rates(Fraction(x))[0] == pi[x + 1] * rates(Fraction(x + 1))[1]
                                       for x in range(n_states))
        diag["reference_measure"] = "NB(alpha, p)" if which == "bd_neutral" else "(alpha)_x / x!"
    return GeneratorResult(which, P, state, diag)


# ---------------------------------------------------------------------- SIP

@dataclass
class SIPGenerator:
    matrix: sps.csr_matrix
    states: List[Tuple[int, ...]]
    cap: int
    edges: List[Tuple[int, int]]

    def interior(self) -> np.ndarray:
        """States from which no hop leaves the box."""
        busy = sorted({i for e in self.edges for i in e})
        return np.array([all(n[i] < self.cap for i in busy) for n in self.states], dtype=bool)

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def is_markov_on_interior(self, tol: float = 1e-12) -> bool:
        M = self.matrix.tocoo()
        off = M.row != M.col
        if np.any(M.data[off] < -tol):
            return False
        return bool(np.all(np.abs(self.row_sums()[self.interior()]) <= tol))

    def rate(self, src: Sequence[int], dst: Sequence[int]) -> float:
        idx = {s: k for k, s in enumerate(self.states)}
        return float(self.matrix[idx[tuple(src)], idx[tuple(dst)]])


def assemble_sip_generator(num_sites: int, edges: Sequence[Tuple[int, int]], cap: int = 6) -> SIPGenerator:
    """sum over edges of k_i+ k_j- + k_j+ k_i- - 2 k_i0 k_j0 + 1/8 with alpha = 1/2 sites.

    Site operators act on functions of n: k+ f(n) = n f(n-1), k- f(n) = (n + 1/2) f(n+1),
    k0 f(n) = (n + 1/4) f(n); matrices are assembled by Kronecker products.
    """
    for i, j in edges:
        if not (0 <= i < num_sites and 0 <= j < num_sites) or i == j:
            raise ValueError(f"bad edge {(i, j)}")
    n = np.arange(cap + 1, dtype=float)
    kp = sps.diags(n[1:], -1, format="csr")
    km = sps.diags(n[:-1] + 0.5, 1, format="csr")
    k0 = sps.diags(n + 0.25, 0, format="csr")
    eye = sps.identity(cap + 1, format="csr")

    def embed(ops: Dict[int, sps.spmatrix]) -> sps.csr_matrix:
        out = sps.identity(1, format="csr")
        for s in range(num_sites):
            out = sps.kron(out, ops.get(s, eye), format="csr")
        return out

    dim = (cap + 1) ** num_sites
    L = sps.csr_matrix((dim, dim))
    for i, j in edges:
        L = L + embed({i: kp, j: km}) + embed({j: kp, i: km}) - 2 * embed({i: k0, j: k0}) \
            + 0.125 * sps.identity(dim, format="csr")
    states = list(itertools.product(range(cap + 1), repeat=num_sites))
    return SIPGenerator(L.tocsr(), states, cap, [tuple(e) for e in edges])


# ---------------------------------------------------------------------- CIR

def cir_euler_maruyama(alpha: float, x0: float, T: float, dt: float, R: int,
                       rng: np.random.Generator) -> np.ndarray:
    """Endpoints of dX = (alpha - X) dt + sqrt(2X) dW, full truncation then reflection."""
    steps = max(1, int(round(T / dt)))
    h = T / steps
    x = np.full(R, float(x0))
    for _ in range(steps):
        xp = np.maximum(x, 0.0)
        x = np.abs(x + (alpha - xp) * h + np.sqrt(2 * xp * h) * rng.standard_normal(R))
    return x


def cir_exact_moment(alpha, x0: float, T: float, k: int) -> float:
    """E_x0[X_T^k] from the semigroup exp(T L) acting on x^k (triangular, exact up to expm)."""
    P = markov_generator_extract(LaguerreRep(alpha), "laguerre_semigroup", n_max=k).poly_matrix
    E = expm(T * P.astype(float))
    coeffs = E[:, k]
    return float(sum(c * x0 ** j for j, c in enumerate(coeffs)))
