"""U(xi, theta) = exp(k+(xi) - k-(xi)) exp(2i k0(theta)) on the truncated Fock space.

Amplitudes live on the box prod_i {0..M_i} as dense arrays.  Because the
generator is a sum of commuting single-site pieces, the truncated exponential
is the tensor product of (M_i+1)x(M_i+1) matrix exponentials.  These are
taken in the orthonormal coordinates g_m = sqrt(W(m)) f_m, where the truncated
generator is exactly anti-Hermitian, so the truncated U is exactly unitary.
``truncation_loss`` reports the weighted mass sitting on the outer shell of
the box (some m_i = M_i), the part most affected by the cut.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .fock import FockVector, SiteSpace

__all__ = [
    "UnitaryParams",
    "TruncatedExp",
    "site_weights",
    "box_weights",
    "dense_kplus",
    "dense_kminus",
    "dense_kzero",
    "apply_U",
    "apply_U_dense",
    "exp_kplus_series",
    "exp_kminus_finite",
    "exponential_dense",
    "c_factor",
    "exponential_action_check",
    "bch_tail_bound",
    "bch_check",
    "BCHResult",
    "bch_certified_cap",
    "vacuum_expectation",
    "vacuum_closed_form",
    "exponential_commutator_checks",
    "convergence_rows",
]


@dataclass(frozen=True)
class UnitaryParams:
    xi: Tuple[complex, ...]
    theta: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(complex(x) for x in self.xi))
        th = tuple(self.theta)
        if any(isinstance(t, complex) and t.imag != 0 for t in th):
            raise ValueError("theta must be real")
        object.__setattr__(self, "theta", tuple(float(np.real(t)) for t in th))
        if len(self.xi) != len(self.theta):
            raise ValueError("xi and theta must have one entry per site")

    @property
    def v(self) -> np.ndarray:
        """v = (xi/|xi|) tanh|xi| with v = 0 where xi = 0."""
        xi = np.array(self.xi)
        r = np.abs(xi)
        u = np.divide(xi, r, out=np.zeros_like(xi), where=r > 0)
        return u * np.tanh(r)

    @property
    def w(self) -> np.ndarray:
        return -2.0 * np.log(np.cosh(np.abs(np.array(self.xi))))


@dataclass
class TruncatedExp:
    result: FockVector
    truncation_loss: float
    series_terms: int = 0


def _alpha(space: SiteSpace) -> np.ndarray:
    return np.array([float(a) for a in space.alpha])


def site_weights(alpha: float, M: int) -> np.ndarray:
    m = np.arange(M + 1)
    return np.exp(gammaln(alpha + m) - gammaln(alpha) - gammaln(m + 1))


def box_weights(space: SiteSpace, caps: Sequence[int]) -> np.ndarray:
    out = np.ones([1] * space.S)
    for i, (a, M) in enumerate(zip(_alpha(space), caps)):
        shape = [1] * space.S
        shape[i] = M + 1
        out = out * site_weights(a, M).reshape(shape)
    return out


def _axis_index(S: int, i: int, M: int) -> np.ndarray:
    shape = [1] * S
    shape[i] = M + 1
    return np.arange(M + 1).reshape(shape)


def dense_kplus(arr: np.ndarray, v: Sequence[complex]) -> np.ndarray:
    """(k+(v) f)_m = sum_i v_i m_i f_{m - e_i}; targets beyond the box are dropped."""
    out = np.zeros(arr.shape, dtype=complex)
    S = arr.ndim
    for i, vi in enumerate(v):
        if vi == 0:
            continue
        M = arr.shape[i] - 1
        src = [slice(None)] * S
        dst = [slice(None)] * S
        src[i] = slice(0, M)
        dst[i] = slice(1, M + 1)
        out[tuple(dst)] += vi * _axis_index(S, i, M)[tuple(dst)] * arr[tuple(src)]
    return out


def dense_kminus(arr: np.ndarray, v: Sequence[complex], alpha: np.ndarray) -> np.ndarray:
    """(k-(v) f)_m = sum_i conj(v_i) (alpha_i + m_i) f_{m + e_i}."""
    out = np.zeros(arr.shape, dtype=complex)
    S = arr.ndim
    for i, vi in enumerate(v):
        if vi == 0:
            continue
        M = arr.shape[i] - 1
        src = [slice(None)] * S
        dst = [slice(None)] * S
        src[i] = slice(1, M + 1)
        dst[i] = slice(0, M)
        out[tuple(dst)] += np.conj(vi) * (alpha[i] + _axis_index(S, i, M)[tuple(dst)]) * arr[tuple(src)]
    return out


def _kzero_multiplier(shape, theta: Sequence[complex], alpha: np.ndarray) -> np.ndarray:
    S = len(shape)
    mult = np.full([1] * S, 0.5 * complex(np.dot(theta, alpha)))
    for i, t in enumerate(theta):
        mult = mult + t * _axis_index(S, i, shape[i] - 1)
    return np.broadcast_to(mult, shape)


def dense_kzero(arr: np.ndarray, theta: Sequence[complex], alpha: np.ndarray) -> np.ndarray:
    return _kzero_multiplier(arr.shape, theta, alpha) * arr


def _site_unitary(alpha: float, xi: complex, M: int) -> np.ndarray:
    """exp(xi k+ - conj(xi) k-) in orthonormal single-site coordinates."""
    m = np.arange(M)
    off = np.sqrt((m + 1) * (alpha + m))
    G = np.zeros((M + 1, M + 1), dtype=complex)
    G[m + 1, m] = xi * off
    G[m, m + 1] = -np.conj(xi) * off
    return expm(G)


def _apply_per_axis(arr: np.ndarray, mats: Sequence[Optional[np.ndarray]]) -> np.ndarray:
    out = arr
    for i, A in enumerate(mats):
        if A is None:
            continue
        out = np.moveaxis(np.tensordot(A, out, axes=([1], [i])), 0, i)
    return out


def _shell_mass(arr: np.ndarray, W: np.ndarray) -> float:
    mask = np.zeros(arr.shape, dtype=bool)
    for i in range(arr.ndim):
        idx = [slice(None)] * arr.ndim
        idx[i] = -1
        mask[tuple(idx)] = True
    return float(np.sum(W[mask] * np.abs(arr[mask]) ** 2))


def apply_U_dense(space: SiteSpace, params: UnitaryParams, arr: np.ndarray) -> Tuple[np.ndarray, float]:
    alpha = _alpha(space)
    mult = np.exp(1j * float(np.dot(params.theta, alpha))) * np.exp(
        2j * _kzero_multiplier(arr.shape, params.theta, np.zeros_like(alpha)))
    g = arr * mult
    W = box_weights(space, [n - 1 for n in arr.shape])
    sq = np.sqrt(W)
    mats = [None if x == 0 else _site_unitary(a, x, n - 1)
            for a, x, n in zip(alpha, params.xi, arr.shape)]
    out = _apply_per_axis(g * sq, mats) / sq
    return out, _shell_mass(out, W)


def apply_U(space: SiteSpace, params: UnitaryParams, f: FockVector) -> TruncatedExp:
    if f.caps is None:
        raise ValueError("apply_U needs a truncated vector")
    out, loss = apply_U_dense(space, params, f.to_dense())
    return TruncatedExp(FockVector.from_dense(space, out, loss), loss)


def exponential_dense(z: Sequence[complex], caps: Sequence[int]) -> np.ndarray:
    out = np.ones([1] * len(caps), dtype=complex)
    for i, (zi, M) in enumerate(zip(z, caps)):
        shape = [1] * len(caps)
        shape[i] = M + 1
        out = out * (complex(zi) ** np.arange(M + 1)).reshape(shape)
    return out


def c_factor(space: SiteSpace, xi: Sequence[complex], z: Sequence[complex]) -> complex:
    """C_xi(z) = exp(-sum_i alpha_i log(cosh|xi_i| + z_i conj(u_i) sinh|xi_i|))."""
    total = 0j
    for a, x, zi in zip(_alpha(space), xi, z):
        r = abs(x)
        u = x / r if r else 0j
        total += a * np.log(np.cosh(r) + zi * np.conj(u) * np.sinh(r))
    return complex(np.exp(-total))


def _mobius(z: complex, xi: complex) -> complex:
    r = abs(xi)
    u = xi / r if r else 0j
    t = math.tanh(r)
    return (z + u * t) / (1 + z * np.conj(u) * t)


def _degree_mask(shape, d: int) -> np.ndarray:
    deg = sum(_axis_index(len(shape), i, shape[i] - 1) for i in range(len(shape)))
    return np.broadcast_to(deg <= d, shape)


def exponential_action_check(space: SiteSpace, params: UnitaryParams, z: Sequence[complex],
                        caps: Sequence[int], d_check: int = 6) -> Tuple[float, float]:
    """Max |(U E_z)_m - (closed form)_m| over degrees <= d_check, and the loss.

    Closed form: exp(i alpha(theta)) C_xi(z') E_{z'_xi}, z' = exp(2i theta) z.
    """
    if max(abs(complex(x)) for x in z) >= 1:
        raise ValueError("need sup|z| < 1")
    if min(caps) < d_check:
        raise ValueError("insufficient truncation for the degree window")
    alpha = _alpha(space)
    lhs, loss = apply_U_dense(space, params, exponential_dense(z, caps))
    zr = [complex(zi) * np.exp(2j * t) for zi, t in zip(z, params.theta)]
    zx = [_mobius(zi, x) for zi, x in zip(zr, params.xi)]
    if max(abs(v) for v in zx) >= 1:
        raise ValueError("need sup|z_xi| < 1")
    rhs = np.exp(1j * float(np.dot(params.theta, alpha))) * c_factor(space, params.xi, zr) * exponential_dense(zx, caps)
    mask = _degree_mask(lhs.shape, d_check)
    return float(np.max(np.abs(lhs - rhs)[mask])), loss


def exp_kplus_series(arr: np.ndarray, v: Sequence[complex], max_terms: Optional[int] = None) -> Tuple[np.ndarray, int]:
    """sum_n k+(v)^n f / n! on the box; exact there since k+ only raises degree."""
    limit = max_terms if max_terms is not None else sum(n - 1 for n in arr.shape) + 1
    out = arr.astype(complex).copy()
    term = out.copy()
    n = 0
    for n in range(1, limit + 1):
        term = dense_kplus(term, v) / n
        if not np.any(term):
            break
        out += term
    return out, n


def exp_kminus_finite(arr: np.ndarray, v: Sequence[complex], alpha: np.ndarray, sign: float = -1.0) -> np.ndarray:
    """exp(sign k-(v)) f, a finite sum because k- is nilpotent on bounded degree."""
    out = arr.astype(complex).copy()
    term = out.copy()
    n = 1
    while True:
        term = sign * dense_kminus(term, v, alpha) / n
        if not np.any(term):
            return out
        out += term
        n += 1


def bch_tail_bound(alpha_B: float, c: float, degree: int, n_min: int, n_terms: int = 4000) -> float:
    """sum_{n >= n_min} c^n / n! sqrt((n+m)! (alpha_B)_{n+m}) with m = degree."""
    if c == 0:
        return 0.0 if n_min > 0 else 1.0
    if c >= 1:
        return math.inf
    total = 0.0
    m = degree
    for n in range(n_min, n_min + n_terms):
        logt = (n * math.log(c) - math.lgamma(n + 1)
                + 0.5 * (math.lgamma(n + m + 1) + math.lgamma(alpha_B + n + m) - math.lgamma(alpha_B)))
        t = math.exp(logt)
        total += t
        if n > n_min + 10 and t < 1e-18 * max(total, 1e-300):
            break
    return total


@dataclass
class BCHResult:
    residual: float
    tail_bound: float
    certified: bool
    series_terms: int
    truncation_loss: float


def bch_check(space: SiteSpace, xi: Sequence[complex], f: FockVector, caps: Sequence[int],
              d_check: int = 6, tol: float = 1e-8) -> BCHResult:
    """exp(k+(xi) - k-(xi)) f vs exp(k+(v)) exp(k0(w)) exp(-k-(v)) f.

    The left side uses the per-site matrix exponential, the right side the
    finite lowering series, the diagonal exp(k0(w)) and the raising series
    up to the box.  The norm of the raising-series part cut off by the box is
    bounded by the series-convergence estimate for basis vectors
    e_m = prod_i k+(1_i)^{m_i} Psi / m_i! (C = 1), summed over the support of f.
    """
    params = UnitaryParams(tuple(xi), tuple(0.0 for _ in xi))
    alpha = _alpha(space)
    arr = f.with_caps(caps).to_dense()
    lhs, loss = apply_U_dense(space, params, arr)
    v, w = params.v, params.w
    g = exp_kminus_finite(arr, v, alpha)
    g = np.exp(_kzero_multiplier(g.shape, w, alpha)) * g
    rhs, terms = exp_kplus_series(g, v)
    mask = _degree_mask(lhs.shape, d_check)
    residual = float(np.max(np.abs(lhs - rhs)[mask]))
    c = float(np.max(np.abs(v))) if len(v) else 0.0
    alpha_B = float(sum(a for a, x in zip(alpha, xi) if x != 0))
    mmin = min(caps)
    tail = 0.0
    if c > 0:
        # the raising series acts on g = exp(k0(w)) exp(-k-(v)) f, supported on degrees <= deg f
        for m in zip(*np.nonzero(g)):
            deg = int(sum(m))
            coef = abs(g[m]) * math.prod(math.factorial(int(k)) for k in m) ** -1
            tail += coef * bch_tail_bound(alpha_B, c, deg, max(0, mmin + 1 - deg))
    return BCHResult(residual, tail, residual <= tol and tail <= tol, terms, loss)


def bch_certified_cap(space: SiteSpace, xi: Sequence[complex], f: FockVector, tol: float = 1e-8,
                      M_max: int = 400) -> int:
    """Smallest uniform cap M at which the raising-series tail bound is <= tol.

    Uses |g_m| <= sum over the support of f, a bound that is cheap to compute
    (the lowering exponential only mixes degrees below deg f).
    """
    params = UnitaryParams(tuple(xi), tuple(0.0 for _ in xi))
    c = float(np.max(np.abs(params.v))) if len(xi) else 0.0
    deg = f.degree()
    if c == 0:
        return max(deg, 1)
    alpha_B = float(sum(float(a) for a, x in zip(space.alpha, xi) if x != 0))
    arr = f.with_caps([deg] * space.S).to_dense()
    g = exp_kminus_finite(arr, params.v, _alpha(space))
    g = np.exp(_kzero_multiplier(g.shape, params.w, _alpha(space))) * g
    support = [(m, abs(g[m]) / math.prod(math.factorial(int(k)) for k in m)) for m in zip(*np.nonzero(g))]
    for M in range(max(deg, 1), M_max + 1):
        tail = sum(coef * bch_tail_bound(alpha_B, c, int(sum(m)), max(0, M + 1 - int(sum(m)))) for m, coef in support)
        if tail <= tol:
            return M
    raise ValueError(f"tail bound not certified below M_max={M_max}")


def vacuum_closed_form(space: SiteSpace, params: UnitaryParams) -> complex:
    alpha = _alpha(space)
    s = 1j * float(np.dot(params.theta, alpha)) - float(np.dot(alpha, np.log(np.cosh(np.abs(np.array(params.xi))))))
    return complex(np.exp(s))


def _vacuum_cap(alpha: float, xi: complex, tol: float = 1e-15) -> int:
    t2 = math.tanh(abs(xi)) ** 2
    if t2 == 0:
        return 2
    w = site_weights(alpha, 4000) * t2 ** np.arange(4001) * (1 - t2) ** alpha
    tail = np.cumsum(w[::-1])[::-1]
    return int(np.argmax(tail < tol)) + 10


def vacuum_expectation(space: SiteSpace, params: UnitaryParams, caps: Optional[Sequence[int]] = None) -> Tuple[complex, float]:
    """<Psi, U Psi> from the truncated unitary; caps chosen from the exact
    per-site occupation law of U Psi when not given."""
    if caps is None:
        caps = [_vacuum_cap(float(a), x) for a, x in zip(space.alpha, params.xi)]
    arr = np.zeros([M + 1 for M in caps], dtype=complex)
    arr[(0,) * space.S] = 1.0
    out, loss = apply_U_dense(space, params, arr)
    return complex(out[(0,) * space.S]), loss


def exponential_commutator_checks(space: SiteSpace, v: Sequence[complex], w: Sequence[complex], theta: Sequence[complex],
                   f: FockVector, caps: Sequence[int], d_check: int = 6) -> Tuple[float, float, float]:
    """Residuals of the three commutator identities on degrees <= d_check.

    (a) [k0(theta), e^{k+(v)}] f = e^{k+(v)} k+(theta v) f
    (b) [k-(theta), e^{k+(v)}] f = (-k+(conj(theta) v^2) + 2 k0(conj(theta) v)) e^{k+(v)} f
    (c) e^{k0(w)} k-(theta) f = k-(theta e^{-conj(w)}) e^{k0(w)} f
    """
    if min(caps) < d_check + 2:
        raise ValueError("caps must exceed the degree window by 2")
    alpha = _alpha(space)
    v, w, theta = (np.asarray(x, dtype=complex) for x in (v, w, theta))
    arr = f.with_caps(caps).to_dense()
    mask = _degree_mask(arr.shape, d_check)

    def ek(x):
        return exp_kplus_series(x, v)[0]

    def diff(a, b):
        return float(np.max(np.abs(a - b)[mask]))

    ef = ek(arr)
    ra = diff(dense_kzero(ef, theta, alpha) - ek(dense_kzero(arr, theta, alpha)), ek(dense_kplus(arr, theta * v)))
    rb = diff(dense_kminus(ef, theta, alpha) - ek(dense_kminus(arr, theta, alpha)),
              -dense_kplus(ef, np.conj(theta) * v ** 2) + 2 * dense_kzero(ef, np.conj(theta) * v, alpha))
    e0 = np.exp(_kzero_multiplier(arr.shape, w, alpha))
    rc = diff(e0 * dense_kminus(arr, theta, alpha), dense_kminus(e0 * arr, theta * np.exp(-np.conj(w)), alpha))
    return ra, rb, rc


def convergence_rows(target: str, M_list: Sequence[int], space: SiteSpace, xi: Sequence[complex],
                     theta: Sequence[float], z: Sequence[complex], d_check: int = 6) -> List[dict]:
    """Rows (M, residual, truncation_loss, wall_time_ms) for a convergence study."""
    rows = []
    params = UnitaryParams(tuple(xi), tuple(theta))
    for M in M_list:
        caps = [M] * space.S
        t0 = time.perf_counter()
        if target == "thm33":
            res, loss = exponential_action_check(space, params, z, caps, min(d_check, M))
        elif target == "bch":
            # certified error: comparison residual or the raising-series tail, whichever is larger
            f = FockVector(space, {tuple(1 if i == 0 else 0 for i in range(space.S)): 1.0,
                                   (0,) * space.S: 0.5}, caps=caps)
            r = bch_check(space, xi, f, caps, min(d_check, M))
            res, loss = max(r.residual, float(r.tail_bound)), r.truncation_loss
        elif target == "vacuum-corollary":
            val, loss = vacuum_expectation(space, params, caps)
            res = abs(val - vacuum_closed_form(space, params))
        else:
            raise ValueError(f"unknown convergence target {target!r}")
        rows.append({"M": M, "residual": res, "truncation_loss": loss,
                     "wall_time_ms": (time.perf_counter() - t0) * 1e3})
    return rows
