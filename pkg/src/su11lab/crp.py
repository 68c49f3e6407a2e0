"""Chinese-restaurant lift of the extended Fock space into a standard Fock space.

A state of the standard Fock space over sites x table sizes is a function of
table configurations.  On a finite site space a configuration is, per site,
the multiset of table sizes, stored here as a partition (non-increasing tuple).
The weight of a configuration k (k_{i,n} = number of size-n tables at site i) is

    W_Y(k) = prod_{i,n} (alpha_i / n)^{k_{i,n}} / k_{i,n}!

and summing W_Y over all seatings of m_i customers gives (alpha_i)_{m_i} / m_i!,
which is why the lift f -> F, F(k) = f_{m(k)}, is isometric.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sps
from scipy.linalg import expm
from scipy.sparse.linalg import expm_multiply

from .exact import conj
from .fock import FockVector, SiteSpace, TestFunction
from .unitary import UnitaryParams, apply_U_dense, c_factor, exponential_dense

__all__ = [
    "Tables",
    "partitions",
    "table_configurations",
    "table_weight",
    "occupation_of",
    "StandardFockVector",
    "lift",
    "lifted_k_plus",
    "lifted_k_minus",
    "lifted_k_zero",
    "intertwine_check",
    "single_table_ops",
    "single_table_commutators",
    "bargmann_index",
    "single_table_unitary",
    "single_table_ode_check",
    "ArakiResult",
    "araki_identity_check",
]

Tables = Tuple[Tuple[int, ...], ...]


@lru_cache(maxsize=None)
def partitions(m: int, largest: Optional[int] = None) -> Tuple[Tuple[int, ...], ...]:
    """All partitions of m into parts <= largest, as non-increasing tuples."""
    largest = m if largest is None else min(largest, m)
    if m == 0:
        return ((),)
    out = []
    for first in range(largest, 0, -1):
        for rest in partitions(m - first, first):
            out.append((first,) + rest)
    return tuple(out)


def table_configurations(occ: Sequence[int], n_cap: Optional[int] = None) -> Iterator[Tables]:
    yield from itertools.product(*(partitions(m, n_cap) for m in occ))


def occupation_of(k: Tables) -> Tuple[int, ...]:
    return tuple(sum(part) for part in k)


def _counts(part: Tuple[int, ...]) -> Dict[int, int]:
    out: Dict[int, int] = {}
    for n in part:
        out[n] = out.get(n, 0) + 1
    return out


def table_weight(space: SiteSpace, k: Tables) -> Fraction:
    w = Fraction(1)
    for a, part in zip(space.alpha, k):
        for n, c in _counts(part).items():
            w *= (Fraction(a) / n) ** c / math.factorial(c)
    return w


class StandardFockVector:
    """Sparse amplitudes over table configurations."""

    def __init__(self, space: SiteSpace, amps: Optional[Dict[Tables, object]] = None, n_cap: Optional[int] = None):
        self.space = space
        self.n_cap = n_cap
        self.amps = {k: v for k, v in (amps or {}).items() if v}

    def norm2(self):
        return sum(table_weight(self.space, k) * abs2(v) for k, v in self.amps.items())

    def __eq__(self, other) -> bool:
        return isinstance(other, StandardFockVector) and self.amps == other.amps

    def __sub__(self, other: "StandardFockVector") -> "StandardFockVector":
        out = dict(self.amps)
        for k, v in other.amps.items():
            out[k] = out.get(k, 0) - v
        return StandardFockVector(self.space, out, self.n_cap)

    def is_zero(self) -> bool:
        return not self.amps

    def __repr__(self):
        return f"StandardFockVector({len(self.amps)} configurations)"


def abs2(v):
    return (v * conj(v)).real if hasattr(v, "real") and not isinstance(v, (int, Fraction)) else v * v


def lift(f: FockVector, n_cap: Optional[int] = None) -> StandardFockVector:
    """(U f)(k) = f_{m(k)}: every seating of the m_i customers gets f_m."""
    deg = f.degree()
    if n_cap is None:
        n_cap = max(deg, 1)
    if n_cap < max((max(m) for m in f.amps), default=0):
        raise ValueError(f"n_cap={n_cap} cannot seat the occupations of f")
    out = {}
    for m, v in f.amps.items():
        for k in table_configurations(m, n_cap):
            out[k] = v
    return StandardFockVector(f.space, out, n_cap)


def _replace(k: Tables, i: int, part: Tuple[int, ...]) -> Tables:
    return k[:i] + (tuple(sorted(part, reverse=True)),) + k[i + 1:]


def _remove(part: Tuple[int, ...], n: int) -> List[int]:
    lst = list(part)
    lst.remove(n)
    return lst


def _push(F: StandardFockVector, moves) -> StandardFockVector:
    out: Dict[Tables, object] = {}
    for k, v in F.amps.items():
        for tgt, c in moves(k):
            if c:
                out[tgt] = out.get(tgt, 0) + c * v
    return StandardFockVector(F.space, out, F.n_cap)


def lifted_k_zero(F: StandardFockVector, phi: Sequence) -> StandardFockVector:
    """Multiplier 1/2 alpha(phi) + sum over tables of n phi(x)."""
    phi = TestFunction(phi)
    half = Fraction(1, 2) * F.space.total_alpha(phi)
    return _push(F, lambda k: [(k, half + sum(p * sum(part) for p, part in zip(phi, k)))])


def lifted_k_minus(F: StandardFockVector, phi: Sequence) -> StandardFockVector:
    """A customer joins an existing table or opens a new one (pull form);
    pushed forward: a table of size n+1 shrinks to n, or a solo table closes."""
    phi = TestFunction(phi)
    alpha = F.space.alpha

    def moves(k):
        for i, part in enumerate(k):
            pc = conj(phi[i])
            if not pc:
                continue
            for n1 in set(part):
                if n1 >= 2:
                    tgt = _replace(k, i, _remove(part, n1) + [n1 - 1])
                    cnt = tgt[i].count(n1 - 1)
                    yield tgt, pc * (n1 - 1) * cnt
                else:
                    yield _replace(k, i, _remove(part, 1)), pc * alpha[i]
    return _push(F, moves)


def lifted_k_plus(F: StandardFockVector, phi: Sequence) -> StandardFockVector:
    """A customer leaves a table (pull form); pushed forward: a table of size
    n-1 grows to n, or a new solo table appears."""
    phi = TestFunction(phi)
    n_cap = F.n_cap

    def moves(k):
        for i, part in enumerate(k):
            p = phi[i]
            if not p:
                continue
            for n0 in set(part):
                if n_cap is not None and n0 + 1 > n_cap:
                    continue
                tgt = _replace(k, i, _remove(part, n0) + [n0 + 1])
                yield tgt, p * (n0 + 1) * tgt[i].count(n0 + 1)
            tgt = _replace(k, i, list(part) + [1])
            yield tgt, p * tgt[i].count(1)
    return _push(F, moves)


def intertwine_check(space: SiteSpace, phi: Sequence, f: FockVector, n_cap: Optional[int] = None) -> Dict[str, bool]:
    """U k#(phi) f == K#(phi) U f, exactly, for the three operator types."""
    from .fock import k_minus, k_plus, k_zero

    n_cap = n_cap if n_cap is not None else f.degree() + 1
    g = f.with_caps(None)
    Uf = lift(g, n_cap)
    return {
        "raising": lift(k_plus(space, phi)(g), n_cap) == lifted_k_plus(Uf, phi),
        "lowering": lift(k_minus(space, phi)(g), n_cap) == lifted_k_minus(Uf, phi),
        "neutral": lift(k_zero(space, phi)(g), n_cap) == lifted_k_zero(Uf, phi),
    }


# ------------------------------------------------------------ single table

def single_table_ops(N: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """k+, k-, k0 on functions of n in {1..N} (row/col index n-1)."""
    n = np.arange(1, N + 1)
    kp = np.zeros((N, N), dtype=np.int64)
    km = np.zeros((N, N), dtype=np.int64)
    kp[np.arange(1, N), np.arange(0, N - 1)] = n[1:]        # k+ f(n) = n f(n-1), n >= 2
    km[np.arange(0, N - 1), np.arange(1, N)] = n[:-1]       # k- f(n) = n f(n+1)
    k0 = np.diag(n)
    return kp, km, k0


def single_table_commutators(N: int) -> Dict[str, int]:
    """Max |entry| of the su(1,1) relations on columns n <= N-1."""
    kp, km, k0 = single_table_ops(N)
    rels = {
        "[k-,k+]-2k0": km @ kp - kp @ km - 2 * k0,
        "[k0,k+]-k+": k0 @ kp - kp @ k0 - kp,
        "[k0,k-]+k-": k0 @ km - km @ k0 + km,
    }
    return {k: int(np.max(np.abs(v[:, : N - 1]))) for k, v in rels.items()}


def bargmann_index(N: int = 4) -> Fraction:
    """Eigenvalue of k0 on the vacuum psi_0 = delta_{n,1}."""
    kp, km, k0 = single_table_ops(N)
    psi0 = np.zeros(N, dtype=np.int64)
    psi0[0] = 1
    out = k0 @ psi0
    if np.any(km @ psi0):
        raise AssertionError("vacuum not annihilated by k-")
    return Fraction(int(out[0]))


def single_table_unitary(xi: complex, theta: float, N: int) -> np.ndarray:
    """exp(xi k+ - conj(xi) k-) exp(2i theta k0) on l2({1..N}, 1/n), in f-coordinates.

    In h(n) = f(n)/sqrt(n) the generator is anti-Hermitian with off-diagonal
    sqrt(n(n-1)), so the truncated exponential is unitary.
    """
    n = np.arange(1, N + 1, dtype=float)
    off = np.sqrt(n[1:] * n[:-1])
    G = np.zeros((N, N), dtype=complex)
    G[np.arange(1, N), np.arange(0, N - 1)] = xi * off
    G[np.arange(0, N - 1), np.arange(1, N)] = -np.conj(xi) * off
    E = expm(G) * np.exp(2j * theta * n)[None, :]
    r = np.sqrt(n)
    return (r[:, None] * E) / r[None, :]


def _single_table_flow(t: float, f: np.ndarray) -> np.ndarray:
    """exp(t(k+ - k-)) f through the sparse tridiagonal generator in h = f/sqrt(n)."""
    N = f.size
    n = np.arange(1, N + 1, dtype=float)
    off = np.sqrt(n[1:] * n[:-1])
    G = sps.diags([t * off, -t * off], [-1, 1], format="csc")
    r = np.sqrt(n)
    return r * expm_multiply(G, f / r)


def _ode_cap(t: float, z: complex = 0.0, tol: float = 1e-16) -> int:
    T = math.tanh(t)
    q = max(abs(T), abs(z), abs((z + T) / (1 + z * T)))
    if q == 0:
        return 20
    return int(math.log(tol) / math.log(q)) + 40


def single_table_ode_check(t: float, n_cap: Optional[int] = None, z: complex = 0.0) -> Tuple[float, int]:
    """max_{n <= n_cap-10} |exp(t(k+ - k-))(f0 - g0)(n) - z_t^n| and the cap used.

    f0(n) = z^n, g0(n) = (-tanh t)^n, z_t = (z + tanh t)/(1 + z tanh t).
    """
    if abs(t) > 2:
        raise ValueError("|t| <= 2 required")
    if n_cap is None:
        n_cap = _ode_cap(t, z)
    n = np.arange(1, n_cap + 1)
    T = math.tanh(t)
    f0 = complex(z) ** n - (-T) ** n.astype(float)
    out = _single_table_flow(t, f0)
    zt = (z + T) / (1 + z * T)
    window = n <= n_cap - 10
    return float(np.max(np.abs(out - zt ** n)[window])), n_cap


# ---------------------------------------------------------------- Araki form

@dataclass
class ArakiResult:
    inner_residual: float
    norm_residual: float
    prefactor_residual: float
    vector_residual: float
    tail_bound: float


def _log_series(q: complex, N: int) -> complex:
    n = np.arange(1, N + 1)
    return complex(np.sum(q ** n / n))


def araki_identity_check(space: SiteSpace, xi: Sequence[complex], theta: Sequence[float], z: Sequence[complex],
                         d_check: int = 4, n_series: int = 200, M: Optional[int] = None,
                         n_table: int = 200, phase_sign: int = -1) -> ArakiResult:
    """Factorized action of the lifted unitary on exponential states.

    phi(x, n) = (-exp(-2i theta) u tanh|xi|)^n, f(x, n) = z(x)^n.
    Scalars: <phi, f> = -sum alpha log(1 + e^{2i theta} z conj(u) tanh|xi|) and
    -||phi||^2/2 = -sum alpha log cosh|xi|, by truncated series with explicit
    geometric tails.  Vector: lift of U E_z against
    prefactor * E_{Q(f - phi)}, Q from the single-table exponential.
    ``phase_sign=+1`` uses exp(+2i theta) inside phi, which breaks the identity
    once theta != 0; it is kept to document that.
    """
    if max(abs(complex(v)) for v in z) >= 1:
        raise ValueError("need sup|z| < 1")
    alpha = [float(a) for a in space.alpha]
    inner_series = inner_closed = norm_series = norm_closed = 0j
    tail = 0.0
    g_tables = []
    for a, x, th, zi in zip(alpha, xi, theta, z):
        x, zi = complex(x), complex(zi)
        r = abs(x)
        u = x / r if r else 0j
        T = math.tanh(r)
        q_inner = -cmath.exp(-phase_sign * 2j * th) * np.conj(u) * T * zi      # conj(phi(n)) f(n) = q^n
        inner_series += a * _log_series(q_inner, n_series)
        inner_closed += -a * cmath.log(1 + cmath.exp(2j * th) * zi * np.conj(u) * T)
        norm_series += -0.5 * a * _log_series(T * T, n_series)
        norm_closed += -a * math.log(math.cosh(r))
        for q in (abs(q_inner), T * T):
            if q:
                tail += a * q ** (n_series + 1) / ((n_series + 1) * (1 - q))
        n = np.arange(1, n_table + 1)
        phi = (-cmath.exp(phase_sign * 2j * th) * u * T) ** n
        g = single_table_unitary(x, th, n_table) @ (zi ** n - phi)
        g_tables.append(g)
    a_theta = float(np.dot(alpha, theta))
    pref = cmath.exp(1j * a_theta + norm_series + inner_series)
    zr = [complex(zi) * cmath.exp(2j * th) for zi, th in zip(z, theta)]
    c_ref = cmath.exp(1j * a_theta) * c_factor(space, xi, zr)

    caps = [M if M is not None else d_check + 40] * space.S
    lhs, _ = apply_U_dense(space, UnitaryParams(tuple(xi), tuple(theta)), exponential_dense(z, caps))
    worst = 0.0
    for m in itertools.product(range(d_check + 1), repeat=space.S):
        if sum(m) > d_check:
            continue
        for k in table_configurations(m):
            rhs = pref
            for i, part in enumerate(k):
                for nsize in part:
                    rhs *= g_tables[i][nsize - 1]
            worst = max(worst, abs(lhs[m] - rhs))
    return ArakiResult(abs(inner_series - inner_closed), abs(norm_series - norm_closed),
                       abs(pref - c_ref), worst, tail)
