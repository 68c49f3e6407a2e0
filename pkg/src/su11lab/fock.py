"""Extended Fock space over a finite site space, in the occupancy basis.

A symmetric n-particle function on a finite set of S sites is determined by
the occupation numbers m = (m_1, ..., m_S).  The inner product induced by the
permutation-cycle measures lambda_n then factorizes into per-site weights::

    <f, g> = sum_m W(m) conj(f_m) g_m,    W(m) = prod_i (alpha_i)_{m_i} / m_i!

Operators (phi is a complex function on the sites)::

    (k+(phi) f)_m = sum_i phi_i m_i f_{m - e_i}
    (k-(phi) f)_m = sum_i conj(phi_i) (alpha_i + m_i) f_{m + e_i}
    (k0(phi) f)_m = (sum_i phi_i m_i + 1/2 sum_i phi_i alpha_i) f_m
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .exact import GaussianRational, as_exact, conj, rising

__all__ = [
    "SiteSpace",
    "TestFunction",
    "FockVector",
    "FockOperator",
    "Occ",
    "k_plus",
    "k_minus",
    "k_zero",
    "a_dagger",
    "a_op",
    "b_op",
    "number_op",
    "lambda_weight",
    "lambda_weight_bruteforce",
    "lambda_weight_recursive",
    "inner_product",
    "vacuum",
    "basis_vector",
    "exponential_vector",
    "exp_inner_closed_form",
    "exp_inner_tail_bound",
    "direct_formula_oracle",
    "decomposition_check",
    "cyclicity_rank",
    "occupations",
]

Occ = Tuple[int, ...]


class SiteSpace:
    """S sites with positive reference weights alpha_i."""

    def __init__(self, alpha: Sequence):
        alpha = tuple(a if isinstance(a, float) else as_exact(a) for a in alpha)
        if len(alpha) < 1:
            raise ValueError("need at least one site")
        if any(not a > 0 for a in alpha):
            raise ValueError("all alpha_i must be positive")
        self.alpha = alpha

    @property
    def S(self) -> int:
        return len(self.alpha)

    def weight(self, m: Occ):
        w = 1
        for a, k in zip(self.alpha, m):
            if k:
                w = w * rising(a, k) / math.factorial(k)
        return w

    def total_alpha(self, phi: Sequence = None):
        if phi is None:
            return sum(self.alpha)
        return sum(p * a for p, a in zip(phi, self.alpha))

    def __eq__(self, other):
        return isinstance(other, SiteSpace) and self.alpha == other.alpha

    def __hash__(self):
        return hash(self.alpha)

    def __repr__(self):
        return f"SiteSpace(alpha={[str(a) for a in self.alpha]})"


class TestFunction(tuple):
    """Complex function on the sites; a tuple of S scalars."""

    def __new__(cls, values: Iterable):
        return super().__new__(cls, tuple(values))

    def conj(self) -> "TestFunction":
        return TestFunction(conj(v) for v in self)

    def __mul__(self, other):
        if isinstance(other, tuple):
            return TestFunction(a * b for a, b in zip(self, other))
        return TestFunction(a * other for a in self)

    __rmul__ = __mul__

    def __add__(self, other):
        return TestFunction(a + b for a, b in zip(self, other))

    def support(self) -> List[int]:
        return [i for i, v in enumerate(self) if v]


def occupations(caps: Sequence[int]) -> Iterator[Occ]:
    return itertools.product(*(range(c + 1) for c in caps))


def _within(m: Occ, caps) -> bool:
    return caps is None or all(k <= c for k, c in zip(m, caps))


class FockVector:
    """Sparse amplitudes on occupation multi-indices.

    ``caps`` holds the per-site truncation (None = no truncation).
    ``truncation_loss`` is the weighted squared norm of amplitudes dropped by
    the operation that produced the vector.
    """

    __slots__ = ("space", "amps", "caps", "truncation_loss")

    def __init__(self, space: SiteSpace, amps: Dict[Occ, object] | None = None,
                 caps: Optional[Sequence[int]] = None, truncation_loss=0.0):
        self.space = space
        self.caps = None if caps is None else tuple(caps)
        self.amps = {}
        if amps:
            for m, v in amps.items():
                m = tuple(m)
                if len(m) != space.S or any(k < 0 for k in m):
                    raise ValueError(f"bad occupation index {m}")
                if not _within(m, self.caps):
                    raise ValueError(f"index {m} exceeds truncation {self.caps}")
                if v:
                    self.amps[m] = v
        self.truncation_loss = truncation_loss

    def _new(self, amps, loss=0.0) -> "FockVector":
        v = FockVector(self.space, caps=self.caps, truncation_loss=loss)
        v.amps = {m: a for m, a in amps.items() if a}
        return v

    def _check(self, other: "FockVector"):
        if other.space != self.space:
            raise ValueError("vectors live over different site spaces")
        if other.caps != self.caps:
            raise ValueError(f"truncation mismatch: {self.caps} vs {other.caps}")

    def __add__(self, other: "FockVector") -> "FockVector":
        self._check(other)
        out = dict(self.amps)
        for m, v in other.amps.items():
            out[m] = out.get(m, 0) + v
        return self._new(out)

    def __sub__(self, other: "FockVector") -> "FockVector":
        return self + (-other)

    def __neg__(self) -> "FockVector":
        return self._new({m: -v for m, v in self.amps.items()})

    def __mul__(self, c) -> "FockVector":
        return self._new({m: v * c for m, v in self.amps.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, FockVector) and self.space == other.space and self.amps == other.amps

    def is_zero(self) -> bool:
        return not self.amps

    def __getitem__(self, m: Occ):
        return self.amps.get(tuple(m), 0)

    def degree(self) -> int:
        return max((sum(m) for m in self.amps), default=-1)

    def restrict_degree(self, d: int) -> "FockVector":
        return self._new({m: v for m, v in self.amps.items() if sum(m) <= d})

    def with_caps(self, caps) -> "FockVector":
        v = FockVector(self.space, caps=caps)
        v.amps = {m: a for m, a in self.amps.items() if _within(m, v.caps)}
        return v

    def norm2(self):
        return inner_product(self, self)

    def max_abs_diff(self, other: "FockVector", max_degree: Optional[int] = None) -> float:
        keys = set(self.amps) | set(other.amps)
        if max_degree is not None:
            keys = {m for m in keys if sum(m) <= max_degree}
        return max((abs(complex(self[m]) - complex(other[m])) for m in keys), default=0.0)

    def to_dense(self) -> np.ndarray:
        shape = tuple(c + 1 for c in self.caps)
        arr = np.zeros(shape, dtype=complex)
        for m, v in self.amps.items():
            arr[m] = complex(v)
        return arr

    @classmethod
    def from_dense(cls, space: SiteSpace, arr: np.ndarray, truncation_loss=0.0) -> "FockVector":
        caps = tuple(n - 1 for n in arr.shape)
        v = cls(space, caps=caps, truncation_loss=truncation_loss)
        idx = np.nonzero(arr)
        v.amps = {tuple(int(k) for k in m): complex(arr[m]) for m in zip(*idx)}
        return v

    def to_json(self) -> str:
        entries = [[list(m), float(complex(v).real), float(complex(v).imag)]
                   for m, v in sorted(self.amps.items())]
        doc = {"sites": self.space.S, "alpha": [str(a) for a in self.space.alpha],
               "caps": None if self.caps is None else list(self.caps), "entries": entries}
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FockVector":
        doc = json.loads(text)
        space = SiteSpace([Fraction(a) for a in doc["alpha"]])
        amps = {tuple(m): complex(re, im) for m, re, im in doc["entries"]}
        return cls(space, amps, caps=doc["caps"])

    def __repr__(self):
        return f"FockVector({len(self.amps)} amplitudes, caps={self.caps})"


def inner_product(f: FockVector, g: FockVector):
    f._check(g)
    total = 0
    w = f.space.weight
    for m, v in f.amps.items():
        gv = g.amps.get(m)
        if gv is not None:
            total = total + w(m) * conj(v) * gv
    return total


def vacuum(space: SiteSpace, caps=None) -> FockVector:
    return FockVector(space, {(0,) * space.S: 1}, caps=caps)


def basis_vector(space: SiteSpace, m: Occ, caps=None, value=1) -> FockVector:
    return FockVector(space, {tuple(m): value}, caps=caps)


ColumnFn = Callable[[Occ], Dict[Occ, object]]


class FockOperator:
    """Linear map given by its action on basis vectors e_m.

    ``column(m)`` returns {target index: coefficient}.  Applying the operator
    to a truncated vector drops targets beyond the caps and records their
    weighted squared norm as truncation loss.
    """

    def __init__(self, space: SiteSpace, column: ColumnFn, tag: str = "composite", name: str = ""):
        self.space = space
        self.column = column
        self.tag = tag
        self.name = name

    def apply(self, f: FockVector) -> FockVector:
        out: Dict[Occ, object] = {}
        dropped: Dict[Occ, object] = {}
        caps = f.caps
        for m, v in f.amps.items():
            for t, c in self.column(m).items():
                tgt = out if _within(t, caps) else dropped
                tgt[t] = tgt.get(t, 0) + c * v
        loss = 0.0
        if dropped:
            w = self.space.weight
            loss = sum(float(w(t)) * abs(complex(a)) ** 2 for t, a in dropped.items())
        res = FockVector(self.space, caps=caps, truncation_loss=loss)
        res.amps = {m: a for m, a in out.items() if a}
        return res

    __call__ = apply

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        def col(m):
            out: Dict[Occ, object] = {}
            for t, c in other.column(m).items():
                for u, d in self.column(t).items():
                    out[u] = out.get(u, 0) + d * c
            return out
        return FockOperator(self.space, col, "composite", f"({self.name})({other.name})")

    def _combine(self, other: "FockOperator", sign) -> "FockOperator":
        def col(m):
            out = dict(self.column(m))
            for t, c in other.column(m).items():
                out[t] = out.get(t, 0) + sign * c
            return out
        tag = self.tag if self.tag == other.tag else "composite"
        return FockOperator(self.space, col, tag)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __mul__(self, c) -> "FockOperator":
        return FockOperator(self.space, lambda m: {t: v * c for t, v in self.column(m).items()}, self.tag)

    __rmul__ = __mul__

    def matrix_entries(self, caps: Sequence[int]) -> Dict[Tuple[Occ, Occ], object]:
        """Sparse entries {(row, col): value} restricted to the truncated space."""
        out = {}
        for m in occupations(caps):
            for t, c in self.column(m).items():
                if _within(t, caps) and c:
                    out[(t, m)] = c
        return out

    def to_scipy(self, caps: Sequence[int], dtype=complex) -> sp.csr_matrix:
        shape = tuple(c + 1 for c in caps)
        n = int(np.prod(shape))
        rows, cols, vals = [], [], []
        for (t, m), c in self.matrix_entries(caps).items():
            rows.append(np.ravel_multi_index(t, shape))
            cols.append(np.ravel_multi_index(m, shape))
            vals.append(complex(c) if dtype is complex else float(c))
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=dtype)

    def to_json(self, caps: Sequence[int]) -> str:
        entries = [[list(t), list(m), float(complex(c).real), float(complex(c).imag)]
                   for (t, m), c in sorted(self.matrix_entries(caps).items())]
        return json.dumps({"sites": self.space.S, "alpha": [str(a) for a in self.space.alpha],
                           "caps": list(caps), "tag": self.tag, "entries": entries}, sort_keys=True)


def _phi(space: SiteSpace, phi: Sequence) -> TestFunction:
    if len(phi) != space.S:
        raise ValueError(f"test function has {len(phi)} values, expected {space.S}")
    return TestFunction(phi)


def k_plus(space: SiteSpace, phi: Sequence) -> FockOperator:
    phi = _phi(space, phi)

    def col(m):
        out = {}
        for i, p in enumerate(phi):
            if p:
                t = m[:i] + (m[i] + 1,) + m[i + 1:]
                out[t] = p * (m[i] + 1)
        return out
    return FockOperator(space, col, "raising", "k+")


def k_minus(space: SiteSpace, phi: Sequence, variant: str = "factor_free") -> FockOperator:
    """Lowering operator.  ``variant='prefactor'`` adds the (n+1) prefactor on the
    alpha-integral term; it is kept only to show that it breaks the axioms."""
    if variant not in ("factor_free", "prefactor"):
        raise ValueError(f"unknown variant {variant!r}")
    phi = _phi(space, phi)
    alpha = space.alpha

    def col(m):
        out = {}
        n = sum(m) - 1
        for i, p in enumerate(phi):
            if p and m[i] > 0:
                t = m[:i] + (m[i] - 1,) + m[i + 1:]
                a = alpha[i] * (n + 1) if variant == "prefactor" else alpha[i]
                out[t] = conj(p) * (a + m[i] - 1)
        return out
    return FockOperator(space, col, "lowering", "k-")


def k_zero(space: SiteSpace, phi: Sequence) -> FockOperator:
    phi = _phi(space, phi)
    half = Fraction(1, 2) * space.total_alpha(phi)

    def col(m):
        c = half + sum(p * k for p, k in zip(phi, m) if k)
        return {m: c} if c else {}
    return FockOperator(space, col, "neutral", "k0")


def a_dagger(space: SiteSpace, phi: Sequence) -> FockOperator:
    op = k_plus(space, phi)
    op.name = "a+"
    return op


def a_op(space: SiteSpace, phi: Sequence) -> FockOperator:
    """(a(phi) f)_m = sum_i conj(phi_i) alpha_i f_{m + e_i}."""
    phi = _phi(space, phi)

    def col(m):
        out = {}
        for i, p in enumerate(phi):
            if p and m[i] > 0:
                out[m[:i] + (m[i] - 1,) + m[i + 1:]] = conj(p) * space.alpha[i]
        return out
    return FockOperator(space, col, "lowering", "a")


def b_op(space: SiteSpace, phi: Sequence) -> FockOperator:
    """(b(phi) f)_m = sum_i conj(phi_i) m_i f_{m + e_i}."""
    phi = _phi(space, phi)

    def col(m):
        out = {}
        for i, p in enumerate(phi):
            if p and m[i] > 1:
                out[m[:i] + (m[i] - 1,) + m[i + 1:]] = conj(p) * (m[i] - 1)
        return out
    return FockOperator(space, col, "lowering", "b")


def number_op(space: SiteSpace, phi: Sequence) -> FockOperator:
    phi = _phi(space, phi)

    def col(m):
        c = sum(p * k for p, k in zip(phi, m) if k)
        return {m: c} if c else {}
    return FockOperator(space, col, "neutral", "n")


# lambda_n weights

def _labels_to_occ(space: SiteSpace, point: Sequence[int]) -> Occ:
    m = [0] * space.S
    for x in point:
        if not 0 <= x < space.S:
            raise IndexError(f"site label {x} out of range")
        m[x] += 1
    return tuple(m)


def lambda_weight(space: SiteSpace, point: Sequence[int]):
    """lambda_n of the atom at ``point``: prod_i (alpha_i)_{m_i}."""
    if len(point) < 1:
        raise ValueError("need n >= 1")
    m = _labels_to_occ(space, point)
    out = 1
    for a, k in zip(space.alpha, m):
        out = out * rising(a, k)
    return out


def _cycles(perm: Sequence[int]) -> List[List[int]]:
    seen, out = set(), []
    for s in range(len(perm)):
        if s in seen:
            continue
        cyc, j = [], s
        while j not in seen:
            seen.add(j)
            cyc.append(j)
            j = perm[j]
        out.append(cyc)
    return out


def lambda_weight_bruteforce(space: SiteSpace, point: Sequence[int]):
    """Sum over permutations; a permutation sees the atom only if each of its
    cycles sits on a single site, and then contributes prod over cycles of alpha."""
    _labels_to_occ(space, point)
    total = 0
    for perm in itertools.permutations(range(len(point))):
        term = 1
        for cyc in _cycles(perm):
            labels = {point[j] for j in cyc}
            if len(labels) != 1:
                term = 0
                break
            term = term * space.alpha[point[cyc[0]]]
        total = total + term
    return total


def lambda_weight_recursive(space: SiteSpace, point: Sequence[int]):
    """lambda_{n+1}(x, y) = lambda_n(x) (alpha_y + #{i <= n: x_i = y})."""
    _labels_to_occ(space, point)
    out = 1
    for n, y in enumerate(point):
        out = out * (space.alpha[y] + sum(1 for x in point[:n] if x == y))
    return out


# exponential vectors

def exponential_vector(space: SiteSpace, z: Sequence, caps: Sequence[int]) -> FockVector:
    z = _phi(space, z)
    if max(abs(complex(v)) for v in z) >= 1:
        raise ValueError("exponential vector needs sup|z| < 1")
    amps = {}
    for m in occupations(caps):
        v = 1
        for zi, k in zip(z, m):
            if k:
                v = v * zi ** k
        amps[m] = v
    return FockVector(space, amps, caps=caps)


def exp_inner_closed_form(space: SiteSpace, u: Sequence, v: Sequence) -> complex:
    s = sum(float(a) * np.log(1 - np.conj(complex(x)) * complex(y)) for a, x, y in zip(space.alpha, u, v))
    return complex(np.exp(-s))


def exp_inner_tail_bound(space: SiteSpace, u: Sequence, v: Sequence, caps: Sequence[int]) -> float:
    """|<E_u, E_v> - truncated sum| <= prod_i S_i - prod_i T_i with
    S_i = (1 - r_i)^(-alpha_i), T_i its partial sum up to caps_i, r_i = |u_i v_i|."""
    full, part = 1.0, 1.0
    for a, x, y, c in zip(space.alpha, u, v, caps):
        r = abs(complex(x)) * abs(complex(y))
        a = float(a)
        full *= (1 - r) ** (-a)
        t, term = 0.0, 1.0
        for k in range(c + 1):
            t += term
            term *= (a + k) / (k + 1) * r
        part *= t
    return max(full - part, 0.0)


# tuple-enumeration oracle

def _symmetric_tuples(f: FockVector, n: int) -> Dict[Tuple[int, ...], object]:
    S = f.space.S
    out = {}
    for x in itertools.product(range(S), repeat=n):
        v = f[_labels_to_occ(f.space, x)]
        if v:
            out[x] = v
    return out


def direct_formula_oracle(phi: Sequence, f: FockVector, which: str, variant: str = "factor_free",
                          max_degree: int = 5) -> FockVector:
    """Apply k+/k-/k0 by literal iteration over tuples in X^n.

    The n-particle components are stored as full functions on X^n and the
    result is read back at sorted representatives.
    """
    space = f.space
    if space.S > 3 or f.degree() > max_degree:
        raise ValueError("instance too large for tuple enumeration")
    phi = _phi(space, phi)
    S = space.S
    top = f.degree() + (1 if which == "plus" else 0)
    comps = {n: _symmetric_tuples(f, n) for n in range(0, top + 2)}
    out: Dict[Occ, object] = {}
    for n in range(0, top + 1):
        for x in itertools.product(range(S), repeat=n):
            if list(x) != sorted(x):
                continue
            if which == "plus":
                val = sum((phi[x[i]] * comps[n - 1].get(x[:i] + x[i + 1:], 0) for i in range(n)), 0) if n else 0
            elif which == "zero":
                val = (sum((phi[xi] for xi in x), 0) + Fraction(1, 2) * space.total_alpha(phi)) * comps[n].get(x, 0)
            elif which == "minus":
                integral = sum((conj(phi[y]) * comps[n + 1].get((y,) + x, 0) * space.alpha[y] for y in range(S)), 0)
                if variant == "prefactor":
                    integral = integral * (n + 1)
                diag = sum((conj(phi[x[i]]) * comps[n + 1].get(x + (x[i],), 0) for i in range(n)), 0)
                val = integral + diag
            else:
                raise ValueError(f"unknown operator {which!r}")
            if val:
                out[_labels_to_occ(space, x)] = val
    return FockVector(space, out, caps=f.caps)


@dataclass
class DecompositionResiduals:
    kplus_eq_adagger: float
    kminus_eq_a_plus_b: float
    kzero_eq_n_plus_half: float
    ccr_a_adagger: float
    ccr_n_adagger: float
    ccr_n_a: float

    def max(self) -> float:
        return max(vars(self).values())


def _op_residual(space, lhs: FockOperator, rhs: FockOperator, caps, max_degree) -> float:
    worst = 0.0
    for m in occupations(caps):
        if sum(m) > max_degree:
            continue
        e = basis_vector(space, m)
        d = lhs.apply(e) - rhs.apply(e)
        worst = max(worst, max((abs(complex(v)) for v in d.amps.values()), default=0.0))
    return worst


def _comm(x: FockOperator, y: FockOperator) -> FockOperator:
    return x @ y - y @ x


def decomposition_check(space: SiteSpace, phi: Sequence, theta: Sequence = None,
                        caps: Sequence[int] = None) -> DecompositionResiduals:
    """k+ = a+, k- = a + b, k0 = n + alpha(phi)/2 and the CCR on degrees <= M - 2."""
    theta = phi if theta is None else theta
    caps = caps or (4,) * space.S
    d = min(caps) - 2
    ident = FockOperator(space, lambda m: {m: 1}, "neutral")
    fg = space.total_alpha(TestFunction(conj(a) for a in phi) * TestFunction(theta))
    half = Fraction(1, 2) * space.total_alpha(phi)
    return DecompositionResiduals(
        _op_residual(space, k_plus(space, phi), a_dagger(space, phi), caps, d),
        _op_residual(space, k_minus(space, phi), a_op(space, phi) + b_op(space, phi), caps, d),
        _op_residual(space, k_zero(space, phi), number_op(space, phi) + ident * half, caps, d),
        _op_residual(space, _comm(a_op(space, phi), a_dagger(space, theta)), ident * fg, caps, d),
        _op_residual(space, _comm(number_op(space, phi), a_dagger(space, theta)),
                     a_dagger(space, TestFunction(phi) * TestFunction(theta)), caps, d),
        _op_residual(space, _comm(number_op(space, phi), a_op(space, theta)),
                     a_op(space, TestFunction(phi).conj() * TestFunction(theta)) * -1, caps, d),
    )


def cyclicity_rank(space: SiteSpace, degree: int) -> Tuple[int, int]:
    """Rank of {k+(1_{i1})...k+(1_{in}) Psi : n <= degree} vs dimension of the
    degree-<= ``degree`` subspace."""
    vecs = []
    indicators = [TestFunction(1 if j == i else 0 for j in range(space.S)) for i in range(space.S)]
    for n in range(degree + 1):
        for word in itertools.combinations_with_replacement(range(space.S), n):
            v = vacuum(space)
            for i in word:
                v = k_plus(space, indicators[i]).apply(v)
            vecs.append(v)
    index = [m for m in occupations((degree,) * space.S) if sum(m) <= degree]
    mat = np.array([[float(v[m]) for m in index] for v in vecs])
    return int(np.linalg.matrix_rank(mat)), len(index)
