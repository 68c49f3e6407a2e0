"""SU(1,1) at the level of 2x2 matrices.

Basis of su(1,1) used throughout the package::

    k+ = [[0, i], [0, 0]],  k- = [[0, 0], [i, 0]],  k0 = diag(1/2, -1/2)

with [k-, k+] = 2 k0 and [k0, k+-] = +-k+-.  A group element is stored by its
first row (a, b); the matrix is [[a, b], [conj(b), conj(a)]].
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

__all__ = [
    "KPLUS",
    "KMINUS",
    "KZERO",
    "Su11Element",
    "GroupParams",
    "direction",
    "commutator",
    "basis_relations_residual",
    "build_group_element",
    "group_element_by_expm",
    "scalar_bch_check",
    "mobius_step",
    "mobius_action",
    "sl2_images",
    "sl2_isomorphism_check",
]

KPLUS = np.array([[0, 1j], [0, 0]], dtype=complex)
KMINUS = np.array([[0, 0], [1j, 0]], dtype=complex)
KZERO = np.array([[0.5, 0], [0, -0.5]], dtype=complex)


@dataclass(frozen=True)
class Su11Element:
    a: complex
    b: complex

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [np.conj(self.b), np.conj(self.a)]], dtype=complex)

    def det_residual(self) -> float:
        return abs(abs(self.a) ** 2 - abs(self.b) ** 2 - 1.0)

    @classmethod
    def from_matrix(cls, mat: np.ndarray, atol: float = 1e-12) -> "Su11Element":
        mat = np.asarray(mat, dtype=complex)
        if abs(mat[1, 0] - np.conj(mat[0, 1])) > atol or abs(mat[1, 1] - np.conj(mat[0, 0])) > atol:
            raise ValueError("matrix is not of SU(1,1) form [[a, b], [conj b, conj a]]")
        return cls(complex(mat[0, 0]), complex(mat[0, 1]))


@dataclass(frozen=True)
class GroupParams:
    xi: complex = 0j
    theta: float = 0.0

    def __post_init__(self):
        if not (cmath.isfinite(complex(self.xi)) and math.isfinite(self.theta)):
            raise ValueError("group parameters must be finite")


def direction(xi: complex) -> complex:
    """xi/|xi|, with the convention 0 at xi = 0."""
    r = abs(xi)
    return 0j if r == 0 else xi / r


def commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def basis_relations_residual() -> float:
    res = [
        commutator(KMINUS, KPLUS) - 2 * KZERO,
        commutator(KZERO, KPLUS) - KPLUS,
        commutator(KZERO, KMINUS) + KMINUS,
    ]
    return max(float(np.abs(r).max()) for r in res)


def build_group_element(params: GroupParams) -> Su11Element:
    """Closed form of exp(xi k+ - conj(xi) k-) exp(2 i theta k0)."""
    xi = complex(params.xi)
    r = abs(xi)
    u = direction(xi)
    ch, sh = math.cosh(r), math.sinh(r)
    ph = cmath.exp(1j * params.theta)
    a = ch * ph
    b = 1j * u * sh * np.conj(ph)
    return Su11Element(complex(a), complex(b))


def group_element_by_expm(params: GroupParams) -> np.ndarray:
    """Matrix-exponential oracle for :func:`build_group_element`."""
    xi = complex(params.xi)
    gen = xi * KPLUS - np.conj(xi) * KMINUS
    return expm(gen) @ expm(2j * params.theta * KZERO)


def _bch_rhs(xi: complex) -> np.ndarray:
    r = abs(xi)
    u = direction(xi)
    t = math.tanh(r)
    return (
        expm(u * t * KPLUS)
        @ expm(-2.0 * math.log(math.cosh(r)) * KZERO)
        @ expm(-np.conj(u) * t * KMINUS)
    )


def scalar_bch_check(xi: complex) -> float:
    """Frobenius residual of the 2x2 disentangling identity.

    exp(xi k+ - conj(xi) k-) = exp(u t k+) exp(-2 log cosh|xi| k0) exp(-conj(u) t k-)
    with u = xi/|xi|, t = tanh|xi|.
    """
    xi = complex(xi)
    lhs = expm(xi * KPLUS - np.conj(xi) * KMINUS)
    return float(np.linalg.norm(lhs - _bch_rhs(xi)))


def mobius_step(z: complex, xi: complex) -> complex:
    """z_xi = (z + u tanh|xi|) / (1 + z conj(u) tanh|xi|)."""
    z = complex(z)
    if abs(z) >= 1:
        raise ValueError(f"|z| must be < 1, got {abs(z)}")
    xi = complex(xi)
    u = direction(xi)
    t = math.tanh(abs(xi))
    return (z + u * t) / (1 + z * np.conj(u) * t)


def mobius_action(g: Su11Element, z: complex) -> complex:
    """Fractional-linear action z -> (a z + b) / (conj(b) z + conj(a))."""
    return (g.a * z + g.b) / (np.conj(g.b) * z + np.conj(g.a))


def sl2_images(half: bool = True):
    """The three su(1,1) elements and their sl(2,R) images.

    With ``half=True`` the nilpotent preimages carry a factor 1/2, i.e.
    (i/2)(k+ + k- +- 2k0).  Without it the bracket of the two nilpotent
    preimages is 4(k- - k+) while the images bracket to diag(-1, 1), so the
    assignment is not a homomorphism.
    """
    w = 0.5 if half else 1.0
    x1 = w * 1j * (KPLUS + KMINUS + 2 * KZERO)
    x2 = KMINUS - KPLUS
    x3 = w * 1j * (KPLUS + KMINUS - 2 * KZERO)
    y1 = np.array([[0, 0], [1, 0]], dtype=complex)
    y2 = np.array([[-1, 0], [0, 1]], dtype=complex)
    y3 = np.array([[0, 1], [0, 0]], dtype=complex)
    return (x1, x2, x3), (y1, y2, y3)


def _coords(mat: np.ndarray, basis) -> np.ndarray:
    a = np.stack([b.reshape(-1) for b in basis], axis=1)
    c, *_ = np.linalg.lstsq(a, mat.reshape(-1), rcond=None)
    return c


def sl2_isomorphism_check(half: bool = True) -> float:
    """Max residual of [phi X, phi Y] - phi[X, Y] over the three pairs.

    The linear map phi sends x_j to y_j; brackets are expanded back in the
    x-basis to apply phi.  ``half=False`` checks the unscaled assignment and
    returns 3.
    """
    xs, ys = sl2_images(half)
    worst = 0.0
    for i in range(3):
        for j in range(i + 1, 3):
            br = commutator(xs[i], xs[j])
            c = _coords(br, xs)
            worst = max(worst, float(np.abs(sum(ck * xk for ck, xk in zip(c, xs)) - br).max()))
            image = sum(ck * yk for ck, yk in zip(c, ys))
            worst = max(worst, float(np.abs(commutator(ys[i], ys[j]) - image).max()))
    return worst
