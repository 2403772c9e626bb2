"""Linear symplectic algebra on the model space V = R^{2n}.

Basis ordering is ``(x_1, ..., x_n, y_1, ..., y_n)`` with
``Omega = sum x_j^* ^ y_j^*`` and complex structure ``J = [[0, I], [-I, 0]]``.
A real vector ``(a, b)`` is identified with the complex vector ``b + i a``; a
real matrix commuting with ``J`` with top row blocks ``[A, B]`` becomes the
complex matrix ``A + iB``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "SymplecticError",
    "NotAdaptedError",
    "DegenerateFrameError",
    "ModelSpace",
    "SpElement",
    "CoisotropicConvention",
    "TOL_SP",
    "PIVOT_FLOOR",
    "omega_matrix",
    "complex_structure",
    "omega_pairing",
    "is_symplectic",
    "symplectic_inverse",
    "to_complex",
    "from_complex",
    "cayley_component",
    "det_c",
    "chi",
    "nu",
    "adapted_frame",
    "adapted_frames",
    "reference_unitary",
    "random_hamiltonian_matrix",
    "random_symplectic",
]

TOL_SP = 1e-9
PIVOT_FLOOR = 1e-10


class SymplecticError(ValueError):
    """Base class for linear-symplectic failures."""


class NotAdaptedError(SymplecticError):
    """A matrix does not preserve the coisotropic subspace (or its orthogonal)."""


class DegenerateFrameError(SymplecticError):
    """Gram-Schmidt met a pivot below the floor; retry with another reference."""


@lru_cache(maxsize=None)
def _omega(n: int) -> np.ndarray:
    I = np.eye(n)
    Z = np.zeros((n, n))
    out = np.block([[Z, I], [-I, Z]])
    out.setflags(write=False)
    return out


def omega_matrix(n: int) -> np.ndarray:
    """Matrix of ``Omega`` in the fixed basis (read-only)."""
    return _omega(n)


def complex_structure(n: int) -> np.ndarray:
    """``J``; it has the same block form as ``Omega``."""
    return _omega(n)


@dataclass(frozen=True)
class ModelSpace:
    """The symplectic model space ``(V, Omega, J)`` of half-dimension ``n``."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def Omega(self) -> np.ndarray:
        return omega_matrix(self.n)

    @property
    def J(self) -> np.ndarray:
        return complex_structure(self.n)

    def hermitian(self, v, w) -> complex:
        """``<v, w> = Omega(Jv, w) + i Omega(v, w)``."""
        v = np.asarray(v, float)
        w = np.asarray(w, float)
        return omega_pairing(self.J @ v, w) + 1j * omega_pairing(v, w)


def _check_square(g: np.ndarray) -> int:
    if g.ndim < 2 or g.shape[-1] != g.shape[-2] or g.shape[-1] % 2:
        raise ValueError(f"expected an even-dimensional square matrix, got shape {g.shape}")
    return g.shape[-1] // 2


def omega_pairing(v, w) -> float:
    """``Omega(v, w) = v^T Omega w``."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != w.shape or v.ndim != 1 or v.size % 2:
        raise ValueError(f"dimension mismatch: {v.shape} vs {w.shape}")
    n = v.size // 2
    return float(v[:n] @ w[n:] - v[n:] @ w[:n])


def is_symplectic(g, tol: float = TOL_SP) -> bool:
    """True iff ``||g^T Omega g - Omega||_inf < tol``."""
    g = np.asarray(g, dtype=float)
    n = _check_square(g)
    Om = omega_matrix(n)
    return bool(np.max(np.abs(g.T @ Om @ g - Om), initial=0.0) < tol)


def symplectic_inverse(g: np.ndarray) -> np.ndarray:
    """``g^{-1} = -Omega g^T Omega``; works on stacks of matrices."""
    g = np.asarray(g, dtype=float)
    n = _check_square(g)
    Om = omega_matrix(n)
    return -Om @ np.swapaxes(g, -1, -2) @ Om


@dataclass(frozen=True)
class SpElement:
    """A symplectic matrix validated on construction."""

    mat: np.ndarray
    tol: float = field(default=TOL_SP, compare=False)

    def __post_init__(self):
        m = np.array(self.mat, dtype=float)
        _check_square(m)
        if not is_symplectic(m, self.tol):
            raise SymplecticError("matrix is not symplectic within tolerance")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @property
    def n(self) -> int:
        return self.mat.shape[0] // 2

    def __matmul__(self, other: "SpElement") -> "SpElement":
        return SpElement(self.mat @ other.mat, tol=max(self.tol, other.tol))

    def inverse(self) -> "SpElement":
        return SpElement(symplectic_inverse(self.mat), tol=self.tol)


def _as_array(g) -> np.ndarray:
    return g.mat if isinstance(g, SpElement) else np.asarray(g, dtype=float)


def to_complex(m: np.ndarray) -> np.ndarray:
    """Complex form ``A + iB`` of a real matrix (or stack) commuting with ``J``."""
    n = m.shape[-1] // 2
    return m[..., :n, :n] + 1j * m[..., :n, n:]


def from_complex(c: np.ndarray) -> np.ndarray:
    """Inverse of :func:`to_complex`."""
    A, B = c.real, c.imag
    top = np.concatenate([A, B], axis=-1)
    bottom = np.concatenate([-B, A], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def cayley_component(g) -> np.ndarray:
    """Complex ``n x n`` matrix of ``C_g = (g - JgJ)/2``.

    Accepts a single matrix or a stack ``(..., 2n, 2n)``.
    """
    m = _as_array(g)
    n = _check_square(m)
    # With g = [[a, b], [c, d]]: C_g = [[a+d, b-c], [c-b, a+d]] / 2
    a = m[..., :n, :n]
    b = m[..., :n, n:]
    c = m[..., n:, :n]
    d = m[..., n:, n:]
    return 0.5 * ((a + d) + 1j * (b - c))


def det_c(g) -> complex | np.ndarray:
    """Complex determinant of ``C_g``; 1 for the zero-dimensional space."""
    m = _as_array(g)
    if m.shape[-1] == 0:
        return np.ones(m.shape[:-2], dtype=complex) if m.ndim > 2 else 1.0 + 0j
    det = np.linalg.det(cayley_component(m))
    if np.any(np.abs(det) < 1e-12):
        raise SymplecticError("Det_C C_g vanishes: matrix is not a valid symplectic matrix")
    return complex(det) if np.ndim(det) == 0 else det


# -- coisotropic conventions ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoisotropicConvention:
    """A codimension-one coisotropic ``W`` and a symplectic basis of ``W/W^perp``.

    Stored as a symplectic change of basis ``Q``: ``W^perp = span{Q x_1}``,
    ``W = Q span{x_1..x_n, y_2..y_n}`` and the quotient basis is the image of
    ``[x_2..x_n, y_2..y_n]``. ``Q = I`` is the default convention.
    """

    n: int
    Q: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.Q is not None:
            q = np.array(self.Q, dtype=float)
            if q.shape != (2 * self.n, 2 * self.n) or not is_symplectic(q, 1e-8):
                raise SymplecticError("convention change of basis must be symplectic")
            q.setflags(write=False)
            object.__setattr__(self, "Q", q)

    @classmethod
    def default(cls, n: int) -> "CoisotropicConvention":
        return cls(n)

    @classmethod
    def from_vector(cls, z) -> "CoisotropicConvention":
        """Convention with ``W^perp = span{z}`` (``W`` is the Omega-orthogonal of ``z``)."""
        z = np.asarray(z, dtype=float)
        n = z.size // 2
        J = complex_structure(n)
        # adapted_frame puts xi in slot x_1; pass gradH = -J xi so that J gradH = xi
        Q = adapted_frame(-J @ z, z)
        return cls(n, Q)

    @classmethod
    def polar_style(cls, n: int) -> "CoisotropicConvention":
        """``W^perp = span{y_1 + ... + y_n}``."""
        z = np.concatenate([np.zeros(n), np.ones(n)])
        return cls.from_vector(z)

    # index bookkeeping in the default basis
    @property
    def wperp_index(self) -> int:
        return 0

    @property
    def dual_index(self) -> int:
        return self.n

    @property
    def W_indices(self) -> list[int]:
        return list(range(self.n)) + list(range(self.n + 1, 2 * self.n))

    @property
    def quotient_indices(self) -> list[int]:
        return list(range(1, self.n)) + list(range(self.n + 1, 2 * self.n))

    def W_basis(self) -> np.ndarray:
        base = np.eye(2 * self.n)[:, self.W_indices]
        return base if self.Q is None else self.Q @ base

    def wperp_vector(self) -> np.ndarray:
        e = np.eye(2 * self.n)[:, 0]
        return e if self.Q is None else self.Q @ e

    def to_default(self, g: np.ndarray) -> np.ndarray:
        """Conjugate ``g`` into the default convention: ``Q^{-1} g Q``."""
        if self.Q is None:
            return g
        return symplectic_inverse(self.Q) @ g @ self.Q


def _adaptedness(gd: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # W-leak: y_1-row over W columns; Wperp-leak: x_1 column off its own slot
    w_cols = list(range(n)) + list(range(n + 1, 2 * n))
    w_leak = np.max(np.abs(gd[..., n, w_cols]), axis=-1, initial=0.0)
    col = gd[..., :, 0].copy()
    col[..., 0] = 0.0
    p_leak = np.max(np.abs(col), axis=-1, initial=0.0)
    return w_leak, p_leak


def chi(g, conv: CoisotropicConvention, tol: float = 1e-7) -> float | np.ndarray:
    """Scalar by which ``g`` acts on ``W^perp``. Accepts stacks."""
    m = _as_array(g)
    gd = conv.to_default(m)
    _, p_leak = _adaptedness(gd, conv.n)
    scale = 1.0 + np.max(np.abs(gd), axis=(-2, -1))
    if np.any(p_leak > tol * scale):
        raise NotAdaptedError(f"g does not preserve W^perp (leak {np.max(p_leak):.3e})")
    out = gd[..., 0, 0]
    return float(out) if np.ndim(out) == 0 else out


def nu(g, conv: CoisotropicConvention, tol: float = 1e-7) -> np.ndarray:
    """Induced map on ``W/W^perp`` in the quotient basis; stacks supported."""
    m = _as_array(g)
    gd = conv.to_default(m)
    w_leak, _ = _adaptedness(gd, conv.n)
    scale = 1.0 + np.max(np.abs(gd), axis=(-2, -1))
    if np.any(w_leak > tol * scale):
        raise NotAdaptedError(f"g does not preserve W (leak {np.max(w_leak):.3e})")
    idx = conv.quotient_indices
    return gd[..., idx, :][..., :, idx]


# -- adapted frames -----------------------------------------------------------


@lru_cache(maxsize=None)
def reference_unitary(n: int, index: int = 0) -> np.ndarray:
    """Deterministic reference basis of ``C^n`` (columns).

    ``index == 0`` is the identity; higher indices are fixed generic unitaries
    used when the identity reference degenerates along an orbit.
    """
    if index == 0:
        u = np.eye(n, dtype=complex)
    else:
        rng = np.random.default_rng(1000 + 7 * index + n)
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        u, _ = np.linalg.qr(a)
    u.setflags(write=False)
    return u


def _frames_complex(gradH: np.ndarray, xi: np.ndarray, ref: np.ndarray, pivot: float):
    """Batched unitary Gram-Schmidt; returns ``(frames, min_pivot)``."""
    n = xi.shape[-1] // 2
    norm = np.linalg.norm(xi, axis=-1)
    if np.any(norm < pivot):
        raise DegenerateFrameError("Hamiltonian vector field vanishes")
    # xi must equal J gradH for the frame to be adapted to ker dH
    Jg = np.concatenate([gradH[..., n:], -gradH[..., :n]], axis=-1)
    if np.max(np.abs(Jg - xi)) > 1e-8 * (1.0 + np.max(np.abs(xi))):
        raise SymplecticError("xi is not the Hamiltonian vector field of gradH")
    # real x_1 corresponds to i e_1, so the x_1 column equals xi when u1 = -i xi_c
    u1 = -1j * (xi[..., n:] + 1j * xi[..., :n])
    u1 = u1 / norm[..., None]
    cols = [u1]
    min_pivot = np.inf
    for j in range(1, n):
        r = np.broadcast_to(ref[:, j], u1.shape).astype(complex)
        for u in cols:
            r = r - u * np.sum(np.conj(u) * r, axis=-1, keepdims=True)
        piv = np.linalg.norm(r, axis=-1)
        mp = float(np.min(piv))
        min_pivot = min(min_pivot, mp)
        if mp < pivot:
            raise DegenerateFrameError(f"Gram-Schmidt pivot {mp:.3e} below floor")
        cols.append(r / piv[..., None])
    U = np.stack(cols, axis=-1)  # (..., n, n) complex unitary
    return from_complex(U), min_pivot


def adapted_frames(gradH, xi, conv: CoisotropicConvention | None = None,
                   reference: int | np.ndarray = 0, pivot: float = PIVOT_FLOOR,
                   return_pivot: bool = False):
    """Vectorized :func:`adapted_frame` over a stack of points ``(N, 2n)``."""
    gradH = np.asarray(gradH, dtype=float)
    xi = np.asarray(xi, dtype=float)
    n = xi.shape[-1] // 2
    ref = reference_unitary(n, reference) if np.isscalar(reference) else np.asarray(reference)
    B, min_pivot = _frames_complex(gradH, xi, ref, pivot)
    if conv is not None and conv.Q is not None:
        B = B @ symplectic_inverse(conv.Q)
    return (B, min_pivot) if return_pivot else B


def adapted_frame(gradH, xi, conv: CoisotropicConvention | None = None,
                  reference: int | np.ndarray = 0, pivot: float = PIVOT_FLOOR) -> np.ndarray:
    """Symplectic frame ``B`` with ``B W^perp = span{xi}`` and ``B W = ker dH``.

    The ``x_1`` column is ``xi/|xi|`` and the ``y_1`` column ``gradH/|gradH|``;
    remaining pairs come from unitary Gram-Schmidt of the reference basis,
    so ``B`` is also orthogonal in the default convention.

    Raises
    ------
    DegenerateFrameError
        If a Gram-Schmidt pivot drops below ``pivot``.
    """
    return adapted_frames(np.asarray(gradH, float)[None], np.asarray(xi, float)[None],
                          conv, reference, pivot)[0]


# -- random generators (tests, property checks) ---------------------------------


def random_hamiltonian_matrix(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """``X = J S`` with ``S`` symmetric, so ``exp(X)`` is symplectic."""
    S = rng.normal(scale=scale, size=(2 * n, 2 * n))
    S = 0.5 * (S + S.T)
    return complex_structure(n) @ S


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    from scipy.linalg import expm

    return expm(random_hamiltonian_matrix(n, rng, scale))
