"""The metaplectic-c group in its parameter representation ``(g, mu)``.

An element ``a`` is recorded by ``g = sigma(a)`` and a nonzero complex ``mu``
with ``eta(a) = mu^2 Det_C C_g``. Only central multiplication and continuous
lifting of matrix loops are provided; a general product formula is not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .symplectic_core import det_c, is_symplectic

__all__ = [
    "RefineNeeded",
    "ZeroCrossingError",
    "MpcParameters",
    "LiftedPath",
    "eta",
    "central_mul",
    "epsilon",
    "identity",
    "winding_number",
    "mp_lift_loop",
]

ARG_STEP_GUARD = np.pi / 2
MAX_DOUBLINGS = 4


class RefineNeeded(RuntimeError):
    """Branch tracking saw an argument jump of at least pi/2 between samples."""


class ZeroCrossingError(ValueError):
    """A tracked complex path came within 1e-12 of the origin."""


@dataclass(frozen=True)
class MpcParameters:
    """Parameters ``(g, mu)`` of an element of ``Mp^c(V)``.

    ``mu`` is any nonzero complex number with ``|mu^2 Det_C C_g| = 1``; it need
    not have modulus one.
    """

    g: np.ndarray
    mu: complex
    tol: float = field(default=1e-8, compare=False)

    def __post_init__(self):
        g = np.array(self.g, dtype=float)
        if g.shape[0] and not is_symplectic(g, 1e-8):
            raise ValueError("g is not symplectic")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "mu", complex(self.mu))
        if self.mu == 0:
            raise ValueError("mu must be nonzero")
        if abs(abs(self.mu ** 2 * det_c(g)) - 1.0) > self.tol:
            raise ValueError("|mu^2 Det_C C_g| != 1: not a metaplectic-c element")

    @property
    def n(self) -> int:
        return self.g.shape[0] // 2

    def __eq__(self, other) -> bool:
        if not isinstance(other, MpcParameters):
            return NotImplemented
        return (
            self.g.shape == other.g.shape
            and np.allclose(self.g, other.g, atol=1e-12)
            and abs(self.mu - other.mu) < 1e-12
        )

    __hash__ = None  # type: ignore[assignment]


def identity(n: int) -> MpcParameters:
    return MpcParameters(np.eye(2 * n), 1.0)


def eta(a: MpcParameters) -> complex:
    """Determinant character ``eta(a) = mu^2 Det_C C_g``."""
    return complex(a.mu ** 2 * det_c(a.g))


def central_mul(a: MpcParameters, lam: complex) -> MpcParameters:
    """Parameters of ``a * lam`` for ``lam`` in the central ``U(1)``."""
    if abs(abs(lam) - 1.0) > 1e-12:
        raise ValueError("central factor must lie on the unit circle")
    return MpcParameters(a.g, a.mu * lam, a.tol)


def epsilon(n: int) -> MpcParameters:
    """``eps_n`` with parameters ``(I, e^{-i pi n})`` (exactly +-1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return MpcParameters(np.eye(2 * n), -1.0 if n % 2 else 1.0)


def _cumulative_arg(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) < 1e-12):
        raise ZeroCrossingError("path passes too close to 0")
    steps = np.angle(z[1:] / z[:-1])
    if steps.size and np.max(np.abs(steps)) >= ARG_STEP_GUARD:
        raise RefineNeeded(f"argument step {np.max(np.abs(steps)):.3f} >= pi/2")
    return np.concatenate([[0.0], np.cumsum(steps)])


def winding_number(z_samples: Sequence[complex], closed: bool = True) -> int:
    """Accumulated argument of a sampled path divided by ``2 pi``, rounded.

    Raises
    ------
    RefineNeeded
        If consecutive samples differ in argument by pi/2 or more.
    ZeroCrossingError
        If any sample has modulus below 1e-12.
    """
    z = np.asarray(z_samples, dtype=complex)
    if closed and abs(z[-1] - z[0]) > 1e-8 * max(1.0, abs(z[0])):
        raise ValueError("path is not closed")
    total = _cumulative_arg(z)[-1]
    return int(np.rint(total / (2 * np.pi)))


@dataclass(frozen=True)
class LiftedPath:
    """A continuous lift of a matrix loop to ``Mp(V)``."""

    times: np.ndarray
    g_samples: np.ndarray
    mu_samples: np.ndarray
    end_parity: int
    winding: int


def _sqrt_branch(values: np.ndarray) -> np.ndarray:
    """Continuous square root along a sampled path (nearest-branch continuation)."""
    r = np.sqrt(values.astype(complex))
    if r.size < 2:
        return r
    # flip sign whenever the principal root jumps away from its predecessor
    flips = np.real(r[1:] * np.conj(r[:-1])) < 0
    sign = np.concatenate([[1.0], np.where(flips, -1.0, 1.0)])
    return r * np.cumprod(sign)


def _lift_once(g_samples: np.ndarray, times: np.ndarray | None) -> LiftedPath:
    g = np.asarray(g_samples, dtype=float)
    dim = g.shape[-1]
    if times is None:
        times = np.linspace(0.0, 1.0, g.shape[0])
    if dim == 0:
        ones = np.ones(g.shape[0], dtype=complex)
        return LiftedPath(times, g, ones, 1, 0)
    if np.max(np.abs(g[-1] - g[0])) > 1e-6 * (1.0 + np.max(np.abs(g[0]))):
        raise ValueError("matrix path is not closed")
    d = np.asarray(det_c(g), dtype=complex)
    w = winding_number(d, closed=False)  # raises RefineNeeded on coarse sampling
    # continuous branch of Det_C^{-1/2}, rotated to start at |det(0)|^{-1/2} > 0;
    # mu^2 Det_C is then the constant conj(phase of det(0))
    mu = _sqrt_branch(1.0 / d)
    mu = mu * (abs(mu[0]) / mu[0])
    ratio = mu[-1] / mu[0] * np.sqrt(abs(d[-1]) / abs(d[0]))
    parity = 1 if ratio.real > 0 else -1
    return LiftedPath(times, g, mu, parity, w)


def mp_lift_loop(
    g_samples,
    times: np.ndarray | None = None,
    resample: Callable[[int], tuple[np.ndarray, np.ndarray]] | None = None,
) -> LiftedPath:
    """Lift a closed symplectic loop to ``Mp(V)`` by continuing ``Det_C^{-1/2}``.

    ``end_parity`` is ``mu(T)/mu(0)`` normalized to +-1, which equals
    ``(-1)^winding``. If branch tracking fails and ``resample`` is given, it is
    called with the doubling count (1..4) and must return ``(g_samples, times)``
    at ``2^k`` times the resolution.
    """
    try:
        return _lift_once(np.asarray(g_samples), times)
    except RefineNeeded:
        if resample is None:
            raise
    last: Exception | None = None
    for k in range(1, MAX_DOUBLINGS + 1):
        g2, t2 = resample(k)
        try:
            return _lift_once(g2, t2)
        except RefineNeeded as exc:
            last = exc
    raise RefineNeeded(f"branch tracking failed after {MAX_DOUBLINGS} doublings") from last
