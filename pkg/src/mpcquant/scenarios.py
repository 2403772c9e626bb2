"""Built-in Hamiltonians.

With ``s_j = (p_j^2 + q_j^2) / 2``:

* ``harmonic``: ``H = s_1 + ... + s_n``
* ``shifted_harmonic``: ``H_1 = s_1 + s_2 - k`` (n = 2)
* ``product_hamiltonian``: ``H_2 = (s_1 + s_2 - k)(s_1 + 2 s_2 + 1)`` (n = 2)
* ``composed``: ``f(H)`` for the harmonic ``H`` and a polynomial ``f``
* ``custom``: an explicit polynomial in ``p1..pn, q1..qn``
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .hamiltonian_dynamics import HamiltonianSystem
from .polynomial import Polynomial, univariate_from_string

__all__ = [
    "SCENARIOS",
    "action_variables",
    "harmonic",
    "shifted_harmonic",
    "product_hamiltonian",
    "composed",
    "custom",
    "compose_energy",
    "polar_frame",
    "polar_frame_constant",
    "build",
]

SCENARIOS = ("harmonic", "shifted_harmonic", "product_hamiltonian", "composed", "custom")


def action_variables(n: int) -> list[Polynomial]:
    """``[s_1, ..., s_n]`` as polynomials."""
    d = 2 * n
    out = []
    for j in range(n):
        p = Polynomial.variable(d, j)
        q = Polynomial.variable(d, n + j)
        out.append(0.5 * (p * p + q * q))
    return out


def _harmonic_poly(n: int) -> Polynomial:
    total = Polynomial.constant(2 * n, 0.0)
    for s in action_variables(n):
        total = total + s
    return total


def harmonic(n: int, hbar: float = 1.0) -> HamiltonianSystem:
    return HamiltonianSystem.from_polynomial(n, _harmonic_poly(n), "harmonic", hbar)


def shifted_harmonic(k: float, hbar: float = 1.0, n: int = 2) -> HamiltonianSystem:
    if n != 2:
        raise ValueError("shifted_harmonic is defined for n = 2")
    s1, s2 = action_variables(2)
    return HamiltonianSystem.from_polynomial(2, s1 + s2 - k, "shifted_harmonic", hbar)


def product_hamiltonian(k: float, hbar: float = 1.0, n: int = 2) -> HamiltonianSystem:
    if n != 2:
        raise ValueError("product_hamiltonian is defined for n = 2")
    s1, s2 = action_variables(2)
    poly = (s1 + s2 - k) * (s1 + 2.0 * s2 + 1.0)
    return HamiltonianSystem.from_polynomial(2, poly, "product_hamiltonian", hbar)


def _coefficients(f: str | Sequence[float]) -> list[float]:
    return univariate_from_string(f) if isinstance(f, str) else [float(c) for c in f]


def compose_energy(f: str | Sequence[float], E: float) -> float:
    """``f(E)`` for ``f`` given as text or ascending coefficients."""
    return float(sum(c * E ** k for k, c in enumerate(_coefficients(f))))


def composed(n: int, f: str | Sequence[float], hbar: float = 1.0) -> HamiltonianSystem:
    """``f(H)`` for the harmonic ``H``; ``f`` is text like ``"x^3+2x"`` or coefficients."""
    poly = _harmonic_poly(n).compose_univariate(_coefficients(f))
    return HamiltonianSystem.from_polynomial(n, poly, "composed", hbar)


def custom(n: int, H: str | Sequence, hbar: float = 1.0) -> HamiltonianSystem:
    """Explicit polynomial: an expression string or ``[[coef, [exponents]], ...]``."""
    if isinstance(H, str):
        poly = Polynomial.from_expression(n, H)
    else:
        poly = Polynomial.from_terms(2 * n, [(c, e) for c, e in H])
    if poly.degree < 1:
        raise ValueError("custom Hamiltonian must be non-constant")
    return HamiltonianSystem.from_polynomial(n, poly, "custom", hbar)


def build(scenario: str, n: int = 1, hbar: float = 1.0, k: float | None = None,
          f: str | Sequence[float] | None = None, H=None) -> HamiltonianSystem:
    """Construct a scenario by name."""
    if scenario == "harmonic":
        return harmonic(n, hbar)
    if scenario in ("shifted_harmonic", "product_hamiltonian"):
        if k is None:
            raise ValueError(f"{scenario} needs the parameter k")
        maker = shifted_harmonic if scenario == "shifted_harmonic" else product_hamiltonian
        return maker(k, hbar, n)
    if scenario == "composed":
        if f is None:
            raise ValueError("composed needs the parameter f")
        return composed(n, f, hbar)
    if scenario == "custom":
        if H is None:
            raise ValueError("custom needs the Hamiltonian H")
        return custom(n, H, hbar)
    raise ValueError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")


def polar_frame(s0: Sequence[float], tau) -> np.ndarray:
    """Frame of the action-angle chart along the torus loop ``theta_j = tau``.

    Blocks ``[[diag(cos/r), diag(sin/r)], [diag(-r sin), diag(r cos)]]`` with
    ``r_j = sqrt(2 s0_j)``; accepts scalar or array ``tau``.
    """

    r = np.sqrt(2.0 * np.asarray(s0, dtype=float))
    t = np.asarray(tau, dtype=float)
    c, s = np.cos(t)[..., None], np.sin(t)[..., None]
    n = r.size
    out = np.zeros(t.shape + (2 * n, 2 * n))
    idx = np.arange(n)
    out[..., idx, idx] = c / r
    out[..., idx, n + idx] = s / r
    out[..., n + idx, idx] = -s * r
    out[..., n + idx, n + idx] = c * r
    return out


def polar_frame_constant(s0: Sequence[float]) -> float:
    """``K = prod_j (sqrt(2 s0_j) + 1/sqrt(2 s0_j)) / 2``."""

    r = np.sqrt(2.0 * np.asarray(s0, dtype=float))
    return float(np.prod(0.5 * (r + 1.0 / r)))
