"""Brute-force holonomy by direct transport of the metaplectic parameter.

In the global trivialization the horizontal lift of a flow line starting at
the frame ``B0`` has symplectic part ``Phi(t) B0`` and a parameter ``mu(t)``
fixed by continuity and

    mu(t)^2 Det_C C_{Phi(t) B0} = mu(0)^2 Det_C C_{B0} exp(2 i A(t) / hbar),

with ``A(t)`` the running action of ``beta``. When the flow returns to the
identity after one period, ``mu(T)/mu(0)`` is the holonomy of the full
(unreduced) connection. That value equals the reduced holonomy whenever
``Phi(T) = I``, which makes it an independent check of the factored formula.
This module shares only the RK4 kernels with the main pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonian_dynamics import HamiltonianSystem, _variational_steps
from .symplectic_core import cayley_component

__all__ = ["OracleResult", "transport_oracle"]

ORACLE_STEPS = 2 ** 16


@dataclass(frozen=True)
class OracleResult:
    lam: complex
    action: float
    monodromy_defect: float
    steps: int


def transport_oracle(sys: HamiltonianSystem, s0, period: float, steps: int = ORACLE_STEPS,
                     start_frame: np.ndarray | None = None, mode: str = "mpc",
                     hbar: float | None = None) -> OracleResult:
    """Holonomy ``mu(T)/mu(0)`` from fine-step transport along one period.

    Parameters
    ----------
    period : float
        Return time of the orbit through ``s0``.
    start_frame : ndarray, optional
        Symplectic frame ``B0``; the identity by default. The result does not
        depend on it when ``Phi(T) = I``.
    mode : {"mpc", "ks"}
        In Kostant-Souriau mode the fibre parameter is the phase alone.
    """
    hbar = sys.hbar if hbar is None else hbar
    s0 = np.asarray(s0, dtype=float)
    dt = period / steps
    states, phis = _variational_steps(sys, s0, dt, steps)
    t = np.arange(steps + 1) * dt
    # running action by the trapezoid rule on the fine grid
    integrand = sys.beta(states, sys.vector_fields(states))
    A = np.concatenate([[0.0], np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(t))])
    defect = float(np.max(np.abs(phis[-1] - np.eye(sys.dim))))
    if mode == "ks":
        return OracleResult(complex(np.exp(1j * A[-1] / hbar)), float(A[-1]), defect, steps)
    B0 = np.eye(sys.dim) if start_frame is None else np.asarray(start_frame, float)
    C = cayley_component(phis @ B0)
    det = np.linalg.det(C)
    target = det[0] * np.exp(2j * A / hbar)  # mu^2 Det_C with mu(0) = 1
    mu = np.empty(steps + 1, dtype=complex)
    mu[0] = 1.0
    for i in range(1, steps + 1):
        r = np.sqrt(target[i] / det[i])
        mu[i] = r if (r * np.conj(mu[i - 1])).real >= 0 else -r
    return OracleResult(complex(mu[-1] / mu[0]), float(A[-1]), defect, steps)
