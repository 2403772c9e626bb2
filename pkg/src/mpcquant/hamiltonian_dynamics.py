"""Hamiltonian systems on R^{2n}: flows, monodromy, closed orbits, actions.

Coordinates are ``(p_1..p_n, q_1..q_n)`` with ``omega = sum dp_j ^ dq_j``.
The Hamiltonian vector field obeys ``xi_H _| omega = dH``, which in these
coordinates is ``xi = (dH/dq, -dH/dp)``.

Polynomial Hamiltonians run on the compiled RK4 kernels (see
:mod:`mpcquant.kernels`); arbitrary callables use a slower numpy path.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq
from scipy.stats import qmc

from . import kernels
from .polynomial import EvaluationPlan, Polynomial, exact_linear_form_exterior_derivative
from .symplectic_core import omega_matrix

log = logging.getLogger(__name__)

__all__ = [
    "IntegrationError",
    "StepSizeError",
    "LevelSetError",
    "ResolutionError",
    "HamiltonianSystem",
    "Trajectory",
    "ClosedOrbit",
    "NonClosing",
    "hamiltonian_vector_field",
    "integrate_flow",
    "integrate_monodromy",
    "detect_closed_orbit",
    "action_integral",
    "level_set_seeds",
    "level_set_point",
    "halton_directions",
    "coordinate_plane_directions",
]

BETA_MODES = ("symmetric", "pdq", "-qdp")
TOL_ORBIT = 1e-8
DEFAULT_STEPS = 2048
K_MAX = 8


class IntegrationError(RuntimeError):
    """The flow produced a non-finite state."""

    def __init__(self, message: str, last_valid_time: float):
        super().__init__(f"{message} (last valid time {last_valid_time:.6g})")
        self.last_valid_time = last_valid_time


class StepSizeError(RuntimeError):
    """Monodromy symplecticity drifted beyond the hard limit."""


class LevelSetError(ValueError):
    """No point of the requested level set was found, or it is not regular there."""


class ResolutionError(ValueError):
    """Too few samples for quadrature."""


def _beta_matrix(n: int, mode: str) -> np.ndarray:
    """Matrix ``A`` with ``beta = sum_ij A_ij x_i dx_j``."""
    A = np.zeros((2 * n, 2 * n))
    for j in range(n):
        p, q = j, n + j
        if mode == "symmetric":
            A[p, q] = 0.5
            A[q, p] = -0.5
        elif mode == "pdq":
            A[p, q] = 1.0
        elif mode == "-qdp":
            A[q, p] = -1.0
        else:
            raise ValueError(f"unknown beta mode {mode!r}; choose from {BETA_MODES}")
    return A


@dataclass(frozen=True, eq=False)
class HamiltonianSystem:
    """Energy function on ``R^{2n}`` with derivatives, primitive and ``hbar``.

    Use :meth:`from_polynomial` for the fast path. With :meth:`from_callables`
    missing derivatives fall back to central finite differences.
    """

    n: int
    H: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray] | None = None
    beta_mode: str = "symmetric"
    hbar: float = 1.0
    name: str = "custom"
    poly: Polynomial | None = None
    plan: EvaluationPlan | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        _beta_matrix(self.n, self.beta_mode)  # validates the mode

    # -- constructors -----------------------------------------------------------
    @classmethod
    def from_polynomial(cls, n: int, poly: Polynomial, name: str = "custom",
                        hbar: float = 1.0, beta_mode: str = "symmetric") -> "HamiltonianSystem":
        if poly.dim != 2 * n:
            raise ValueError(f"polynomial has {poly.dim} variables, expected {2 * n}")
        plan = poly.evaluation_plan()
        d = 2 * n

        def grad(x):
            return kernels.eval_slots(plan.coef, plan.exps, plan.slot, plan.ngrad_terms, d,
                                      np.ascontiguousarray(x, dtype=float))

        def hess(x):
            out = kernels.eval_slots(plan.coef, plan.exps, plan.slot, len(plan.coef),
                                     d + d * d, np.ascontiguousarray(x, dtype=float))
            return out[d:].reshape(d, d)

        return cls(n, poly, grad, hess, beta_mode, hbar, name, poly, plan)

    @classmethod
    def from_callables(cls, n: int, H: Callable, grad: Callable | None = None,
                       hess: Callable | None = None, name: str = "custom",
                       hbar: float = 1.0, beta_mode: str = "symmetric") -> "HamiltonianSystem":
        if grad is None:
            def grad(x, _H=H):
                x = np.asarray(x, float)
                h = 1e-6 * (1.0 + np.linalg.norm(x))
                E = np.eye(x.size) * h
                return np.array([(_H(x + e) - _H(x - e)) / (2 * h) for e in E])
        return cls(n, H, grad, hess, beta_mode, hbar, name)

    def with_hbar(self, hbar: float) -> "HamiltonianSystem":
        return HamiltonianSystem(self.n, self.H, self.grad, self.hess, self.beta_mode, hbar,
                                 self.name, self.poly, self.plan)

    # -- pointwise quantities -----------------------------------------------------
    @property
    def dim(self) -> int:
        return 2 * self.n

    def energy(self, x) -> float:
        return float(self.H(np.asarray(x, float)))

    def gradient(self, x) -> np.ndarray:
        return np.asarray(self.grad(np.asarray(x, float)), dtype=float)

    def hessian(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        if self.hess is not None:
            return np.asarray(self.hess(x), dtype=float)
        h = 1e-6 * (1.0 + np.linalg.norm(x))
        cols = [(self.gradient(x + e) - self.gradient(x - e)) / (2 * h)
                for e in np.eye(self.dim) * h]
        out = np.array(cols).T
        return 0.5 * (out + out.T)

    def vector_field(self, x) -> np.ndarray:
        g = self.gradient(x)
        return np.concatenate([g[self.n:], -g[:self.n]])

    def vector_field_jacobian(self, x) -> np.ndarray:
        Hm = self.hessian(x)
        return np.concatenate([Hm[self.n:], -Hm[:self.n]], axis=0)

    def gradients(self, X: np.ndarray) -> np.ndarray:
        """Gradient at every row of ``X``."""
        X = np.asarray(X, float)
        if self.plan is not None:
            p = self.plan
            k = p.ngrad_terms
            mono = p.coef[:k] * np.prod(X[:, None, :] ** p.exps[None, :k, :], axis=2)
            out = np.zeros((X.shape[0], self.dim))
            np.add.at(out.T, p.slot[:k], mono.T)
            return out
        return np.array([self.gradient(x) for x in X])

    def vector_fields(self, X: np.ndarray) -> np.ndarray:
        G = self.gradients(X)
        return np.concatenate([G[:, self.n:], -G[:, :self.n]], axis=1)

    def energies(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, float)
        if self.poly is not None and self.poly.terms:
            exps = np.array(list(self.poly.terms.keys()), dtype=float)
            coef = np.array(list(self.poly.terms.values()))
            return np.prod(X[:, None, :] ** exps[None], axis=2) @ coef
        return np.array([self.energy(x) for x in X])

    # -- symplectic primitive ---------------------------------------------------
    @property
    def beta_matrix(self) -> np.ndarray:
        return _beta_matrix(self.n, self.beta_mode)

    def beta(self, x, v) -> np.ndarray:
        """``beta_x(v)``; broadcasts over leading axes."""
        x = np.asarray(x, float)
        v = np.asarray(v, float)
        return np.einsum("...i,ij,...j->...", x, self.beta_matrix, v)

    def check_primitive(self) -> bool:
        """Exact check that ``d beta = omega`` for the selected primitive."""
        A = self.beta_matrix
        D = exact_linear_form_exterior_derivative(
            [[_exact(a) for a in row] for row in A])
        target = omega_matrix(self.n)
        return all(D[i, j] == _exact(target[i, j])
                   for i in range(self.dim) for j in range(self.dim))

    def check_gradient(self, points, rtol: float = 1e-5) -> bool:
        """Compare ``grad`` with central differences of ``H`` at ``points``."""
        for x in np.atleast_2d(np.asarray(points, float)):
            h = 1e-5 * (1.0 + np.linalg.norm(x))
            fd = np.array([(self.energy(x + e) - self.energy(x - e)) / (2 * h)
                           for e in np.eye(self.dim) * h])
            g = self.gradient(x)
            if np.max(np.abs(fd - g)) > rtol * (1.0 + np.max(np.abs(g))):
                return False
        return True


def _exact(a: float):
    from fractions import Fraction

    return Fraction(a).limit_denominator(10**6)


def hamiltonian_vector_field(sys: HamiltonianSystem, m) -> np.ndarray:
    """``xi_H(m) = (dH/dq, -dH/dp)``."""
    return sys.vector_field(m)


# -- integration -------------------------------------------------------------------


def _generic_flow(sys, x0, dt, nsteps):
    states = np.empty((nsteps + 1, sys.dim))
    x = np.array(x0, float)
    states[0] = x
    f = sys.vector_field
    nvalid = 1
    for s in range(nsteps):
        k1 = f(x)
        k2 = f(x + 0.5 * dt * k1)
        k3 = f(x + 0.5 * dt * k2)
        k4 = f(x + dt * k3)
        x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        states[s + 1] = x
        if not np.all(np.isfinite(x)):
            break
        nvalid += 1
    return states, nvalid


def _generic_variational(sys, x0, dt, nsteps):
    d = sys.dim
    states = np.empty((nsteps + 1, d))
    phis = np.empty((nsteps + 1, d, d))
    x = np.array(x0, float)
    phi = np.eye(d)
    states[0], phis[0] = x, phi

    def f(x, phi):
        return sys.vector_field(x), sys.vector_field_jacobian(x) @ phi

    nvalid = 1
    for s in range(nsteps):
        k1x, k1p = f(x, phi)
        k2x, k2p = f(x + 0.5 * dt * k1x, phi + 0.5 * dt * k1p)
        k3x, k3p = f(x + 0.5 * dt * k2x, phi + 0.5 * dt * k2p)
        k4x, k4p = f(x + dt * k3x, phi + dt * k3p)
        x = x + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        phi = phi + dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        states[s + 1], phis[s + 1] = x, phi
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(phi))):
            break
        nvalid += 1
    return states, phis, nvalid


def _flow_steps(sys: HamiltonianSystem, x0, dt: float, nsteps: int) -> np.ndarray:
    x0 = np.ascontiguousarray(x0, dtype=float)
    if sys.plan is not None:
        p = sys.plan
        states, nvalid = kernels.rk4_flow(p.coef, p.exps, p.slot, p.ngrad_terms, sys.n,
                                          x0, float(dt), int(nsteps))
    else:
        states, nvalid = _generic_flow(sys, x0, dt, nsteps)
    if nvalid < nsteps + 1:
        raise IntegrationError("flow blew up", (nvalid - 1) * dt)
    return states


def _variational_steps(sys: HamiltonianSystem, x0, dt: float, nsteps: int):
    x0 = np.ascontiguousarray(x0, dtype=float)
    if sys.plan is not None:
        p = sys.plan
        states, phis, nvalid = kernels.rk4_variational(p.coef, p.exps, p.slot, len(p.coef),
                                                       sys.n, x0, float(dt), int(nsteps))
    else:
        states, phis, nvalid = _generic_variational(sys, x0, dt, nsteps)
    if nvalid < nsteps + 1:
        raise IntegrationError("variational integration blew up", (nvalid - 1) * dt)
    return states, phis


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    energy_drift: float


def integrate_flow(sys: HamiltonianSystem, s0, t_end: float, dt: float) -> Trajectory:
    """Classical RK4 samples of the flow from ``s0`` up to ``t_end``.

    The last step is shortened so the grid ends exactly at ``t_end``.
    """
    if dt <= 0 or not np.isfinite(t_end):
        raise ValueError("need dt > 0 and finite t_end")
    nsteps = max(1, int(np.ceil(abs(t_end) / dt - 1e-9)))
    h = t_end / nsteps
    states = _flow_steps(sys, s0, h, nsteps)
    times = np.linspace(0.0, t_end, nsteps + 1)
    E = sys.energies(states)
    return Trajectory(times, states, float(np.max(np.abs(E - E[0]))))


def symplectic_drift(phis: np.ndarray) -> float:
    d = phis.shape[-1]
    Om = omega_matrix(d // 2)
    return float(np.max(np.abs(np.swapaxes(phis, -1, -2) @ Om @ phis - Om)))


def integrate_monodromy(sys: HamiltonianSystem, s0, t_end: float, nsteps: int):
    """Integrate ``dPhi/dt = D xi(c(t)) Phi`` with ``Phi(0) = I``.

    Returns ``(times, states, phis)``.

    Raises
    ------
    StepSizeError
        If ``Phi`` loses symplecticity by more than 1e-4.
    """
    h = t_end / nsteps
    states, phis = _variational_steps(sys, s0, h, nsteps)
    drift = symplectic_drift(phis)
    if drift > 1e-4:
        raise StepSizeError(f"monodromy symplecticity drift {drift:.2e}; reduce the step")
    return np.linspace(0.0, t_end, nsteps + 1), states, phis


# -- closed orbits -------------------------------------------------------------


@dataclass(frozen=True)
class ClosedOrbit:
    """A sampled periodic orbit with its monodromy history."""

    s0: np.ndarray
    period: float
    times: np.ndarray
    states: np.ndarray
    monodromies: np.ndarray
    closure_residual: float
    energy: float
    crossings: int = 1

    @property
    def nsamples(self) -> int:
        return self.states.shape[0]

    @property
    def monodromy(self) -> np.ndarray:
        return self.monodromies[-1]


@dataclass(frozen=True)
class NonClosing:
    """No return to the seed was found within ``t_max``."""

    s0: np.ndarray
    t_max: float
    reason: str
    crossings: int = 0


def _time_scale(sys: HamiltonianSystem, s0: np.ndarray) -> tuple[float, float]:
    """Coarse step and default search horizon from local frequency and speed."""
    xi = sys.vector_field(s0)
    speed = float(np.linalg.norm(xi))
    freq = float(np.linalg.norm(sys.vector_field_jacobian(s0), 2))
    L = 1.0 + float(np.linalg.norm(s0))
    candidates = []
    if freq > 0:
        candidates.append(2 * np.pi / (256 * freq))
    if speed > 0:
        candidates.append(0.02 * L / speed)
    dt = min(candidates) if candidates else 1e-2
    period_guess = 2 * np.pi / freq if freq > 0 else 100 * L / max(speed, 1e-300)
    return dt, 50 * period_guess


def _refine_period(sys, s0, xi0, T, nsteps, iters: int = 10) -> tuple[float, np.ndarray]:
    """Newton iteration on the section-crossing time at fixed resolution."""
    for _ in range(iters):
        x = _flow_steps(sys, s0, T / nsteps, nsteps)[-1]
        r = xi0 @ (x - s0)
        slope = xi0 @ sys.vector_field(x)
        if slope == 0:
            break
        dT = -r / slope
        T += dT
        if abs(dT) < 1e-15 * max(1.0, T):
            break
    return T, _flow_steps(sys, s0, T / nsteps, nsteps)[-1]


def detect_closed_orbit(sys: HamiltonianSystem, s0, t_max: float | None = None,
                        tol: float = TOL_ORBIT, nsteps: int = DEFAULT_STEPS,
                        k_max: int = K_MAX) -> ClosedOrbit | NonClosing:
    """First return of the flow to ``s0`` through the section normal to ``xi(s0)``.

    Positive-direction crossings of the section are examined in order; the
    first one that closes to within ``tol * (1 + |s0|)`` after period refinement
    is accepted. Up to ``k_max`` crossings are examined.
    """
    s0 = np.asarray(s0, dtype=float)
    xi0 = sys.vector_field(s0)
    if np.linalg.norm(xi0) < 1e-12:
        raise LevelSetError("seed is a critical point of H")
    dt, horizon = _time_scale(sys, s0)
    t_max = horizon if t_max is None else float(t_max)
    L = 1.0 + float(np.linalg.norm(s0))
    chunk = 4096
    x = s0.copy()
    t0 = 0.0
    crossings = 0
    first = True
    while t0 < t_max:
        steps = min(chunk, int(np.ceil((t_max - t0) / dt)))
        states = _flow_steps(sys, x, dt, steps)
        sigma = (states - s0) @ xi0
        if first:
            sigma[0] = 0.0
        # positive crossings: sigma goes from < 0 to >= 0; chunks share endpoints
        hits = np.nonzero((sigma[:-1] < 0) & (sigma[1:] >= 0))[0]
        for i in hits:
            crossings += 1
            frac = sigma[i] / (sigma[i] - sigma[i + 1])
            T_guess = t0 + (i + frac) * dt
            approx = states[i] + frac * (states[i + 1] - states[i])
            if np.linalg.norm(approx - s0) < 1e-2 * L:
                orbit = _close_orbit(sys, s0, xi0, T_guess, tol, nsteps * crossings, crossings)
                if orbit is not None:
                    return orbit
            if crossings >= k_max:
                return NonClosing(s0, t_max, f"no closure within {k_max} section crossings",
                                  crossings)
        x = states[-1]
        t0 += steps * dt
        first = False
    return NonClosing(s0, t_max, "no return before t_max", crossings)


def _close_orbit(sys, s0, xi0, T_guess, tol, nsteps, crossings) -> ClosedOrbit | None:
    L = 1.0 + float(np.linalg.norm(s0))
    for _ in range(4):
        T, xT = _refine_period(sys, s0, xi0, T_guess, nsteps)
        residual = float(np.linalg.norm(xT - s0))
        if residual < tol * L:
            break
        if residual > 1e-4 * L:
            return None  # a near miss of a non-closing orbit
        nsteps *= 2
        T_guess = T
        log.debug("closure residual %.2e; doubling to %d steps", residual, nsteps)
    else:
        return None
    times, states, phis = integrate_monodromy(sys, s0, T, nsteps)
    for _ in range(3):
        if symplectic_drift(phis) <= 1e-6:
            break
        nsteps *= 2
        log.debug("monodromy drift too large; doubling to %d steps", nsteps)
        times, states, phis = integrate_monodromy(sys, s0, T, nsteps)
    residual = float(np.linalg.norm(states[-1] - s0))
    return ClosedOrbit(s0.copy(), T, times, states, phis, residual, sys.energy(s0), crossings)


def action_integral(sys: HamiltonianSystem, orbit: ClosedOrbit) -> float:
    """``int_0^T beta(xi_H(c(t))) dt`` by composite Simpson on the orbit samples."""
    if not isinstance(orbit, ClosedOrbit):
        raise TypeError("action_integral needs a ClosedOrbit")
    N = orbit.states.shape[0]
    if N < 16:
        raise ResolutionError(f"need at least 16 samples, got {N}")
    xi = sys.vector_fields(orbit.states)
    y = sys.beta(orbit.states, xi)
    return float(simpson(y, x=orbit.times))


# -- level-set seeding ----------------------------------------------------------


def halton_directions(dim: int, count: int) -> np.ndarray:
    """Deterministic low-discrepancy unit vectors in ``R^dim``."""
    from scipy.stats import norm

    sampler = qmc.Halton(d=dim, scramble=False)
    pts = sampler.random(count + 1)[1:]  # first Halton point is the origin
    g = norm.ppf(np.clip(pts, 1e-12, 1 - 1e-12))
    g[np.all(np.abs(g) < 1e-12, axis=1)] = 1.0
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def coordinate_plane_directions(n: int) -> np.ndarray:
    """Unit directions with the ``(p_j, q_j)`` pair zeroed, one per ``j``."""
    if n < 2:
        return np.zeros((0, 2 * n))
    base = halton_directions(2 * n, n)
    out = []
    for j in range(n):
        v = base[j].copy()
        v[j] = v[n + j] = 0.0
        out.append(v / np.linalg.norm(v))
    return np.array(out)


def level_set_point(sys: HamiltonianSystem, E: float, direction,
                    r_max: float = 1e3, center=None) -> np.ndarray:
    """Point ``center + r d`` with ``H = E``, the smallest such ``r`` on a scan."""
    d = np.asarray(direction, float)
    c = np.zeros(sys.dim) if center is None else np.asarray(center, float)

    def f(r):
        return sys.energy(c + r * d) - E

    radii = np.concatenate([[0.0], np.geomspace(1e-6, r_max, 400)])
    vals = np.array([f(r) for r in radii])
    for i in range(len(radii) - 1):
        if vals[i] == 0.0 and i > 0:
            return c + radii[i] * d
        if vals[i] * vals[i + 1] < 0:
            r = brentq(f, radii[i], radii[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps,
                       maxiter=200)
            return c + r * d
    raise LevelSetError(f"no point with H = {E} along direction within radius {r_max}")


def level_set_seeds(sys: HamiltonianSystem, E: float, count: int = 8,
                    directions: Sequence | np.ndarray | None = None,
                    r_max: float = 1e3) -> np.ndarray:
    """Seeds on ``H = E`` along deterministic directions; non-regular hits are skipped."""
    dirs = halton_directions(sys.dim, count) if directions is None else np.atleast_2d(directions)
    seeds = []
    for d in dirs:
        try:
            x = level_set_point(sys, E, d, r_max)
        except LevelSetError:
            continue
        if np.linalg.norm(sys.gradient(x)) < 1e-10:
            continue
        seeds.append(x)
    if not seeds:
        raise LevelSetError(f"no regular point of the level set H = {E} found")
    return np.array(seeds)
