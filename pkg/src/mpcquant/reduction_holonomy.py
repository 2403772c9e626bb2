"""Holonomy of the reduced prequantization connection over closed orbits.

Along a closed orbit ``c`` of period ``T`` with monodromy history ``Phi(t)``,
an adapted frame section ``b(t)`` (``b W = T S``, ``b W^perp = span xi``) turns
the lifted flow into a path ``g(t) = b(t)^{-1} Phi(t) b(0)`` in ``Sp(V; W)``
and a reduced path ``G(t) = nu(g(t))`` in ``Sp(W/W^perp)``. The reduced orbit
closes when ``G(kT) = I``. Its holonomy is

    lambda = w_b * p * exp(i A / hbar)          (metaplectic-c)
    lambda = exp(i A / hbar)                    (Kostant-Souriau)

where ``A`` is the action of ``beta`` over the (k-fold) orbit, ``w_b`` the
end parity of the Mp-lift of the frame loop ``b``, and ``p`` the end parity of
the Mp-lift of the reduced loop ``G``. Here ``exp(iA/hbar)`` is the same as
``exp(-A/(i hbar))``.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .hamiltonian_dynamics import (
    DEFAULT_STEPS,
    K_MAX,
    ClosedOrbit,
    HamiltonianSystem,
    LevelSetError,
    NonClosing,
    action_integral,
    coordinate_plane_directions,
    detect_closed_orbit,
    halton_directions,
    level_set_point,
    level_set_seeds,
)
from .mpc_group import RefineNeeded, mp_lift_loop
from .symplectic_core import (
    CoisotropicConvention,
    DegenerateFrameError,
    NotAdaptedError,
    adapted_frame,
    adapted_frames,
    chi,
    nu,
    symplectic_inverse,
)

log = logging.getLogger(__name__)

__all__ = [
    "Mode",
    "Tolerances",
    "PrequantizationModel",
    "FrameSection",
    "ReducedLoop",
    "HolonomyResult",
    "OrbitRecord",
    "QuantizationReport",
    "ScanEntry",
    "ScanReport",
    "InvarianceReport",
    "LoopNotClosed",
    "frame_section",
    "reduced_monodromy_loop",
    "holonomy",
    "evaluate_orbit",
    "is_quantized",
    "energy_scan",
    "invariance_check",
    "full_vs_reduced_monodromy",
    "orbit_hausdorff",
]

REFERENCE_CANDIDATES = (0, 1, 2, 3, 4)


class Mode(str, enum.Enum):
    MPC = "mpc"
    KS = "ks"


class LoopNotClosed(RuntimeError):
    """The reduced loop does not close within ``k_max`` period multiples."""


@dataclass(frozen=True)
class Tolerances:
    sp: float = 1e-9
    orbit: float = 1e-8
    reduced: float = 1e-6
    trivial: float = 1e-6
    adapted: float = 1e-7
    pivot: float = 1e-10
    frame_jump: float = 0.25

    def updated(self, **kw) -> "Tolerances":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


@dataclass(frozen=True)
class PrequantizationModel:
    """A Hamiltonian system with its trivial prequantization on ``R^{2n}``.

    The connection in the global trivialization is
    ``(1/i hbar) beta + (1/2) eta_* theta_0`` in metaplectic-c mode and
    ``(1/i hbar) beta + theta_0`` in Kostant-Souriau mode.
    """

    sys: HamiltonianSystem
    mode: Mode = Mode.MPC
    hbar: float | None = None
    conv: CoisotropicConvention | None = None
    tol: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.hbar is None:
            object.__setattr__(self, "hbar", self.sys.hbar)
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        if self.conv is None:
            object.__setattr__(self, "conv", CoisotropicConvention.default(self.sys.n))

    @property
    def connection(self) -> str:
        if self.mode is Mode.MPC:
            return "(1/i hbar) Pi^* beta + 1/2 eta_* theta_0"
        return "(1/i hbar) Pi^* beta + theta_0"


# -- frame sections -----------------------------------------------------------------


@dataclass(frozen=True)
class FrameSection:
    frames: np.ndarray  # (N+1, 2n, 2n), frames[-1] is frames[0]
    reference: int
    min_pivot: float
    max_jump: float


def frame_section(sys: HamiltonianSystem, orbit: ClosedOrbit,
                  conv: CoisotropicConvention | None = None,
                  reference: int | None = None,
                  tol: Tolerances = Tolerances()) -> FrameSection:
    """Closed adapted frame path along ``orbit``.

    Tries the deterministic reference bases in order (or only ``reference``)
    until Gram-Schmidt stays above the pivot floor and consecutive frames stay
    within the continuity guard.
    """
    grads = sys.gradients(orbit.states)
    xis = sys.vector_fields(orbit.states)
    candidates = REFERENCE_CANDIDATES if reference is None else (reference,)
    last: Exception | None = None
    for ref in candidates:
        try:
            B, min_pivot = adapted_frames(grads, xis, conv, ref, tol.pivot, return_pivot=True)
        except DegenerateFrameError as exc:
            log.debug("reference %d degenerate: %s", ref, exc)
            last = exc
            continue
        jump = float(np.max(np.abs(np.diff(B, axis=0)))) if len(B) > 1 else 0.0
        if jump > tol.frame_jump:
            last = DegenerateFrameError(f"frame jump {jump:.3f} with reference {ref}")
            continue
        if np.max(np.abs(B[-1] - B[0])) > 1e-6 * (1.0 + np.max(np.abs(B[0]))):
            raise ValueError("frame section does not close; orbit closure is too loose")
        B[-1] = B[0]
        return FrameSection(B, ref, min_pivot, jump)
    raise DegenerateFrameError(f"no usable reference basis along the orbit: {last}")


# -- reduced loops ------------------------------------------------------------------


@dataclass(frozen=True)
class ReducedLoop:
    orbit: ClosedOrbit
    frames: np.ndarray  # frame loop over the k-fold orbit
    transported: np.ndarray  # g(t)
    quotient_loop: np.ndarray  # nu(g(t))
    chi: np.ndarray
    closure_defect: float
    multiplicity: int
    times: np.ndarray
    conv: CoisotropicConvention
    section: FrameSection

    @property
    def full_monodromy(self) -> np.ndarray:
        """``h = B0^{-1} Phi(T) B0`` for one traversal."""
        return self.transported[self.orbit.nsamples - 1]


def _tile(arr: np.ndarray, k: int) -> np.ndarray:
    if k == 1:
        return arr
    return np.concatenate([arr] + [arr[1:]] * (k - 1), axis=0)


def reduced_monodromy_loop(sys: HamiltonianSystem, orbit: ClosedOrbit, section: FrameSection,
                           conv: CoisotropicConvention | None = None,
                           k_max: int = K_MAX, tol: Tolerances = Tolerances(),
                           right_translate: np.ndarray | None = None) -> ReducedLoop:
    """Transport the frame at ``c(0)`` around the orbit and reduce to ``W/W^perp``.

    ``right_translate`` replaces every frame ``b(t)`` by ``b(t) h0`` for a fixed
    ``h0`` in ``Sp(V; W)`` (a gauge change of the section).

    Raises
    ------
    NotAdaptedError
        If numerical drift takes ``g(t)`` out of ``Sp(V; W)``.
    LoopNotClosed
        If ``nu(h)^k`` stays away from ``I`` for ``k = 1..k_max``.
    """
    conv = conv or CoisotropicConvention.default(sys.n)
    B = section.frames
    if right_translate is not None:
        B = B @ right_translate
    g = symplectic_inverse(B) @ orbit.monodromies @ B[0]
    chis = np.atleast_1d(chi(g, conv, tol.adapted))
    if np.any(chis <= 0):
        raise NotAdaptedError("chi changed sign along the transported loop")
    Gbar = nu(g, conv, tol.adapted)
    h = g[-1]
    nh = Gbar[-1]
    m = nh.shape[-1]
    power = np.eye(m)
    defect = np.inf
    for k in range(1, k_max + 1):
        power = power @ nh
        defect = float(np.max(np.abs(power - np.eye(m)), initial=0.0))
        if defect < tol.reduced:
            break
    else:
        raise LoopNotClosed(f"reduced monodromy does not close within {k_max} periods "
                            f"(defect {defect:.3e})")
    if k > 1:
        hp = [np.linalg.matrix_power(h, j) for j in range(k)]
        npow = [np.linalg.matrix_power(nh, j) for j in range(k)]
        g = np.concatenate([g] + [g[1:] @ hp[j] for j in range(1, k)], axis=0)
        Gbar = np.concatenate([Gbar] + [Gbar[1:] @ npow[j] for j in range(1, k)], axis=0)
        chis = np.concatenate([chis] + [chis[1:] * chis[-1] ** j for j in range(1, k)])
    T = orbit.period
    times = np.concatenate([orbit.times] + [orbit.times[1:] + j * T for j in range(1, k)])
    return ReducedLoop(orbit, _tile(B, k), g, Gbar, chis, defect, k, times, conv, section)


# -- holonomy ---------------------------------------------------------------------


@dataclass(frozen=True)
class HolonomyResult:
    lam: complex
    action: float
    parity_frame: int
    parity_reduced: int
    mode: Mode
    trivial: bool
    tol: float
    multiplicity: int = 1
    winding_frame: int = 0
    winding_reduced: int = 0

    @property
    def arg(self) -> float:
        return float(np.angle(self.lam))


def holonomy(model: PrequantizationModel, loop: ReducedLoop) -> HolonomyResult:
    """Holonomy phase of the reduced connection around an accepted reduced loop."""
    if loop.closure_defect >= model.tol.reduced:
        raise LoopNotClosed("reduced loop not accepted")
    A = loop.multiplicity * action_integral(model.sys, loop.orbit)
    phase = np.exp(1j * A / model.hbar)
    if model.mode is Mode.KS:
        lam = complex(phase)
        return HolonomyResult(lam, A, 1, 1, model.mode, abs(lam - 1) < model.tol.trivial,
                              model.tol.trivial, loop.multiplicity)
    frame_lift = mp_lift_loop(loop.frames, loop.times)
    reduced_lift = mp_lift_loop(loop.quotient_loop, loop.times)
    w, p = frame_lift.end_parity, reduced_lift.end_parity
    lam = complex(w * p * phase)
    return HolonomyResult(lam, A, w, p, model.mode, abs(lam - 1) < model.tol.trivial,
                          model.tol.trivial, loop.multiplicity, frame_lift.winding,
                          reduced_lift.winding)


# -- per-orbit pipeline ------------------------------------------------------------


@dataclass(frozen=True)
class OrbitRecord:
    seed: np.ndarray
    status: str  # "closed" | "nonclosing" | "reduced-nonclosing"
    period: float | None = None
    action: float | None = None
    parity_frame: int | None = None
    parity_reduced: int | None = None
    lam: complex | None = None
    trivial: bool | None = None
    multiplicity: int | None = None
    closure_defect: float | None = None
    reference: int | None = None
    orbit: ClosedOrbit | None = field(default=None, repr=False, compare=False)
    loop: ReducedLoop | None = field(default=None, repr=False, compare=False)

    def to_json(self) -> dict:
        def num(v, kind=float):
            return None if v is None else kind(v)

        return {
            "seed": [float(v) for v in self.seed],
            "status": self.status,
            "period": num(self.period),
            "action": num(self.action),
            "parity_frame": num(self.parity_frame, int),
            "parity_reduced": num(self.parity_reduced, int),
            "lambda": None if self.lam is None else {"re": float(self.lam.real),
                                                     "im": float(self.lam.imag)},
            "trivial": num(self.trivial, bool),
            "multiplicity": num(self.multiplicity, int),
            "closure_defect": num(self.closure_defect),
        }


def evaluate_orbit(model: PrequantizationModel, s0, nsteps: int = DEFAULT_STEPS,
                   reference: int | None = None, right_translate: np.ndarray | None = None,
                   t_max: float | None = None, k_max: int = K_MAX) -> OrbitRecord:
    """Closed-orbit detection, reduction and holonomy for one seed.

    Branch-tracking or adaptedness failures trigger up to four resolution
    doublings.
    """
    sys = model.sys
    s0 = np.asarray(s0, dtype=float)
    last: Exception | None = None
    for attempt in range(5):
        steps = nsteps * 2 ** attempt
        orbit = detect_closed_orbit(sys, s0, t_max=t_max, tol=model.tol.orbit, nsteps=steps,
                                    k_max=k_max)
        if isinstance(orbit, NonClosing):
            return OrbitRecord(s0, "nonclosing")
        try:
            section = frame_section(sys, orbit, model.conv, reference, model.tol)
            loop = reduced_monodromy_loop(sys, orbit, section, model.conv, k_max, model.tol,
                                          right_translate)
        except LoopNotClosed:
            return OrbitRecord(s0, "reduced-nonclosing", period=orbit.period, orbit=orbit)
        except NotAdaptedError as exc:
            log.debug("refining orbit %s: %s", s0, exc)
            last = exc
            continue
        try:
            res = holonomy(model, loop)
        except RefineNeeded as exc:
            log.debug("refining orbit %s: %s", s0, exc)
            last = exc
            continue
        return OrbitRecord(s0, "closed", orbit.period, res.action, res.parity_frame,
                           res.parity_reduced, res.lam, res.trivial, res.multiplicity,
                           loop.closure_defect, section.reference, orbit, loop)
    raise RuntimeError(f"orbit evaluation failed after refinement: {last}")


# -- quantization verdicts --------------------------------------------------------


@dataclass(frozen=True)
class QuantizationReport:
    energy: float
    mode: Mode
    quantized: bool
    records: list[OrbitRecord]

    @property
    def closed(self) -> list[OrbitRecord]:
        return [r for r in self.records if r.status == "closed"]

    @property
    def nonclosing(self) -> int:
        return sum(r.status != "closed" for r in self.records)


def is_quantized(model: PrequantizationModel, E: float, seeds: int = 8,
                 directions: np.ndarray | None = None, nsteps: int = DEFAULT_STEPS,
                 ) -> QuantizationReport:
    """Check trivial holonomy on every detected closed reduced loop at ``H = E``.

    Orbits that do not close (in ``M`` or in the reduced frame bundle) are
    reported and do not affect the verdict.
    """
    points = level_set_seeds(model.sys, E, seeds, directions)
    records = [evaluate_orbit(model, x, nsteps) for x in points]
    verdict = all(r.trivial for r in records if r.status == "closed")
    return QuantizationReport(float(E), model.mode, verdict, records)


@dataclass(frozen=True)
class ScanEntry:
    energy: float
    lam: complex | None
    trivial: bool | None
    quantized: bool | None
    status: str

    @property
    def arg(self) -> float | None:
        return None if self.lam is None else float(np.angle(self.lam))


@dataclass(frozen=True)
class ScanReport:
    mode: Mode
    entries: list[ScanEntry]
    levels: list[float]
    level_residuals: list[float]


def _representative(model, E, direction, nsteps) -> OrbitRecord:
    x = level_set_point(model.sys, E, direction)
    return evaluate_orbit(model, x, nsteps)


def energy_scan(model: PrequantizationModel, E_grid: Sequence[float], seeds: int = 1,
                nsteps: int = DEFAULT_STEPS, refine: bool = True) -> ScanReport:
    """Tabulate the holonomy over a sorted energy grid and locate quantized levels.

    The representative orbit for every energy lies on a fixed ray, so ``arg
    lambda`` varies continuously with ``E``; levels are zeros of ``arg lambda``
    refined with Brent's method between sign changes.
    """
    grid = np.asarray(E_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty energy grid")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("energy grid must be strictly increasing")
    directions = halton_directions(model.sys.dim, max(seeds, 1))
    rep_dir = directions[0]
    entries: list[ScanEntry] = []
    for E in grid:
        try:
            if seeds > 1:
                rep = is_quantized(model, E, seeds, directions, nsteps)
                first = next((r for r in rep.records if r.status == "closed"), None)
                lam = first.lam if first else None
                triv = first.trivial if first else None
                entries.append(ScanEntry(float(E), lam, triv, rep.quantized,
                                         first.status if first else "nonclosing"))
            else:
                r = _representative(model, E, rep_dir, nsteps)
                entries.append(ScanEntry(float(E), r.lam, r.trivial,
                                         r.trivial if r.status == "closed" else True, r.status))
        except LevelSetError:
            entries.append(ScanEntry(float(E), None, None, None, "irregular"))

    def arg_at(E):
        r = _representative(model, E, rep_dir, nsteps)
        if r.lam is None:
            raise RuntimeError(f"representative orbit at E={E} is {r.status}")
        return float(np.angle(r.lam))

    levels: list[float] = []
    for e in entries:
        if e.trivial:
            levels.append(e.energy)
    if refine:
        for a, b in zip(entries[:-1], entries[1:]):
            if a.lam is None or b.lam is None:
                continue
            fa, fb = a.arg, b.arg
            if abs(fa) >= np.pi / 2 or abs(fb) >= np.pi / 2 or fa * fb > 0:
                continue
            if fa == 0.0 or fb == 0.0:
                continue
            root = brentq(arg_at, a.energy, b.energy, xtol=1e-13, rtol=1e-14)
            levels.append(root)
    levels.sort()
    merged: list[float] = []
    for L in levels:
        if merged and abs(L - merged[-1]) < 1e-6 * max(1.0, abs(L)):
            # prefer the refined value over the grid value
            if abs(arg_at(L)) < abs(arg_at(merged[-1])):
                merged[-1] = L
            continue
        merged.append(L)
    residuals = []
    for L in merged:
        r = _representative(model, L, rep_dir, nsteps)
        residuals.append(float(abs(r.lam - 1)) if r.lam is not None else float("nan"))
    return ScanReport(model.mode, entries, merged, residuals)


# -- dynamical invariance ---------------------------------------------------------


def _hermite_distance(points: np.ndarray, ys: np.ndarray, ms: np.ndarray) -> np.ndarray:
    """Distance from each point to the cubic Hermite curve through ``ys``."""
    out = np.empty(len(points))
    N = len(ys)
    for idx, a in enumerate(points):
        i = int(np.argmin(np.sum((ys - a) ** 2, axis=1)))
        best = np.linalg.norm(ys[i] - a)
        for j0 in (i - 1, i):
            if j0 < 0 or j0 + 1 >= N:
                continue
            y0, y1, m0, m1 = ys[j0], ys[j0 + 1], ms[j0], ms[j0 + 1]
            s = 1.0 if j0 == i - 1 else 0.0
            for _ in range(12):
                h = np.array([2 * s**3 - 3 * s**2 + 1, s**3 - 2 * s**2 + s,
                              -2 * s**3 + 3 * s**2, s**3 - s**2])
                dh = np.array([6 * s**2 - 6 * s, 3 * s**2 - 4 * s + 1,
                               -6 * s**2 + 6 * s, 3 * s**2 - 2 * s])
                ddh = np.array([12 * s - 6, 6 * s - 4, -12 * s + 6, 6 * s - 2])
                P = h[0] * y0 + h[1] * m0 + h[2] * y1 + h[3] * m1
                dP = dh[0] * y0 + dh[1] * m0 + dh[2] * y1 + dh[3] * m1
                ddP = ddh[0] * y0 + ddh[1] * m0 + ddh[2] * y1 + ddh[3] * m1
                g = (P - a) @ dP
                dg = dP @ dP + (P - a) @ ddP
                if dg <= 0:
                    break
                s_new = min(1.0, max(0.0, s - g / dg))
                if abs(s_new - s) < 1e-15:
                    s = s_new
                    break
                s = s_new
            h = np.array([2 * s**3 - 3 * s**2 + 1, s**3 - 2 * s**2 + s,
                          -2 * s**3 + 3 * s**2, s**3 - s**2])
            P = h[0] * y0 + h[1] * m0 + h[2] * y1 + h[3] * m1
            best = min(best, float(np.linalg.norm(P - a)))
        out[idx] = best
    return out


def orbit_hausdorff(sys1: HamiltonianSystem, orbit1: ClosedOrbit,
                    sys2: HamiltonianSystem, orbit2: ClosedOrbit, stride: int = 16) -> float:
    """Symmetric Hausdorff distance between two sampled closed curves.

    Sample points of each orbit (every ``stride``-th) are measured against the
    cubic Hermite interpolant of the other, so differing time parametrizations
    of the same curve give distances at interpolation-error level.
    """
    def tangents(sys, orbit):
        dt = orbit.times[1] - orbit.times[0]
        return sys.vector_fields(orbit.states) * dt

    d12 = _hermite_distance(orbit1.states[::stride], orbit2.states, tangents(sys2, orbit2))
    d21 = _hermite_distance(orbit2.states[::stride], orbit1.states, tangents(sys1, orbit1))
    return float(max(d12.max(), d21.max()))


@dataclass(frozen=True)
class SeedComparison:
    seed: np.ndarray
    record1: OrbitRecord
    record2: OrbitRecord
    hausdorff: float | None
    lambda_gap: float | None

    @property
    def agree(self) -> bool:
        if self.record1.status != self.record2.status:
            return False
        if self.record1.status != "closed":
            return True
        return (self.hausdorff is not None and self.hausdorff < 1e-6
                and self.lambda_gap is not None and self.lambda_gap < 1e-6
                and self.record1.trivial == self.record2.trivial)


@dataclass(frozen=True)
class InvarianceReport:
    energies: tuple[float, float]
    comparisons: list[SeedComparison]
    quantized1: bool
    quantized2: bool

    @property
    def agree(self) -> bool:
        return self.quantized1 == self.quantized2 and all(c.agree for c in self.comparisons)


def default_invariance_directions(n: int, count: int) -> np.ndarray:
    """Coordinate-plane directions first (seeds outside the polar chart), then Halton."""
    planes = coordinate_plane_directions(n)
    rest = halton_directions(2 * n, max(count - len(planes), 0))
    return np.concatenate([planes, rest])[:max(count, len(planes))]


def invariance_check(model1: PrequantizationModel, model2: PrequantizationModel,
                     shared_level: tuple[float, float], seeds: int = 8,
                     directions: np.ndarray | None = None,
                     nsteps: int = DEFAULT_STEPS) -> InvarianceReport:
    """Compare verdicts and per-orbit holonomies of two Hamiltonians on a shared level set.

    Raises
    ------
    LevelSetError
        If a seed on ``H1 = E1`` is not on ``H2 = E2`` to within 1e-8.
    """
    E1, E2 = shared_level
    if model1.sys.dim != model2.sys.dim:
        raise ValueError("systems live on different phase spaces")
    dirs = default_invariance_directions(model1.sys.n, seeds) if directions is None else directions
    points = level_set_seeds(model1.sys, E1, len(dirs), dirs)
    comparisons = []
    for x in points:
        r1 = abs(model1.sys.energy(x) - E1)
        r2 = abs(model2.sys.energy(x) - E2)
        if r1 >= 1e-8 or r2 >= 1e-8:
            raise LevelSetError(f"level sets disagree at seed {x}: |H1-E1|={r1:.2e}, "
                                f"|H2-E2|={r2:.2e}")
        rec1 = evaluate_orbit(model1, x, nsteps)
        rec2 = evaluate_orbit(model2, x, nsteps)
        haus = gap = None
        if rec1.status == rec2.status == "closed":
            haus = orbit_hausdorff(model1.sys, rec1.orbit, model2.sys, rec2.orbit)
            gap = float(abs(rec1.lam - rec2.lam))
        comparisons.append(SeedComparison(x, rec1, rec2, haus, gap))
    q1 = all(c.record1.trivial for c in comparisons if c.record1.status == "closed")
    q2 = all(c.record2.trivial for c in comparisons if c.record2.status == "closed")
    return InvarianceReport((float(E1), float(E2)), comparisons, q1, q2)


def full_vs_reduced_monodromy(sys: HamiltonianSystem, orbit: ClosedOrbit,
                              conv: CoisotropicConvention | None = None,
                              reference: int | None = None) -> tuple[float, float]:
    """Defects ``(|h - I|, |nu(h) - I|)`` of ``h = B0^{-1} Phi(T) B0`` (max-abs norm)."""
    if not isinstance(orbit, ClosedOrbit):
        raise TypeError("a closed orbit is required")
    conv = conv or CoisotropicConvention.default(sys.n)
    s0 = orbit.s0
    last: Exception | None = None
    for ref in (REFERENCE_CANDIDATES if reference is None else (reference,)):
        try:
            B0 = adapted_frame(sys.gradient(s0), sys.vector_field(s0), conv, ref)
            break
        except DegenerateFrameError as exc:
            last = exc
    else:
        raise DegenerateFrameError(str(last))
    h = symplectic_inverse(B0) @ orbit.monodromy @ B0
    nh = nu(h, conv)
    full = float(np.max(np.abs(h - np.eye(h.shape[0]))))
    reduced = float(np.max(np.abs(nh - np.eye(nh.shape[0])), initial=0.0))
    return full, reduced
