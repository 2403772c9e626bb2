"""Pure-Python (numpy) reference implementation of the integration kernels.

Used when the compiled :mod:`mpcquant._kernels` extension is unavailable or
``MPCQUANT_PURE_PYTHON=1`` is set. Every function here has the same signature
and return layout as its compiled counterpart.
"""

import numpy as np


def eval_slots(coef, exps, slot, nterms, nslots, x):
    """Accumulate ``coef[k] * prod(x ** exps[k])`` into ``out[slot[k]]``."""
    x = np.asarray(x, dtype=float)
    if nterms == 0:
        return np.zeros(nslots)
    e = exps[:nterms]
    # overflow is detected by the callers' finiteness checks
    with np.errstate(over="ignore", invalid="ignore"):
        mono = coef[:nterms] * np.prod(x[None, :] ** e, axis=1)
    return np.bincount(slot[:nterms], weights=mono, minlength=nslots)[:nslots]


def _field(grad, n):
    return np.concatenate([grad[n:], -grad[:n]])


@np.errstate(over="ignore", invalid="ignore")
def rk4_flow(coef, exps, slot, ngrad_terms, n, x0, dt, nsteps):
    d = 2 * n
    states = np.empty((nsteps + 1, d))
    x = np.array(x0, dtype=float)
    states[0] = x

    def f(y):
        return _field(eval_slots(coef, exps, slot, ngrad_terms, d, y), n)

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


@np.errstate(over="ignore", invalid="ignore")
def rk4_variational(coef, exps, slot, nterms, n, x0, dt, nsteps):
    d = 2 * n
    states = np.empty((nsteps + 1, d))
    phis = np.empty((nsteps + 1, d, d))
    x = np.array(x0, dtype=float)
    phi = np.eye(d)
    states[0] = x
    phis[0] = phi
    perm = np.r_[np.arange(n, d), np.arange(n)]
    sign = np.r_[np.ones(n), -np.ones(n)][:, None]

    def f(x, phi):
        buf = eval_slots(coef, exps, slot, nterms, d + d * d, x)
        hess = buf[d:].reshape(d, d)
        dxi = sign * hess[perm]
        return _field(buf[:d], n), dxi @ phi

    nvalid = 1
    for s in range(nsteps):
        k1x, k1p = f(x, phi)
        k2x, k2p = f(x + 0.5 * dt * k1x, phi + 0.5 * dt * k1p)
        k3x, k3p = f(x + 0.5 * dt * k2x, phi + 0.5 * dt * k2p)
        k4x, k4p = f(x + dt * k3x, phi + dt * k3p)
        x = x + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        phi = phi + dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        states[s + 1] = x
        phis[s + 1] = phi
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(phi))):
            break
        nvalid += 1
    return states, phis, nvalid
