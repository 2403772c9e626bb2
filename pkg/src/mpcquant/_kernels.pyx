# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 kernels for polynomial Hamiltonians.

Signatures match :mod:`mpcquant._kernels_py` exactly; see that module for the
reference semantics.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport isfinite

cnp.import_array()


cdef inline void _eval_terms(const double[::1] coef, const int[:, ::1] exps,
                             const int[::1] slot, Py_ssize_t nterms,
                             const double* x, Py_ssize_t dim,
                             double* out, Py_ssize_t nslots) noexcept nogil:
    cdef Py_ssize_t k, i, e, m
    cdef double mono
    for k in range(nslots):
        out[k] = 0.0
    for k in range(nterms):
        mono = coef[k]
        for i in range(dim):
            e = exps[k, i]
            for m in range(e):
                mono *= x[i]
        out[slot[k]] += mono


cdef inline void _field(const double* grad, Py_ssize_t n, double* xi) noexcept nogil:
    # xi = (dH/dq, -dH/dp)
    cdef Py_ssize_t j
    for j in range(n):
        xi[j] = grad[n + j]
        xi[n + j] = -grad[j]


def eval_slots(const double[::1] coef, const int[:, ::1] exps, const int[::1] slot,
               Py_ssize_t nterms, Py_ssize_t nslots, const double[::1] x):
    out = np.zeros(nslots, dtype=np.float64)
    cdef double[::1] o = out
    _eval_terms(coef, exps, slot, nterms, &x[0], x.shape[0], &o[0], nslots)
    return out


def rk4_flow(const double[::1] coef, const int[:, ::1] exps, const int[::1] slot,
             Py_ssize_t ngrad_terms, Py_ssize_t n, const double[::1] x0,
             double dt, Py_ssize_t nsteps):
    """Return ``(states, nvalid)``; ``states[:nvalid]`` are finite."""
    cdef Py_ssize_t d = 2 * n
    states_arr = np.empty((nsteps + 1, d), dtype=np.float64)
    cdef double[:, ::1] states = states_arr
    cdef double[::1] x = np.array(x0, dtype=np.float64)
    cdef double[::1] tmp = np.empty(d, dtype=np.float64)
    cdef double[::1] grad = np.empty(d, dtype=np.float64)
    cdef double[:, ::1] k = np.empty((4, d), dtype=np.float64)
    cdef Py_ssize_t s, i, r
    cdef Py_ssize_t nvalid = 1
    cdef double h2 = 0.5 * dt, h6 = dt / 6.0
    cdef bint ok
    for i in range(d):
        states[0, i] = x[i]
    with nogil:
        for s in range(nsteps):
            _eval_terms(coef, exps, slot, ngrad_terms, &x[0], d, &grad[0], d)
            _field(&grad[0], n, &k[0, 0])
            for i in range(d):
                tmp[i] = x[i] + h2 * k[0, i]
            _eval_terms(coef, exps, slot, ngrad_terms, &tmp[0], d, &grad[0], d)
            _field(&grad[0], n, &k[1, 0])
            for i in range(d):
                tmp[i] = x[i] + h2 * k[1, i]
            _eval_terms(coef, exps, slot, ngrad_terms, &tmp[0], d, &grad[0], d)
            _field(&grad[0], n, &k[2, 0])
            for i in range(d):
                tmp[i] = x[i] + dt * k[2, i]
            _eval_terms(coef, exps, slot, ngrad_terms, &tmp[0], d, &grad[0], d)
            _field(&grad[0], n, &k[3, 0])
            ok = True
            for i in range(d):
                x[i] = x[i] + h6 * (k[0, i] + 2.0 * k[1, i] + 2.0 * k[2, i] + k[3, i])
                if not isfinite(x[i]):
                    ok = False
                states[s + 1, i] = x[i]
            if not ok:
                break
            nvalid += 1
    return states_arr, nvalid


cdef inline void _var_rhs(const double[::1] coef, const int[:, ::1] exps,
                          const int[::1] slot, Py_ssize_t nterms, Py_ssize_t n,
                          const double* y, double* dy, double* buf) noexcept nogil:
    # y = (x[d], Phi[d*d] row-major); buf holds d + d*d slots
    cdef Py_ssize_t d = 2 * n
    cdef Py_ssize_t i, j, m, row
    cdef double acc
    cdef const double* hess = buf + d
    _eval_terms(coef, exps, slot, nterms, y, d, buf, d + d * d)
    _field(buf, n, dy)
    # Dxi rows: for j < n row j is Hess[n+j, :]; row n+j is -Hess[j, :]
    for i in range(d):
        if i < n:
            row = n + i
        else:
            row = i - n
        for j in range(d):
            acc = 0.0
            for m in range(d):
                acc += hess[row * d + m] * y[d + m * d + j]
            if i < n:
                dy[d + i * d + j] = acc
            else:
                dy[d + i * d + j] = -acc


def rk4_variational(const double[::1] coef, const int[:, ::1] exps, const int[::1] slot,
                    Py_ssize_t nterms, Py_ssize_t n, const double[::1] x0,
                    double dt, Py_ssize_t nsteps):
    """Return ``(states, phis, nvalid)`` for the flow and its linearization."""
    cdef Py_ssize_t d = 2 * n
    cdef Py_ssize_t m = d + d * d
    states_arr = np.empty((nsteps + 1, d), dtype=np.float64)
    phis_arr = np.empty((nsteps + 1, d, d), dtype=np.float64)
    cdef double[:, ::1] states = states_arr
    cdef double[:, :, ::1] phis = phis_arr
    cdef double[::1] y = np.zeros(m, dtype=np.float64)
    cdef double[::1] tmp = np.empty(m, dtype=np.float64)
    cdef double[::1] buf = np.empty(m, dtype=np.float64)
    cdef double[:, ::1] k = np.empty((4, m), dtype=np.float64)
    cdef Py_ssize_t s, i, j
    cdef Py_ssize_t nvalid = 1
    cdef double h2 = 0.5 * dt, h6 = dt / 6.0
    cdef bint ok
    for i in range(d):
        y[i] = x0[i]
        y[d + i * d + i] = 1.0
    for i in range(d):
        states[0, i] = y[i]
        for j in range(d):
            phis[0, i, j] = y[d + i * d + j]
    with nogil:
        for s in range(nsteps):
            _var_rhs(coef, exps, slot, nterms, n, &y[0], &k[0, 0], &buf[0])
            for i in range(m):
                tmp[i] = y[i] + h2 * k[0, i]
            _var_rhs(coef, exps, slot, nterms, n, &tmp[0], &k[1, 0], &buf[0])
            for i in range(m):
                tmp[i] = y[i] + h2 * k[1, i]
            _var_rhs(coef, exps, slot, nterms, n, &tmp[0], &k[2, 0], &buf[0])
            for i in range(m):
                tmp[i] = y[i] + dt * k[2, i]
            _var_rhs(coef, exps, slot, nterms, n, &tmp[0], &k[3, 0], &buf[0])
            ok = True
            for i in range(m):
                y[i] = y[i] + h6 * (k[0, i] + 2.0 * k[1, i] + 2.0 * k[2, i] + k[3, i])
                if not isfinite(y[i]):
                    ok = False
            for i in range(d):
                states[s + 1, i] = y[i]
                for j in range(d):
                    phis[s + 1, i, j] = y[d + i * d + j]
            if not ok:
                break
            nvalid += 1
    return states_arr, phis_arr, nvalid
