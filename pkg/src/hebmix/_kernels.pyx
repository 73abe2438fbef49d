# cython: language_level=3
"""Compiled hot kernels: heat-bath sweeps and 2^n state enumeration.

Semantics match ``_fallback.py``; see there for the argument contract.
"""

from libc.math cimport exp, log, INFINITY

import numpy as np

NAME = "cython"


def run_chain(const double[:, ::1] bool_t, const double[:, ::1] gauss_t,
              const double[::1] diag, double const0, signed char[::1] sigma,
              double[::1] mm, double[::1] gg, double beta,
              const long[:, ::1] perms, const double[:, ::1] unifs, int metropolis,
              double[:, ::1] m_out, double[::1] e_out, sig_out, hist):
    cdef Py_ssize_t n = sigma.shape[0]
    cdef Py_ssize_t k = mm.shape[0]
    cdef Py_ssize_t p = gg.shape[0]
    cdef Py_ssize_t nsweeps = perms.shape[0]
    cdef double inv_n = 1.0 / n
    cdef long accepted = 0
    cdef Py_ssize_t b, j, i, nu, mu
    cdef double si, h, prob, x, de, delta, acc
    cdef long idx

    cdef signed char[:, ::1] sig_view = sig_out if sig_out is not None else None
    cdef long[::1] hist_view = hist if hist is not None else None
    cdef bint want_sig = sig_out is not None
    cdef bint want_hist = hist is not None

    for b in range(nsweeps):
        for j in range(n):
            i = perms[b, j]
            si = sigma[i]
            h = 0.0
            for nu in range(k):
                h += bool_t[i, nu] * mm[nu]
            for mu in range(p):
                h += gauss_t[i, mu] * gg[mu]
            h = (h - si * diag[i]) * inv_n
            if metropolis:
                de = 2.0 * si * h
                if de <= 0.0:
                    prob = 1.0
                else:
                    x = beta * de
                    prob = 0.0 if x > 700.0 else exp(-x)
            else:
                x = 2.0 * beta * si * h
                if x > 700.0:
                    prob = 0.0
                elif x < -700.0:
                    prob = 1.0
                else:
                    prob = 1.0 / (1.0 + exp(x))
            if unifs[b, j] < prob:
                delta = -2.0 * si
                sigma[i] = -sigma[i]
                for nu in range(k):
                    mm[nu] += bool_t[i, nu] * delta
                for mu in range(p):
                    gg[mu] += gauss_t[i, mu] * delta
                accepted += 1
        acc = 0.0
        for nu in range(k):
            m_out[b, nu] = mm[nu]
            acc += mm[nu] * mm[nu]
        for mu in range(p):
            acc += gg[mu] * gg[mu]
        e_out[b] = -(acc - const0) * inv_n * 0.5
        if want_sig:
            for i in range(n):
                sig_view[b, i] = sigma[i]
        if want_hist:
            idx = 0
            for i in range(n):
                if sigma[i] > 0:
                    idx |= 1 << i
            hist_view[idx] += 1
    return accepted


def enum_logz(const double[:, ::1] boolean, const double[:, ::1] gaussian, double coef,
              const double[::1] sub_b, const double[::1] sub_g):
    """Gray-code enumeration: one spin flip per step, O(k + p) per state."""
    cdef Py_ssize_t k = boolean.shape[0]
    cdef Py_ssize_t p = gaussian.shape[0]
    cdef Py_ssize_t n = boolean.shape[1] if k > 0 else gaussian.shape[1]
    cdef unsigned long long total = 1ULL << n
    cdef unsigned long long t
    cdef Py_ssize_t i, nu, mu, j
    cdef double expo, cmx, acc, delta

    sig_arr = np.full(n, -1.0)
    m_arr = -np.asarray(boolean).sum(axis=1) if k else np.zeros(0)
    g_arr = -np.asarray(gaussian).sum(axis=1) if p else np.zeros(0)
    cdef double[::1] sig = sig_arr
    cdef double[::1] m = np.ascontiguousarray(m_arr)
    cdef double[::1] g = np.ascontiguousarray(g_arr)

    expo = 0.0
    for nu in range(k):
        expo += m[nu] * m[nu] - sub_b[nu]
    for mu in range(p):
        expo += g[mu] * g[mu] - sub_g[mu]
    expo *= coef
    cmx = expo
    acc = 1.0

    for t in range(1, total):
        j = 0
        while not (t >> j) & 1:
            j += 1
        delta = -2.0 * sig[j]
        sig[j] = -sig[j]
        for nu in range(k):
            m[nu] += boolean[nu, j] * delta
        for mu in range(p):
            g[mu] += gaussian[mu, j] * delta
        expo = 0.0
        for nu in range(k):
            expo += m[nu] * m[nu] - sub_b[nu]
        for mu in range(p):
            expo += g[mu] * g[mu] - sub_g[mu]
        expo *= coef
        if expo <= cmx:
            acc += exp(expo - cmx)
        else:
            acc = acc * exp(cmx - expo) + 1.0
            cmx = expo
    return cmx + log(acc)
