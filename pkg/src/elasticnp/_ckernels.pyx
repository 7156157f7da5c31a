# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the loops in ``_pykernels`` (same signatures)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, M_PI

cnp.import_array()

N_ROWS = 17


def kernel_rows_3d(double[:, ::1] X, double[:, :, ::1] Y, double[:, :, ::1] NY,
                   double[:, ::1] W):
    cdef Py_ssize_t T = Y.shape[0], Q = Y.shape[1], t, q
    out_arr = np.empty((T, 17, Q))
    cdef double[:, :, ::1] out = out_arr
    cdef double d0, d1, d2, n0, n1, n2, r2, r, ir3, dn, s, w
    cdef double fp = 4.0 * M_PI
    for t in range(T):
        for q in range(Q):
            d0 = X[t, 0] - Y[t, q, 0]
            d1 = X[t, 1] - Y[t, q, 1]
            d2 = X[t, 2] - Y[t, q, 2]
            n0 = NY[t, q, 0]
            n1 = NY[t, q, 1]
            n2 = NY[t, q, 2]
            w = W[t, q]
            r2 = d0 * d0 + d1 * d1 + d2 * d2
            r = sqrt(r2)
            ir3 = w / (fp * r * r2)
            dn = d0 * n0 + d1 * n1 + d2 * n2
            out[t, 0, q] = -w / (fp * r)
            out[t, 1, q] = -d0 * d0 * ir3
            out[t, 2, q] = -d0 * d1 * ir3
            out[t, 3, q] = -d0 * d2 * ir3
            out[t, 4, q] = -d1 * d1 * ir3
            out[t, 5, q] = -d1 * d2 * ir3
            out[t, 6, q] = -d2 * d2 * ir3
            out[t, 7, q] = -dn * ir3
            out[t, 8, q] = (d0 * n1 - n0 * d1) * ir3
            out[t, 9, q] = (d0 * n2 - n0 * d2) * ir3
            out[t, 10, q] = (d1 * n2 - n1 * d2) * ir3
            s = dn * ir3 / r2
            out[t, 11, q] = s * d0 * d0
            out[t, 12, q] = s * d0 * d1
            out[t, 13, q] = s * d0 * d2
            out[t, 14, q] = s * d1 * d1
            out[t, 15, q] = s * d1 * d2
            out[t, 16, q] = s * d2 * d2
    return out_arr


def potential_terms(double[:, ::1] targets, double[:, ::1] src, double[:, ::1] nrm,
                    double[::1] w, double[:, ::1] dens, chunk=256):
    cdef Py_ssize_t P = targets.shape[0], N = src.shape[0], m = targets.shape[1]
    cdef Py_ssize_t p, q, k, ncurl = 1 if m == 2 else 3
    cdef Py_ssize_t base = 2 * m + 1 + ncurl
    out_arr = np.zeros((P, 4 * m + 1 + ncurl))
    cdef double[:, ::1] out = out_arr
    cdef double d[3]
    cdef double ps[3]
    cdef double nn[3]
    cdef double r2, r, g0, irm, wg, dpsi, dn, npsi
    cdef double om = 2.0 * M_PI if m == 2 else 4.0 * M_PI
    for p in range(P):
        for q in range(N):
            r2 = 0.0
            dpsi = 0.0
            dn = 0.0
            npsi = 0.0
            for k in range(m):
                d[k] = targets[p, k] - src[q, k]
                ps[k] = dens[q, k]
                nn[k] = nrm[q, k]
                r2 += d[k] * d[k]
                dpsi += d[k] * ps[k]
                dn += d[k] * nn[k]
                npsi += nn[k] * ps[k]
            if r2 == 0.0:
                raise ValueError("evaluation point coincides with a quadrature node")
            if m == 2:
                g0 = log(r2) / (4.0 * M_PI)
                irm = 1.0 / (om * r2)
            else:
                r = sqrt(r2)
                g0 = -1.0 / (om * r)
                irm = 1.0 / (om * r * r2)
            wg = w[q] * irm
            for k in range(m):
                out[p, k] += w[q] * g0 * ps[k]
                out[p, m + k] -= dpsi * wg * d[k]
                out[p, base + k] -= dn * wg * ps[k]
                out[p, base + m + k] += wg * (npsi * d[k] - dpsi * nn[k])
            out[p, 2 * m] += dpsi * wg
            if m == 2:
                out[p, 2 * m + 1] += wg * (d[0] * ps[1] - d[1] * ps[0])
            else:
                out[p, 7] += wg * (d[1] * ps[2] - d[2] * ps[1])
                out[p, 8] += wg * (d[2] * ps[0] - d[0] * ps[2])
                out[p, 9] += wg * (d[0] * ps[1] - d[1] * ps[0])
    return out_arr
