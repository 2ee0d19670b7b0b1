# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled split-step hot loops; same contract as ``_kernels_py``.

Complex arithmetic is spelled out on (re, im) pairs so the compiler keeps
everything in registers.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef double complex cplx


cdef inline void _rhs(double* xr, double* xi, double* g, double* outr, double* outi) noexcept nogil:
    cdef double p0 = xr[0] * xr[0] + xi[0] * xi[0]
    cdef double p1 = xr[1] * xr[1] + xi[1] * xi[1]
    cdef double p2 = xr[2] * xr[2] + xi[2] * xi[2]
    cdef double p3 = xr[3] * xr[3] + xi[3] * xi[3]
    cdef double tot2 = 2.0 * (p0 + p1 + p2 + p3)
    cdef double sr = xr[2] * xr[3] - xi[2] * xi[3]
    cdef double sm = xr[2] * xi[3] + xi[2] * xr[3]
    cdef double qr = xr[0] * xr[1] - xi[0] * xi[1]
    cdef double qm = xr[0] * xi[1] + xi[0] * xr[1]
    cdef double re, im
    # p1: Ψ + 2 conj(p2) s i
    re = (tot2 - p0) * xr[0] + 2.0 * (xr[1] * sr + xi[1] * sm)
    im = (tot2 - p0) * xi[0] + 2.0 * (xr[1] * sm - xi[1] * sr)
    outr[0] = -g[0] * im
    outi[0] = g[0] * re
    # p2: Ψ + 2 conj(p1) s i
    re = (tot2 - p1) * xr[1] + 2.0 * (xr[0] * sr + xi[0] * sm)
    im = (tot2 - p1) * xi[1] + 2.0 * (xr[0] * sm - xi[0] * sr)
    outr[1] = -g[1] * im
    outi[1] = g[1] * re
    # s: Ψ + 2 p1 p2 conj(i)
    re = (tot2 - p2) * xr[2] + 2.0 * (qr * xr[3] + qm * xi[3])
    im = (tot2 - p2) * xi[2] + 2.0 * (qm * xr[3] - qr * xi[3])
    outr[2] = -g[2] * im
    outi[2] = g[2] * re
    # i: Ψ + 2 p1 p2 conj(s)
    re = (tot2 - p3) * xr[3] + 2.0 * (qr * xr[2] + qm * xi[2])
    im = (tot2 - p3) * xi[3] + 2.0 * (qm * xr[2] - qr * xi[2])
    outr[3] = -g[3] * im
    outi[3] = g[3] * re


def nonlinear_rk4(cplx[:, :, ::1] a, double[::1] gamma, double h):
    cdef Py_ssize_t n = a.shape[2], gi, f, t
    cdef double xr[4]
    cdef double xi[4]
    cdef double yr[4]
    cdef double yi[4]
    cdef double k1r[4]
    cdef double k1i[4]
    cdef double k2r[4]
    cdef double k2i[4]
    cdef double k3r[4]
    cdef double k3i[4]
    cdef double k4r[4]
    cdef double k4i[4]
    cdef double g[4]
    cdef double acc[4]
    cdef double dr, di, h2 = 0.5 * h, h6 = h / 6.0
    for f in range(4):
        g[f] = gamma[f]
        acc[f] = 0.0
    with nogil:
        for gi in range(2):
            for t in range(n):
                for f in range(4):
                    xr[f] = a[gi, f, t].real
                    xi[f] = a[gi, f, t].imag
                _rhs(xr, xi, g, k1r, k1i)
                for f in range(4):
                    yr[f] = xr[f] + h2 * k1r[f]
                    yi[f] = xi[f] + h2 * k1i[f]
                _rhs(yr, yi, g, k2r, k2i)
                for f in range(4):
                    yr[f] = xr[f] + h2 * k2r[f]
                    yi[f] = xi[f] + h2 * k2i[f]
                _rhs(yr, yi, g, k3r, k3i)
                for f in range(4):
                    yr[f] = xr[f] + h * k3r[f]
                    yi[f] = xi[f] + h * k3i[f]
                _rhs(yr, yi, g, k4r, k4i)
                for f in range(4):
                    dr = h6 * (k1r[f] + 2.0 * (k2r[f] + k3r[f]) + k4r[f])
                    di = h6 * (k1i[f] + 2.0 * (k2i[f] + k3i[f]) + k4i[f])
                    acc[f] += 2.0 * (xr[f] * dr + xi[f] * di) + dr * dr + di * di
                    a[gi, f, t] = (xr[f] + dr) + 1j * (xi[f] + di)
    out = np.empty(4)
    for f in range(4):
        out[f] = acc[f] / n
    return out


def apply_linear(cplx[:, :, ::1] spec, cplx[:, ::1] u11, cplx[:, ::1] u12, cplx[:, ::1] u22):
    cdef Py_ssize_t n = spec.shape[2], f, t
    cdef cplx xa, xb
    with nogil:
        for f in range(4):
            for t in range(n):
                xa = spec[0, f, t]
                xb = spec[1, f, t]
                spec[0, f, t] = u11[f, t] * xa + u12[f, t] * xb
                spec[1, f, t] = u12[f, t] * xa + u22[f, t] * xb
