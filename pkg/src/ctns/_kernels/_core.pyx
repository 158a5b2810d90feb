# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels.

Elementwise kernels perform exactly the same floating point operations in the
same order as the numpy fallback (compiled with -ffp-contract=off), so field
trajectories are bitwise identical across backends.  Reductions use straight
loops and may differ from numpy's pairwise sums at roundoff; they only feed
diagnostics.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log, sqrt

cnp.import_array()

ctypedef cnp.float64_t f64
ctypedef cnp.complex128_t c128


def semigroup_apply(const c128[:, ::1] f, const f64[:, ::1] decay):
    cdef Py_ssize_t n0 = f.shape[0], n1 = f.shape[1], i, j
    out_arr = np.empty((n0, n1), dtype=np.complex128)
    cdef c128[:, ::1] out = out_arr
    cdef f64 d
    for i in range(n0):
        for j in range(n1):
            d = decay[i, j]
            out[i, j].real = d * f[i, j].real
            out[i, j].imag = d * f[i, j].imag
    return out_arr


def semigroup_combine(const c128[:, ::1] f, const c128[:, ::1] g, const f64[:, ::1] decay, double dt):
    cdef Py_ssize_t n0 = f.shape[0], n1 = f.shape[1], i, j
    out_arr = np.empty((n0, n1), dtype=np.complex128)
    cdef c128[:, ::1] out = out_arr
    cdef f64 d
    for i in range(n0):
        for j in range(n1):
            d = decay[i, j]
            out[i, j].real = d * (f[i, j].real - dt * g[i, j].real)
            out[i, j].imag = d * (f[i, j].imag - dt * g[i, j].imag)
    return out_arr


def semigroup_combine_noise(const c128[:, ::1] f, const c128[:, ::1] g, const c128[:, ::1] noise,
                            const f64[:, ::1] decay, double dt):
    cdef Py_ssize_t n0 = f.shape[0], n1 = f.shape[1], i, j
    out_arr = np.empty((n0, n1), dtype=np.complex128)
    cdef c128[:, ::1] out = out_arr
    cdef f64 d
    for i in range(n0):
        for j in range(n1):
            d = decay[i, j]
            out[i, j].real = d * (f[i, j].real - dt * g[i, j].real + noise[i, j].real)
            out[i, j].imag = d * (f[i, j].imag - dt * g[i, j].imag + noise[i, j].imag)
    return out_arr


def spectral_gradient(const c128[:, ::1] f, const f64[:, ::1] kxd, const f64[:, ::1] kyd):
    cdef Py_ssize_t n0 = f.shape[0], n1 = f.shape[1], i, j
    gx_arr = np.empty((n0, n1), dtype=np.complex128)
    gy_arr = np.empty((n0, n1), dtype=np.complex128)
    cdef c128[:, ::1] gx = gx_arr
    cdef c128[:, ::1] gy = gy_arr
    cdef f64 fr, fi
    for i in range(n0):
        for j in range(n1):
            fr = f[i, j].real
            fi = f[i, j].imag
            gx[i, j].real = -(kxd[i, j] * fi)
            gx[i, j].imag = kxd[i, j] * fr
            gy[i, j].real = -(kyd[i, j] * fi)
            gy[i, j].imag = kyd[i, j] * fr
    return gx_arr, gy_arr


def flux_divergence(const c128[:, ::1] fx, const c128[:, ::1] fy, const f64[:, ::1] kxd,
                    const f64[:, ::1] kyd, const f64[:, ::1] mask):
    cdef Py_ssize_t n0 = fx.shape[0], n1 = fx.shape[1], i, j
    out_arr = np.empty((n0, n1), dtype=np.complex128)
    cdef c128[:, ::1] out = out_arr
    for i in range(n0):
        for j in range(n1):
            out[i, j].real = -((kxd[i, j] * fx[i, j].imag + kyd[i, j] * fy[i, j].imag) * mask[i, j])
            out[i, j].imag = (kxd[i, j] * fx[i, j].real + kyd[i, j] * fy[i, j].real) * mask[i, j]
    return out_arr


def masked_scale(const c128[:, ::1] f, const f64[:, ::1] mask):
    cdef Py_ssize_t n0 = f.shape[0], n1 = f.shape[1], i, j
    out_arr = np.empty((n0, n1), dtype=np.complex128)
    cdef c128[:, ::1] out = out_arr
    for i in range(n0):
        for j in range(n1):
            out[i, j].real = f[i, j].real * mask[i, j]
            out[i, j].imag = f[i, j].imag * mask[i, j]
    return out_arr


def leray_project(const c128[:, ::1] ux, const c128[:, ::1] uy, const f64[:, ::1] kx,
                  const f64[:, ::1] ky, const f64[:, ::1] inv_ksq):
    cdef Py_ssize_t n0 = ux.shape[0], n1 = ux.shape[1], i, j
    outx_arr = np.empty((n0, n1), dtype=np.complex128)
    outy_arr = np.empty((n0, n1), dtype=np.complex128)
    cdef c128[:, ::1] outx = outx_arr
    cdef c128[:, ::1] outy = outy_arr
    cdef f64 pr, pi, a, b
    for i in range(n0):
        for j in range(n1):
            a = kx[i, j]
            b = ky[i, j]
            pr = (a * ux[i, j].real + b * uy[i, j].real) * inv_ksq[i, j]
            pi = (a * ux[i, j].imag + b * uy[i, j].imag) * inv_ksq[i, j]
            outx[i, j].real = ux[i, j].real - a * pr
            outx[i, j].imag = ux[i, j].imag - a * pi
            outy[i, j].real = uy[i, j].real - b * pr
            outy[i, j].imag = uy[i, j].imag - b * pi
    return outx_arr, outy_arr


def multiply(const f64[:, ::1] a, const f64[:, ::1] b):
    cdef Py_ssize_t n0 = a.shape[0], n1 = a.shape[1], i, j
    out_arr = np.empty((n0, n1), dtype=np.float64)
    cdef f64[:, ::1] out = out_arr
    for i in range(n0):
        for j in range(n1):
            out[i, j] = a[i, j] * b[i, j]
    return out_arr


def transport_flux(const f64[:, ::1] n, const f64[:, ::1] u, const f64[:, ::1] chi, const f64[:, ::1] g):
    cdef Py_ssize_t n0 = n.shape[0], n1 = n.shape[1], i, j
    out_arr = np.empty((n0, n1), dtype=np.float64)
    cdef f64[:, ::1] out = out_arr
    for i in range(n0):
        for j in range(n1):
            out[i, j] = n[i, j] * (u[i, j] + chi[i, j] * g[i, j])
    return out_arr


def vector_max(const f64[:, ::1] ax, const f64[:, ::1] ay):
    cdef Py_ssize_t n0 = ax.shape[0], n1 = ax.shape[1], i, j
    cdef f64 best = 0.0, v
    for i in range(n0):
        for j in range(n1):
            v = sqrt(ax[i, j] * ax[i, j] + ay[i, j] * ay[i, j])
            if v > best:
                best = v
    return best


def scaled_vector_max(const f64[:, ::1] s, const f64[:, ::1] ax, const f64[:, ::1] ay):
    cdef Py_ssize_t n0 = ax.shape[0], n1 = ax.shape[1], i, j
    cdef f64 best = 0.0, v
    for i in range(n0):
        for j in range(n1):
            v = s[i, j] * sqrt(ax[i, j] * ax[i, j] + ay[i, j] * ay[i, j])
            if v > best:
                best = v
    return best


def nlogn_sum(const f64[:, ::1] n, double eps):
    cdef Py_ssize_t n0 = n.shape[0], n1 = n.shape[1], i, j
    cdef f64 total = 0.0, x, arg
    cdef long floored = 0
    for i in range(n0):
        for j in range(n1):
            x = n[i, j]
            if x < eps:
                floored += 1
            if x < 0.0:
                x = 0.0
            arg = x if x > eps else eps
            total += x * log(arg)
    return total, floored


def hessian_defect_sum(const f64[:, ::1] hxx, const f64[:, ::1] hxy, const f64[:, ::1] hyy,
                       const f64[:, ::1] gx, const f64[:, ::1] gy, const f64[:, ::1] w):
    cdef Py_ssize_t n0 = hxx.shape[0], n1 = hxx.shape[1], i, j
    cdef f64 total = 0.0, dxx, dxy, dyy
    for i in range(n0):
        for j in range(n1):
            dxx = hxx[i, j] - w[i, j] * gx[i, j] * gx[i, j]
            dxy = hxy[i, j] - w[i, j] * gx[i, j] * gy[i, j]
            dyy = hyy[i, j] - w[i, j] * gy[i, j] * gy[i, j]
            total += dxx * dxx + 2.0 * (dxy * dxy) + dyy * dyy
    return total


def quartic_cross_sums(const f64[:, ::1] gx, const f64[:, ::1] gy, const f64[:, ::1] n):
    cdef Py_ssize_t n0 = gx.shape[0], n1 = gx.shape[1], i, j
    cdef f64 quart = 0.0, cross = 0.0, g2, x
    for i in range(n0):
        for j in range(n1):
            g2 = gx[i, j] * gx[i, j] + gy[i, j] * gy[i, j]
            quart += g2 * g2
            x = n[i, j]
            if x < 0.0:
                x = 0.0
            cross += x * g2
    return quart, cross
