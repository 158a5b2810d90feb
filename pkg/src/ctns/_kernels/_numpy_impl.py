"""Pure numpy implementations of the hot kernels.

Elementwise kernels mirror the compiled core operation for operation (same
multiplies, same adds, in the same order, explicit real/imaginary arithmetic)
so field trajectories are bitwise identical whichever backend is active.
Reduction kernels may differ from the compiled core at roundoff because numpy
uses pairwise summation; they feed diagnostics only.
"""

from __future__ import annotations

import numpy as np

# -- elementwise spectral kernels (trajectory-feeding, fixed operation order) --


def semigroup_apply(f, decay):
    """decay * f for complex f and real decay."""
    out = np.empty_like(f)
    out.real[:] = decay * f.real
    out.imag[:] = decay * f.imag
    return out


def semigroup_combine(f, g, decay, dt):
    """decay * (f - dt * g)."""
    out = np.empty_like(f)
    out.real[:] = decay * (f.real - dt * g.real)
    out.imag[:] = decay * (f.imag - dt * g.imag)
    return out


def semigroup_combine_noise(f, g, noise, decay, dt):
    """decay * (f - dt * g + noise)."""
    out = np.empty_like(f)
    out.real[:] = decay * (f.real - dt * g.real + noise.real)
    out.imag[:] = decay * (f.imag - dt * g.imag + noise.imag)
    return out


def spectral_gradient(f, kxd, kyd):
    """(i * kxd * f, i * kyd * f) with explicit component arithmetic."""
    gx = np.empty_like(f)
    gy = np.empty_like(f)
    gx.real[:] = -(kxd * f.imag)
    gx.imag[:] = kxd * f.real
    gy.real[:] = -(kyd * f.imag)
    gy.imag[:] = kyd * f.real
    return gx, gy


def flux_divergence(fx, fy, kxd, kyd, mask):
    """i * (kxd * fx + kyd * fy) * mask."""
    out = np.empty_like(fx)
    out.real[:] = -((kxd * fx.imag + kyd * fy.imag) * mask)
    out.imag[:] = (kxd * fx.real + kyd * fy.real) * mask
    return out


def masked_scale(f, mask):
    """f * mask for complex f and real mask."""
    out = np.empty_like(f)
    out.real[:] = f.real * mask
    out.imag[:] = f.imag * mask
    return out


def leray_project(ux, uy, kx, ky, inv_ksq):
    """Remove the gradient part of (ux, uy); inv_ksq is 0 at the zero mode."""
    pr = (kx * ux.real + ky * uy.real) * inv_ksq
    pi = (kx * ux.imag + ky * uy.imag) * inv_ksq
    outx = np.empty_like(ux)
    outy = np.empty_like(uy)
    outx.real[:] = ux.real - kx * pr
    outx.imag[:] = ux.imag - kx * pi
    outy.real[:] = uy.real - ky * pr
    outy.imag[:] = uy.imag - ky * pi
    return outx, outy


# -- elementwise physical kernels --


def multiply(a, b):
    return np.multiply(a, b)


def transport_flux(n, u, chi, g):
    """n * (u + chi * g), one flux component."""
    return n * (u + chi * g)


# -- reductions (diagnostics and guards only) --


def vector_max(ax, ay):
    """max over cells of sqrt(ax^2 + ay^2)."""
    return float(np.max(np.sqrt(ax * ax + ay * ay)))


def scaled_vector_max(s, ax, ay):
    """max over cells of s * sqrt(ax^2 + ay^2)."""
    return float(np.max(s * np.sqrt(ax * ax + ay * ay)))


def nlogn_sum(n, eps):
    """(sum of max(n,0) * ln(max(n,eps)), count of cells below eps)."""
    x = np.maximum(n, 0.0)
    total = float(np.sum(x * np.log(np.maximum(x, eps))))
    floored = int(np.count_nonzero(n < eps))
    return total, floored


def hessian_defect_sum(hxx, hxy, hyy, gx, gy, w):
    """sum over cells of |H - w g g^T|^2 with the off-diagonal counted twice."""
    dxx = hxx - w * gx * gx
    dxy = hxy - w * gx * gy
    dyy = hyy - w * gy * gy
    return float(np.sum(dxx * dxx + 2.0 * (dxy * dxy) + dyy * dyy))


def quartic_cross_sums(gx, gy, n):
    """(sum |g|^4, sum max(n,0) * |g|^2)."""
    g2 = gx * gx + gy * gy
    quart = float(np.sum(g2 * g2))
    cross = float(np.sum(np.maximum(n, 0.0) * g2))
    return quart, cross
