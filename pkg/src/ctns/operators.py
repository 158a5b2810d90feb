"""Spatial operators: gradients, divergences, semigroups, projections,
conservative transport.

Torus mode works directly on rFFT coefficients.  Square mode routes scalar
operators through extensions onto the doubled torus: even extensions for field
values (no-flux walls), odd extensions for flux components (flux vanishes at
walls in the mean).  Velocity operators always use the periodic path.

Nonlinear products (transport and chemotactic fluxes) are formed pointwise on
the grid and dealiased with the 2/3 rule after transforming, so band-limited
states produce alias-free quadratic terms.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import ContractViolationError
from .fields import (
    SQUARE_NEUMANN,
    Grid,
    ScalarField,
    SemigroupKernel,
    VectorField,
    doubled_grid,
    even_extend,
    irfft2,
    mixed_extend,
    rfft2,
    tables,
)

DIV_TOL = 1e-8


# -- raw-array helpers (torus layout) -----------------------------------------


def _grad_raw(grid: Grid, values: np.ndarray):
    tb = tables(grid)
    gxh, gyh = _kernels.spectral_gradient(rfft2(values), tb.kxd, tb.kyd)
    return irfft2(gxh, grid.shape), irfft2(gyh, grid.shape)


def _div_raw(grid: Grid, vx: np.ndarray, vy: np.ndarray, mask: np.ndarray):
    tb = tables(grid)
    dh = _kernels.flux_divergence(rfft2(vx), rfft2(vy), tb.kxd, tb.kyd, mask)
    return irfft2(dh, grid.shape)


def _restrict(grid: Grid, values2: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(values2[: grid.nx, : grid.ny])


# -- gradients and divergences ------------------------------------------------


def gradient(f: ScalarField) -> VectorField:
    """Spectral gradient; Neumann walls via even extension in square mode."""
    g = f.grid
    if g.bc == SQUARE_NEUMANN:
        g2 = doubled_grid(g)
        gx2, gy2 = _grad_raw(g2, even_extend(f.values))
        return VectorField(g, _restrict(g, gx2), _restrict(g, gy2))
    gx, gy = _grad_raw(g, f.values)
    return VectorField(g, gx, gy)


def divergence(v: VectorField) -> ScalarField:
    """Spectral divergence.  In square mode the components are treated as
    wall-vanishing fluxes (odd extension each in its own direction)."""
    g = v.grid
    if g.bc == SQUARE_NEUMANN:
        g2 = doubled_grid(g)
        fx2 = mixed_extend(v.x, odd_x=True, odd_y=False)
        fy2 = mixed_extend(v.y, odd_x=False, odd_y=True)
        d2 = _div_raw(g2, fx2, fy2, tables(g2).ones)
        return ScalarField(g, _restrict(g, d2))
    return ScalarField(g, _div_raw(g, v.x, v.y, tables(g).ones))


def laplacian(f: ScalarField) -> ScalarField:
    g = f.grid
    if g.bc == SQUARE_NEUMANN:
        g2 = doubled_grid(g)
        tb = tables(g2)
        lh = _kernels.masked_scale(rfft2(even_extend(f.values)), tb.neg_ksq)
        return ScalarField(g, _restrict(g, irfft2(lh, g2.shape)))
    tb = tables(g)
    lh = _kernels.masked_scale(rfft2(f.values), tb.neg_ksq)
    return ScalarField(g, irfft2(lh, g.shape))


def hessian(f: ScalarField) -> tuple:
    """(f_xx, f_xy, f_yy) via repeated spectral differentiation (consistent
    with ``gradient``: Nyquist modes drop out)."""
    g = f.grid
    if g.bc == SQUARE_NEUMANN:
        g2 = doubled_grid(g)
        tb = tables(g2)
        fh = rfft2(even_extend(f.values))
        parts = []
        for ka, kb in ((tb.kxd, tb.kxd), (tb.kxd, tb.kyd), (tb.kyd, tb.kyd)):
            hh = _kernels.masked_scale(fh, -(ka * kb))
            parts.append(ScalarField(g, _restrict(g, irfft2(hh, g2.shape))))
        return tuple(parts)
    tb = tables(g)
    fh = rfft2(f.values)
    out = []
    for ka, kb in ((tb.kxd, tb.kxd), (tb.kxd, tb.kyd), (tb.kyd, tb.kyd)):
        hh = _kernels.masked_scale(fh, -(ka * kb))
        out.append(ScalarField(g, irfft2(hh, g.shape)))
    return tuple(out)


# -- semigroups ----------------------------------------------------------------


def heat_semigroup(f: ScalarField, t: float, kappa: float) -> ScalarField:
    """Apply exp(t * kappa * Laplacian).  Exact per mode; a positive-kernel
    convolution of the trigonometric interpolant, so smooth band-limited data
    obey the maximum principle on the grid."""
    g = f.grid
    if g.bc == SQUARE_NEUMANN:
        g2 = doubled_grid(g)
        decay = SemigroupKernel(g2, kappa).factors(t)
        out2 = irfft2(_kernels.semigroup_apply(rfft2(even_extend(f.values)), decay), g2.shape)
        return ScalarField(g, _restrict(g, out2))
    decay = SemigroupKernel(g, kappa).factors(t)
    return ScalarField(g, irfft2(_kernels.semigroup_apply(rfft2(f.values), decay), g.shape))


def leray_project(v: VectorField) -> VectorField:
    """Remove the gradient part; the mean flow (zero mode) passes through."""
    g = v.grid
    tb = tables(g)
    pxh, pyh = _kernels.leray_project(rfft2(v.x), rfft2(v.y), tb.kxd, tb.kyd, tb.inv_ksq_d)
    return VectorField(g, irfft2(pxh, g.shape), irfft2(pyh, g.shape))


def stokes_semigroup(u: VectorField, t: float, nu: float) -> VectorField:
    """Leray projection followed by componentwise heat decay (the two agree on
    divergence-free fields, where the Stokes operator is -Laplacian)."""
    g = u.grid
    tb = tables(g)
    pxh, pyh = _kernels.leray_project(rfft2(u.x), rfft2(u.y), tb.kxd, tb.kyd, tb.inv_ksq_d)
    decay = SemigroupKernel(g, nu).factors(t)
    return VectorField(g,
                       irfft2(_kernels.semigroup_apply(pxh, decay), g.shape),
                       irfft2(_kernels.semigroup_apply(pyh, decay), g.shape))


# -- transport -----------------------------------------------------------------


def divergence_sup(u: VectorField) -> float:
    """Max-abs of the discrete (spectral) divergence of u."""
    g = u.grid
    d = _div_raw(g, u.x, u.y, tables(g).ones)
    return float(np.max(np.abs(d)))


def _flux_div(grid: Grid, fx: np.ndarray, fy: np.ndarray) -> np.ndarray:
    """Dealiased divergence of a flux, dispatching on the boundary mode."""
    if grid.bc == SQUARE_NEUMANN:
        g2 = doubled_grid(grid)
        fx2 = mixed_extend(fx, odd_x=True, odd_y=False)
        fy2 = mixed_extend(fy, odd_x=False, odd_y=True)
        return _restrict(grid, _div_raw(g2, fx2, fy2, tables(g2).dealias))
    return _div_raw(grid, fx, fy, tables(grid).dealias)


def advect_conservative(u: VectorField, f: ScalarField,
                        div_tol: float = DIV_TOL) -> ScalarField:
    """div(u * f) in flux form, dealiased.  Requires discretely divergence-free
    u; the result has exactly zero mean, so transport conserves mass bit-exactly.
    """
    if u.grid != f.grid:
        raise ContractViolationError("velocity and scalar live on different grids")
    ds = divergence_sup(u)
    if ds > div_tol:
        raise ContractViolationError(
            f"advecting velocity is not divergence-free (max div {ds:.3e} > {div_tol:.1e})"
        )
    fx = _kernels.multiply(u.x, f.values)
    fy = _kernels.multiply(u.y, f.values)
    return ScalarField(f.grid, _flux_div(f.grid, fx, fy))


def chemotaxis_flux(n: ScalarField, c: ScalarField, chi_of_c) -> ScalarField:
    """div(chi(c) * n * grad c), the aggregation term, in dealiased flux form."""
    if n.grid != c.grid:
        raise ContractViolationError("density and attractant live on different grids")
    grad_c = gradient(c)
    chi_vals = np.ascontiguousarray(np.broadcast_to(
        np.asarray(chi_of_c(c.values), dtype=np.float64), c.values.shape))
    fx = _kernels.multiply(n.values, _kernels.multiply(chi_vals, grad_c.x))
    fy = _kernels.multiply(n.values, _kernels.multiply(chi_vals, grad_c.y))
    return ScalarField(n.grid, _flux_div(n.grid, fx, fy))
