"""Operator identities: adjointness, projections, semigroup laws, transport."""

import numpy as np
import pytest

from ctns import (
    ContractViolationError,
    ScalarField,
    VectorField,
    inner,
    integrate,
    l2_norm,
    make_grid,
    sup_norm,
)
from ctns.operators import (
    advect_conservative,
    chemotaxis_flux,
    divergence,
    divergence_sup,
    gradient,
    heat_semigroup,
    hessian,
    laplacian,
    leray_project,
    stokes_semigroup,
)

from conftest import smooth_scalar, solenoidal_velocity


def test_gradient_single_harmonic(grid):
    xx, yy = grid.meshgrid()
    f = ScalarField(grid, np.sin(2 * np.pi * xx) + np.cos(4 * np.pi * yy))
    gf = gradient(f)
    assert np.max(np.abs(gf.x - 2 * np.pi * np.cos(2 * np.pi * xx))) < 1e-11
    assert np.max(np.abs(gf.y + 4 * np.pi * np.sin(4 * np.pi * yy))) < 1e-11


def test_gradient_divergence_adjoint(grid):
    f = smooth_scalar(grid, seed=1)
    v = solenoidal_velocity(grid, seed=2)
    # add a gradient part so v is not special
    w = gradient(smooth_scalar(grid, seed=3))
    v = VectorField(grid, v.x + 0.5 * w.x, v.y + 0.5 * w.y)
    lhs = inner(gradient(f), v)
    rhs = -inner(f, divergence(v))
    assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-11)


def test_laplacian_is_divergence_of_gradient(grid):
    f = smooth_scalar(grid, seed=4)
    lap = laplacian(f)
    div_grad = divergence(gradient(f))
    assert np.max(np.abs(lap.values - div_grad.values)) < 1e-9
    # closed form on one harmonic
    xx, _ = grid.meshgrid()
    g = ScalarField(grid, np.cos(2 * np.pi * xx))
    assert np.max(np.abs(laplacian(g).values + (2 * np.pi) ** 2 * g.values)) < 1e-10


def test_hessian_trace_is_laplacian_and_symmetry(grid):
    f = smooth_scalar(grid, seed=5)
    hxx, hxy, hyy = hessian(f)
    lap = laplacian(f)
    # trace of the Hessian equals the (derivative-consistent) Laplacian on
    # band-limited data where Nyquist modes are absent
    assert np.max(np.abs(hxx.values + hyy.values - lap.values)) < 1e-9
    # d_x d_y = d_y d_x comes for free spectrally; check against gradient twice
    gx = gradient(f).x
    gxy = gradient(ScalarField(grid, gx)).y
    assert np.max(np.abs(hxy.values - gxy)) < 1e-9


def test_leray_projection_properties(grid):
    rng = np.random.default_rng(6)
    v = VectorField(grid, rng.standard_normal(grid.shape),
                    rng.standard_normal(grid.shape))
    p = leray_project(v)
    # projected field is discretely divergence-free
    assert divergence_sup(p) < 1e-9
    # idempotent
    pp = leray_project(p)
    assert np.max(np.abs(pp.x - p.x)) < 1e-12
    assert np.max(np.abs(pp.y - p.y)) < 1e-12
    # contractive
    assert l2_norm(p) <= l2_norm(v) + 1e-12
    # symmetric
    w = VectorField(grid, rng.standard_normal(grid.shape),
                    rng.standard_normal(grid.shape))
    assert inner(leray_project(v), w) == pytest.approx(
        inner(v, leray_project(w)), rel=1e-10, abs=1e-10)


def test_leray_kills_gradients_keeps_mean_flow(grid):
    gpart = gradient(smooth_scalar(grid, seed=7))
    p = leray_project(gpart)
    assert sup_norm(p) < 1e-10
    mean_flow = VectorField(grid, np.full(grid.shape, 0.3), np.full(grid.shape, -0.2))
    q = leray_project(mean_flow)
    assert np.max(np.abs(q.x - 0.3)) < 1e-13
    assert np.max(np.abs(q.y + 0.2)) < 1e-13


def test_heat_semigroup_identity_and_composition(grid):
    f = smooth_scalar(grid, seed=8)
    out0 = heat_semigroup(f, 0.0, 0.5)
    assert np.max(np.abs(out0.values - f.values)) < 1e-14
    a = heat_semigroup(heat_semigroup(f, 0.1, 0.5), 0.2, 0.5)
    b = heat_semigroup(f, 0.3, 0.5)
    assert np.max(np.abs(a.values - b.values)) < 1e-12


def test_heat_semigroup_mode_decay(grid):
    xx, _ = grid.meshgrid()
    f = ScalarField(grid, np.cos(2 * np.pi * xx))
    out = heat_semigroup(f, 0.1, 1.0)
    expected = np.exp(-4 * np.pi ** 2 * 0.1) * f.values
    assert np.max(np.abs(out.values - expected)) < 1e-13


def test_heat_semigroup_matches_time_stepped_ode(grid):
    """Independent check: RK4 on the method-of-lines system df/dt = kappa * Lap f
    converges to the same result the exact per-mode factors give."""
    f = smooth_scalar(grid, seed=9)
    kappa, t_total, substeps = 0.3, 0.05, 400
    dt = t_total / substeps
    vals = f.values.copy()
    for _ in range(substeps):
        k1 = kappa * laplacian(ScalarField(grid, vals)).values
        k2 = kappa * laplacian(ScalarField(grid, vals + 0.5 * dt * k1)).values
        k3 = kappa * laplacian(ScalarField(grid, vals + 0.5 * dt * k2)).values
        k4 = kappa * laplacian(ScalarField(grid, vals + dt * k3)).values
        vals = vals + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    exact = heat_semigroup(f, t_total, kappa)
    assert np.max(np.abs(exact.values - vals)) < 1e-8


def test_heat_semigroup_conserves_mass_and_max_principle(grid):
    f = smooth_scalar(grid, seed=10, base=2.0, amplitude=0.8)
    out = heat_semigroup(f, 0.25, 1.0)
    assert integrate(out) == pytest.approx(integrate(f), rel=1e-14)
    assert out.values.max() <= f.values.max() + 1e-12
    assert out.values.min() >= f.values.min() - 1e-12


def test_heat_semigroup_square_mode(grid_square):
    xx, _ = grid_square.meshgrid()
    # half-sample cosine is a Neumann eigenfunction on [0, 1]
    f = ScalarField(grid_square, 1.0 + 0.5 * np.cos(np.pi * xx))
    out = heat_semigroup(f, 0.1, 1.0)
    expected = 1.0 + 0.5 * np.exp(-np.pi ** 2 * 0.1) * np.cos(np.pi * xx)
    assert np.max(np.abs(out.values - expected)) < 1e-12
    assert integrate(out) == pytest.approx(integrate(f), rel=1e-13)


def test_square_gradient_of_neumann_mode(grid_square):
    xx, _ = grid_square.meshgrid()
    f = ScalarField(grid_square, np.cos(np.pi * xx))
    gf = gradient(f)
    assert np.max(np.abs(gf.x + np.pi * np.sin(np.pi * xx))) < 1e-11
    assert np.max(np.abs(gf.y)) < 1e-11


def test_stokes_semigroup_projects_and_decays(grid):
    rng = np.random.default_rng(11)
    v = VectorField(grid, rng.standard_normal(grid.shape),
                    rng.standard_normal(grid.shape))
    out = stokes_semigroup(v, 0.05, 1.0)
    assert divergence_sup(out) < 1e-9
    # on an already divergence-free single eigenmode it is plain heat decay
    u = solenoidal_velocity(grid, seed=12)
    ua = stokes_semigroup(u, 0.07, 0.9)
    ub = VectorField(grid,
                     heat_semigroup(ScalarField(grid, u.x), 0.07, 0.9).values,
                     heat_semigroup(ScalarField(grid, u.y), 0.07, 0.9).values)
    assert np.max(np.abs(ua.x - ub.x)) < 1e-11
    assert np.max(np.abs(ua.y - ub.y)) < 1e-11


def test_advect_conservative_zero_mean(grid):
    u = solenoidal_velocity(grid, seed=13, amplitude=1.0)
    f = smooth_scalar(grid, seed=14)
    adv = advect_conservative(u, f)
    # flux form: the zero mode of the divergence is exactly zero
    assert abs(integrate(adv)) < 1e-13


def test_advect_conservative_matches_u_dot_grad(grid):
    """For divergence-free u, div(u f) = u . grad f; compare on band-limited
    fields where the product rule is alias-free."""
    u = solenoidal_velocity(grid, seed=15, amplitude=0.8, cutoff=4)
    f = smooth_scalar(grid, seed=16, cutoff=4)
    adv = advect_conservative(u, f)
    gf = gradient(f)
    pointwise = u.x * gf.x + u.y * gf.y
    # compare after dealiasing the pointwise product the same way
    from ctns.fields import rfft2, irfft2, tables

    ref = irfft2(rfft2(pointwise) * tables(grid).dealias, grid.shape)
    assert np.max(np.abs(adv.values - ref)) < 1e-9


def test_advect_rejects_compressible_velocity(grid):
    xx, _ = grid.meshgrid()
    bad = VectorField(grid, np.sin(2 * np.pi * xx), np.zeros(grid.shape))
    f = smooth_scalar(grid, seed=17)
    with pytest.raises(ContractViolationError):
        advect_conservative(bad, f)


def test_advect_grid_mismatch(grid):
    other = make_grid(16, 16)
    u = VectorField(grid, np.zeros(grid.shape), np.zeros(grid.shape))
    f = ScalarField(other, np.ones(other.shape))
    with pytest.raises(ContractViolationError):
        advect_conservative(u, f)


def test_chemotaxis_flux_zero_mean_and_sign(grid):
    n = smooth_scalar(grid, seed=18, base=1.0, amplitude=0.5)
    c = smooth_scalar(grid, seed=19, base=0.5, amplitude=0.3)
    flux = chemotaxis_flux(n, c, lambda c: np.ones_like(c))
    assert abs(integrate(flux)) < 1e-13
    # div(n grad c) with n = 1 reduces to Laplacian of c
    ones = ScalarField(grid, np.ones(grid.shape))
    flux1 = chemotaxis_flux(ones, c, lambda c: np.ones_like(c))
    assert np.max(np.abs(flux1.values - laplacian(c).values)) < 1e-9


def test_square_mode_advection_conserves_mass(grid_square):
    u = VectorField(grid_square, np.zeros(grid_square.shape),
                    np.zeros(grid_square.shape))
    f = smooth_scalar(grid_square, seed=20)
    adv = advect_conservative(u, f)
    assert sup_norm(adv) < 1e-14
    xx, yy = grid_square.meshgrid()
    n = ScalarField(grid_square, 1.0 + 0.3 * np.cos(np.pi * xx))
    c = ScalarField(grid_square, 0.5 + 0.2 * np.cos(np.pi * yy))
    flux = chemotaxis_flux(n, c, lambda c: np.ones_like(c))
    assert abs(integrate(flux)) < 1e-12
