"""Grid bookkeeping, norms against closed forms, and transform roundtrips."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctns import (
    ConfigurationError,
    ContractViolationError,
    DissipationAccumulators,
    Grid,
    ScalarField,
    State,
    VectorField,
    h1_seminorm,
    inner,
    integrate,
    l2_norm,
    make_grid,
    min_value,
    sup_norm,
)
from ctns.fields import (
    SemigroupKernel,
    even_extend,
    irfft2,
    l2_sq_from_rfft2,
    h1_sq_from_rfft2,
    mixed_extend,
    parseval_l2,
    rfft2,
    spectral_backward,
    spectral_forward,
    tables,
)


def test_grid_geometry():
    g = make_grid(32, 64, lx=2.0, ly=1.0)
    assert g.shape == (32, 64)
    assert g.hx == pytest.approx(2.0 / 32)
    assert g.hy == pytest.approx(1.0 / 64)
    assert g.area == pytest.approx(2.0)
    assert g.cell_area == pytest.approx(g.hx * g.hy)
    x, y = g.axes()
    assert x[0] == 0.0 and x[-1] == pytest.approx(2.0 - g.hx)
    assert len(y) == 64


def test_grid_axes_cell_centered_in_square_mode():
    g = make_grid(16, 16, bc="square_neumann")
    x, _ = g.axes()
    assert x[0] == pytest.approx(0.5 * g.hx)


@pytest.mark.parametrize("bad", [(7, 32), (32, 48), (4, 32), (0, 8)])
def test_grid_rejects_non_power_of_two(bad):
    with pytest.raises(ConfigurationError):
        make_grid(*bad)


def test_grid_rejects_bad_lengths_and_bc():
    with pytest.raises(ConfigurationError):
        make_grid(32, 32, lx=-1.0)
    with pytest.raises(ConfigurationError):
        make_grid(32, 32, ly=float("nan"))
    with pytest.raises(ConfigurationError):
        make_grid(32, 32, bc="open")


def test_field_coercion_and_validation(grid):
    with pytest.raises(ContractViolationError):
        ScalarField(grid, np.zeros((16, 16)))
    vals = np.zeros(grid.shape)
    vals[3, 4] = np.inf
    with pytest.raises(ContractViolationError):
        ScalarField(grid, vals)
    f = ScalarField(grid, np.zeros(grid.shape, dtype=np.float32))
    assert f.values.dtype == np.float64
    assert f.values.flags["C_CONTIGUOUS"]


def test_state_requires_single_grid(grid):
    other = make_grid(16, 16)
    z = lambda g: ScalarField(g, np.zeros(g.shape))
    u = VectorField(grid, np.zeros(grid.shape), np.zeros(grid.shape))
    with pytest.raises(ContractViolationError):
        State(z(grid), z(other), u)


def test_accumulator_copy_is_independent():
    a = DissipationAccumulators(fisher=1.0)
    b = a.copy()
    b.fisher = 2.0
    assert a.fisher == 1.0
    assert set(a.as_dict()) == {"fisher", "enstrophy", "hessian", "quartic", "cross"}


def test_l2_norm_single_harmonic(grid):
    xx, _ = grid.meshgrid()
    f = ScalarField(grid, np.sin(2 * np.pi * xx))
    # int_0^1 sin^2(2 pi x) dx = 1/2 over the unit square
    assert l2_norm(f) == pytest.approx(np.sqrt(0.5), rel=1e-13)


def test_h1_seminorm_single_harmonic(grid):
    xx, _ = grid.meshgrid()
    f = ScalarField(grid, np.sin(2 * np.pi * xx))
    assert h1_seminorm(f) == pytest.approx(2 * np.pi * np.sqrt(0.5), rel=1e-13)


def test_h1_seminorm_anisotropic(grid_aniso):
    xx, yy = grid_aniso.meshgrid()
    # wavenumber 2 pi / lx = pi in x
    f = ScalarField(grid_aniso, np.cos(2 * np.pi * xx / grid_aniso.lx))
    expected = (2 * np.pi / grid_aniso.lx) * np.sqrt(grid_aniso.area / 2)
    assert h1_seminorm(f) == pytest.approx(expected, rel=1e-13)


def test_integrate_and_inner(grid):
    xx, yy = grid.meshgrid()
    f = ScalarField(grid, 2.0 + np.cos(2 * np.pi * xx))
    assert integrate(f) == pytest.approx(2.0, rel=1e-14)
    g = ScalarField(grid, np.cos(2 * np.pi * xx))
    assert inner(f, g) == pytest.approx(0.5, rel=1e-13)
    assert inner(g, g) == pytest.approx(l2_norm(g) ** 2, rel=1e-13)


def test_sup_and_min(grid):
    xx, _ = grid.meshgrid()
    f = ScalarField(grid, np.sin(2 * np.pi * xx))
    assert sup_norm(f) == pytest.approx(1.0, abs=1e-12)
    assert min_value(f) == pytest.approx(-1.0, abs=1e-12)
    v = VectorField(grid, 3.0 * np.ones(grid.shape), 4.0 * np.ones(grid.shape))
    assert sup_norm(v) == pytest.approx(5.0, rel=1e-14)


def test_parseval_matches_grid_norm(grid):
    rng = np.random.default_rng(7)
    vals = rng.standard_normal(grid.shape)
    f = ScalarField(grid, vals)
    direct = l2_norm(f)
    via_coeffs = np.sqrt(l2_sq_from_rfft2(grid, rfft2(vals)))
    assert via_coeffs == pytest.approx(direct, rel=1e-12)
    sf = spectral_forward(f)
    assert parseval_l2(sf) == pytest.approx(direct, rel=1e-12)


def test_h1_from_coefficients_matches_gradient(grid):
    from ctns.operators import gradient

    rng = np.random.default_rng(8)
    vals = rng.standard_normal(grid.shape)
    tb = tables(grid)
    vals = irfft2(rfft2(vals) * tb.dealias, grid.shape)  # band-limit first
    f = ScalarField(grid, vals)
    gf = gradient(f)
    assert np.sqrt(h1_sq_from_rfft2(grid, rfft2(vals))) == pytest.approx(
        l2_norm(gf), rel=1e-12)


def test_transform_roundtrip(grid):
    rng = np.random.default_rng(9)
    vals = rng.standard_normal(grid.shape)
    back = irfft2(rfft2(vals), grid.shape)
    assert np.max(np.abs(back - vals)) < 1e-13


def test_spectral_roundtrip_square(grid_square):
    rng = np.random.default_rng(10)
    vals = rng.standard_normal(grid_square.shape)
    f = ScalarField(grid_square, vals)
    back = spectral_backward(spectral_forward(f))
    assert np.max(np.abs(back.values - vals)) < 1e-12
    assert parseval_l2(spectral_forward(f)) == pytest.approx(l2_norm(f), rel=1e-12)


def test_even_extension_symmetry():
    g = make_grid(8, 8)
    rng = np.random.default_rng(11)
    vals = rng.standard_normal(g.shape)
    ext = even_extend(vals)
    assert ext.shape == (16, 16)
    assert np.array_equal(ext[:8, :8], vals)
    assert np.array_equal(ext[8:, :8], vals[::-1, :])
    assert np.array_equal(ext[:8, 8:], vals[:, ::-1])
    odd = mixed_extend(vals, odd_x=True, odd_y=False)
    assert np.array_equal(odd[8:, :8], -vals[::-1, :])
    assert np.array_equal(odd[:8, 8:], vals[:, ::-1])


def test_dealias_mask_band(grid):
    tb = tables(grid)
    ix = np.rint(np.fft.fftfreq(grid.nx) * grid.nx).astype(int)
    for i in (0, 5, 31):
        for j in (0, 5, 16):
            expected = 1.0 if (abs(ix[i]) <= grid.nx // 3 and j <= grid.ny // 3) else 0.0
            assert tb.dealias[i, j] == expected


def test_nyquist_derivative_wavenumbers_zeroed(grid):
    tb = tables(grid)
    assert np.all(tb.kxd[grid.nx // 2, :] == 0.0)
    assert np.all(tb.kyd[:, -1] == 0.0)
    # but the decay table keeps the full magnitude there
    assert tb.ksq[grid.nx // 2, 0] > 0.0


def test_semigroup_kernel_properties(grid):
    kern = SemigroupKernel(grid, 0.7)
    f = kern.factors(0.0)
    assert np.all(f == 1.0)
    f1 = kern.factors(0.3)
    assert f1[0, 0] == 1.0
    # high modes may underflow to exactly zero; that is still a valid decay
    assert np.all(f1 <= 1.0) and np.all(f1 >= 0.0)
    assert np.all(f1[1, :] > 0.0) or f1[1, 0] > 0.0
    with pytest.raises(ContractViolationError):
        kern.factors(-1.0)
    with pytest.raises(ConfigurationError):
        SemigroupKernel(grid, -0.1)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_quadrature_exact_for_constants(value):
    g = make_grid(16, 16, lx=2.0, ly=0.5)
    f = ScalarField(g, np.full(g.shape, value / 100.0))
    assert integrate(f) == pytest.approx(g.area * value / 100.0, rel=1e-14, abs=1e-14)


def test_grid_hashable_for_caches():
    a = make_grid(16, 16)
    b = make_grid(16, 16)
    assert a == b and hash(a) == hash(b)
    assert tables(a) is tables(b)
