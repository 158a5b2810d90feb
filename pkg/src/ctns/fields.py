"""Grids, fields, norms and spectral transforms.

Fields live on a uniform rectangular grid with one of two boundary modes:

* ``"torus"``: fully periodic, nodes at i*h.  All transforms are rFFTs.
* ``"square_neumann"``: scalar fields satisfy no-flux walls, realized by a
  half-sample even extension onto the doubled torus (equivalent to a type-II
  cosine basis on cell-centered nodes (i + 1/2)*h).  Velocity fields remain
  periodic in both modes; only scalar operators dispatch on the mode.

Grid functions of a field (integral, L2 norm, H1 seminorm) use the uniform
cell quadrature hx*hy*sum, which is exact for band-limited trigonometric
polynomials on the torus.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from . import _kernels
from .errors import ConfigurationError, ContractViolationError

TORUS = "torus"
SQUARE_NEUMANN = "square_neumann"
_BC_MODES = (TORUS, SQUARE_NEUMANN)


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid on [0, lx) x [0, ly)."""

    nx: int
    ny: int
    lx: float
    ly: float
    bc: str = TORUS

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def shape(self) -> tuple:
        return (self.nx, self.ny)

    @property
    def area(self) -> float:
        return self.lx * self.ly

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    def axes(self):
        """1D coordinate arrays; cell-centered in square mode."""
        off = 0.5 if self.bc == SQUARE_NEUMANN else 0.0
        x = (np.arange(self.nx) + off) * self.hx
        y = (np.arange(self.ny) + off) * self.hy
        return x, y

    def meshgrid(self):
        x, y = self.axes()
        return np.meshgrid(x, y, indexing="ij")


def make_grid(nx: int, ny: int, lx: float = 1.0, ly: float = 1.0,
              bc: str = TORUS) -> Grid:
    """Validated grid constructor.

    Sizes must be powers of two (transform requirement) and at least 8 so the
    dealiased band is non-trivial.
    """
    for name, n in (("nx", nx), ("ny", ny)):
        if not isinstance(n, (int, np.integer)) or not _is_pow2(int(n)) or n < 8:
            raise ConfigurationError(f"{name} must be a power of two >= 8, got {n!r}")
    for name, l in (("lx", lx), ("ly", ly)):
        if not np.isfinite(l) or l <= 0:
            raise ConfigurationError(f"{name} must be positive and finite, got {l!r}")
    if bc not in _BC_MODES:
        raise ConfigurationError(f"bc must be one of {_BC_MODES}, got {bc!r}")
    return Grid(int(nx), int(ny), float(lx), float(ly), bc)


# -- spectral tables ----------------------------------------------------------


class SpectralTables:
    """Per-grid wavenumber arrays for the rFFT layout (nx, ny//2 + 1).

    ``kxd``/``kyd`` zero the Nyquist row/column (the unpaired mode has no
    representable odd derivative); ``ksq`` keeps the full magnitudes so
    semigroup decay damps the Nyquist modes too.  ``dealias`` is the 2/3-rule
    mask as a 0/1 float array, ``parseval`` the column weights that turn a
    half-plane sum into the full-plane one.
    """

    def __init__(self, grid: Grid):
        nx, ny = grid.nx, grid.ny
        nyh = ny // 2 + 1
        ix = np.rint(np.fft.fftfreq(nx) * nx).astype(np.int64)
        iy = np.arange(nyh, dtype=np.int64)
        kx1 = (2.0 * np.pi / grid.lx) * ix.astype(np.float64)
        ky1 = (2.0 * np.pi / grid.ly) * iy.astype(np.float64)
        kxd1 = kx1.copy()
        kxd1[nx // 2] = 0.0
        kyd1 = ky1.copy()
        kyd1[-1] = 0.0

        def tile_x(a):
            return np.ascontiguousarray(np.broadcast_to(a[:, None], (nx, nyh)))

        def tile_y(a):
            return np.ascontiguousarray(np.broadcast_to(a[None, :], (nx, nyh)))

        self.kx = tile_x(kx1)
        self.ky = tile_y(ky1)
        self.kxd = tile_x(kxd1)
        self.kyd = tile_y(kyd1)
        self.ksq = self.kx * self.kx + self.ky * self.ky
        self.neg_ksq = -self.ksq
        self.ksq_d = self.kxd * self.kxd + self.kyd * self.kyd
        self.ones = np.ones((nx, nyh))
        # inverse of the derivative-consistent |k|^2: zero at the origin and on
        # pure-Nyquist modes, so the projection leaves mean flow and modes
        # without representable derivatives untouched
        inv = np.zeros_like(self.ksq_d)
        nz = self.ksq_d > 0
        inv[nz] = 1.0 / self.ksq_d[nz]
        self.inv_ksq_d = inv
        keep = (np.abs(ix)[:, None] <= nx // 3) & (iy[None, :] <= ny // 3)
        self.dealias = np.ascontiguousarray(keep.astype(np.float64))
        w = np.full((nx, nyh), 2.0)
        w[:, 0] = 1.0
        w[:, -1] = 1.0
        self.parseval = w


@lru_cache(maxsize=None)
def tables(grid: Grid) -> SpectralTables:
    return SpectralTables(grid)


@lru_cache(maxsize=None)
def _decay_factors(grid: Grid, kappa_t: float) -> np.ndarray:
    return np.exp(-kappa_t * tables(grid).ksq)


class SemigroupKernel:
    """Cached per-mode decay factors exp(-kappa * |k|^2 * t) for one grid and
    one diffusivity.  Factors lie in [0, 1] with the zero mode exactly 1
    (high modes may underflow to zero for large kappa * t)."""

    def __init__(self, grid: Grid, kappa: float):
        if not np.isfinite(kappa) or kappa < 0:
            raise ConfigurationError(f"diffusivity must be >= 0, got {kappa!r}")
        self.grid = grid
        self.kappa = float(kappa)

    def factors(self, t: float) -> np.ndarray:
        if t < 0:
            raise ContractViolationError(f"semigroup time must be >= 0, got {t!r}")
        return _decay_factors(self.grid, self.kappa * float(t))


# -- transforms on raw arrays -------------------------------------------------


def rfft2(values: np.ndarray) -> np.ndarray:
    return scipy.fft.rfft2(values)


def irfft2(coeffs: np.ndarray, shape: tuple) -> np.ndarray:
    return scipy.fft.irfft2(coeffs, s=shape)


def even_extend(values: np.ndarray) -> np.ndarray:
    """Half-sample even extension in both axes onto the doubled grid."""
    nx, ny = values.shape
    out = np.empty((2 * nx, 2 * ny))
    out[:nx, :ny] = values
    out[nx:, :ny] = values[::-1, :]
    out[:, ny:] = out[:, ny - 1::-1]
    return out


def mixed_extend(values: np.ndarray, odd_x: bool, odd_y: bool) -> np.ndarray:
    """Extension odd or even per axis; odd axes flip sign across the wall."""
    nx, ny = values.shape
    sx = -1.0 if odd_x else 1.0
    sy = -1.0 if odd_y else 1.0
    out = np.empty((2 * nx, 2 * ny))
    out[:nx, :ny] = values
    out[nx:, :ny] = sx * values[::-1, :]
    out[:, ny:] = sy * out[:, ny - 1::-1]
    return out


def doubled_grid(grid: Grid) -> Grid:
    return Grid(2 * grid.nx, 2 * grid.ny, 2 * grid.lx, 2 * grid.ly, TORUS)


# -- field types --------------------------------------------------------------


def _coerce(grid: Grid, values, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.shape != grid.shape:
        raise ContractViolationError(
            f"{name} values have shape {arr.shape}, grid expects {grid.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ContractViolationError(f"{name} values contain non-finite entries")
    return arr


@dataclass(frozen=True)
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _coerce(self.grid, self.values, "scalar field"))

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


@dataclass(frozen=True)
class VectorField:
    grid: Grid
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _coerce(self.grid, self.x, "vector field x"))
        object.__setattr__(self, "y", _coerce(self.grid, self.y, "vector field y"))

    def copy(self) -> "VectorField":
        return VectorField(self.grid, self.x.copy(), self.y.copy())


@dataclass
class DissipationAccumulators:
    """Running left-endpoint time integrals of the nonnegative dissipation
    densities; stored unweighted so reports can apply coefficient weights."""

    fisher: float = 0.0      # int_0^t ||grad sqrt(n)||_L2^2 ds
    enstrophy: float = 0.0   # int_0^t ||grad u||_L2^2 ds
    hessian: float = 0.0     # int_0^t sum_ij |d_i d_j Psi - w(c) d_i Psi d_j Psi|^2 ds
    quartic: float = 0.0     # int_0^t int |grad Psi|^4 ds
    cross: float = 0.0       # int_0^t int n |grad Psi|^2 ds

    def copy(self) -> "DissipationAccumulators":
        return DissipationAccumulators(self.fisher, self.enstrophy, self.hessian,
                                       self.quartic, self.cross)

    def as_dict(self) -> dict:
        return {"fisher": self.fisher, "enstrophy": self.enstrophy,
                "hessian": self.hessian, "quartic": self.quartic,
                "cross": self.cross}


@dataclass
class State:
    """Full simulation state: density n, attractant c, velocity u, time, and
    the running dissipation integrals (None unless tracking is enabled)."""

    n: ScalarField
    c: ScalarField
    u: VectorField
    t: float = 0.0
    accum: DissipationAccumulators | None = None

    def __post_init__(self):
        g = self.n.grid
        if self.c.grid != g or self.u.grid != g:
            raise ContractViolationError("state fields live on different grids")

    @property
    def grid(self) -> Grid:
        return self.n.grid

    def copy(self) -> "State":
        return State(self.n.copy(), self.c.copy(), self.u.copy(), self.t,
                     None if self.accum is None else self.accum.copy())


@dataclass(frozen=True)
class SpectralField:
    """Transform-domain view of a scalar field.  kind is 'rfft2' on the torus
    (complex half-plane coefficients) or 'dct2' in square mode (orthonormal
    cosine coefficients)."""

    grid: Grid
    kind: str
    coeffs: np.ndarray


# -- grid functions -----------------------------------------------------------


def integrate(f: ScalarField) -> float:
    """Cell quadrature; exact for trigonometric polynomials on the torus."""
    return f.grid.cell_area * float(f.values.sum())


def inner(f: ScalarField | VectorField, g: ScalarField | VectorField) -> float:
    """Grid L2 inner product."""
    if isinstance(f, VectorField):
        s = float(np.sum(f.x * g.x)) + float(np.sum(f.y * g.y))
    else:
        s = float(np.sum(f.values * g.values))
    return f.grid.cell_area * s


def l2_norm(f: ScalarField | VectorField) -> float:
    if isinstance(f, VectorField):
        s = float(np.sum(f.x * f.x)) + float(np.sum(f.y * f.y))
    else:
        s = float(np.sum(f.values * f.values))
    return float(np.sqrt(f.grid.cell_area * s))


def sup_norm(f: ScalarField | VectorField) -> float:
    if isinstance(f, VectorField):
        return _kernels.vector_max(f.x, f.y)
    return float(np.max(np.abs(f.values)))


def min_value(f: ScalarField) -> float:
    return float(np.min(f.values))


def l2_sq_from_rfft2(grid: Grid, fh: np.ndarray) -> float:
    """Squared L2 norm straight from rFFT coefficients (Parseval)."""
    tb = tables(grid)
    mag = fh.real * fh.real + fh.imag * fh.imag
    return grid.cell_area / (grid.nx * grid.ny) * float(np.sum(tb.parseval * mag))


def h1_sq_from_rfft2(grid: Grid, fh: np.ndarray) -> float:
    """Squared H1 seminorm from rFFT coefficients; Nyquist modes carry no
    derivative, consistent with the spectral gradient."""
    tb = tables(grid)
    mag = fh.real * fh.real + fh.imag * fh.imag
    total = float(np.sum(tb.parseval * tb.ksq_d * mag))
    return grid.cell_area / (grid.nx * grid.ny) * total


def _h1_sq_torus(grid: Grid, values: np.ndarray) -> float:
    return h1_sq_from_rfft2(grid, rfft2(values))


def h1_seminorm(f: ScalarField | VectorField) -> float:
    """L2 norm of the spectral gradient (Nyquist modes carry no derivative)."""
    grid = f.grid
    if isinstance(f, VectorField):
        # velocity is periodic in every mode
        s = _h1_sq_torus(grid, f.x) + _h1_sq_torus(grid, f.y)
        return float(np.sqrt(s))
    if grid.bc == SQUARE_NEUMANN:
        s = _h1_sq_torus(doubled_grid(grid), even_extend(f.values))
        return float(np.sqrt(s)) / 2.0
    return float(np.sqrt(_h1_sq_torus(grid, f.values)))


def spectral_forward(f: ScalarField) -> SpectralField:
    if f.grid.bc == SQUARE_NEUMANN:
        coeffs = scipy.fft.dctn(f.values, type=2, norm="ortho")
        return SpectralField(f.grid, "dct2", coeffs)
    return SpectralField(f.grid, "rfft2", rfft2(f.values))


def spectral_backward(sf: SpectralField) -> ScalarField:
    if sf.kind == "dct2":
        values = scipy.fft.idctn(sf.coeffs, type=2, norm="ortho")
    elif sf.kind == "rfft2":
        values = irfft2(sf.coeffs, sf.grid.shape)
    else:
        raise ContractViolationError(f"unknown spectral kind {sf.kind!r}")
    return ScalarField(sf.grid, values)


def parseval_l2(sf: SpectralField) -> float:
    """L2 norm computed from transform coefficients."""
    g = sf.grid
    if sf.kind == "dct2":
        return float(np.sqrt(g.cell_area * np.sum(sf.coeffs * sf.coeffs)))
    tb = tables(g)
    mag = sf.coeffs.real ** 2 + sf.coeffs.imag ** 2
    total = float(np.sum(tb.parseval * mag))
    return float(np.sqrt(g.cell_area / (g.nx * g.ny) * total))
