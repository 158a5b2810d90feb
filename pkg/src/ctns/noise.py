"""Stochastic forcing for the velocity equation.

The noise is diagonal in the divergence-free trigonometric eigenbasis of the
Stokes operator on the torus:

    e = sqrt(2/|O|) * khat_perp * cos(k.x)   (and the sin twin)

with eigenvalue beta = |k|^2.  Modes are enumerated deterministically by
(beta, jx, jy, phase).  The operator is affine in the velocity,

    sigma(u) dW = sum_i q_i (a_i + b_i <u, e_i>) e_i dbeta_i,

which satisfies the linear-growth bound ||sigma(u)||_HS^2 <= C (1 + ||u||^2)
with C = max(2 sum q_i^2 a_i^2, 2 max q_i^2 b_i^2) and is globally Lipschitz
with squared constant max q_i^2 b_i^2.  The per-mode weights default to
q_i = q0 * beta_i^(-decay_power).

Wiener increments come from counter-based streams keyed by (seed, mode index),
so column i of the increment matrix does not depend on how many modes are
active, and ensemble members with different seeds are independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractViolationError
from .fields import Grid, VectorField, irfft2, rfft2

_STREAM_TAG = 0x6E6F6973  # disambiguates noise streams from other rng users


class StokesEigenbasis:
    """First m divergence-free trigonometric eigenmodes on a torus grid.

    Wavevectors are restricted to the dealiased band, enumerated over the
    half-space jy > 0 or (jy = 0, jx > 0), each contributing a cosine and a
    sine mode, sorted by (eigenvalue, jx, jy, phase).
    """

    def __init__(self, grid: Grid, m: int):
        if m < 0:
            raise ConfigurationError(f"mode count must be >= 0, got {m}")
        self.grid = grid
        entries = []
        jx_max, jy_max = grid.nx // 3, grid.ny // 3
        for jx in range(-jx_max, jx_max + 1):
            for jy in range(0, jy_max + 1):
                if jy == 0 and jx <= 0:
                    continue
                kx = 2.0 * np.pi * jx / grid.lx
                ky = 2.0 * np.pi * jy / grid.ly
                beta = kx * kx + ky * ky
                for phase in (0, 1):  # 0 = cos, 1 = sin
                    entries.append((beta, jx, jy, phase, kx, ky))
        entries.sort(key=lambda e: (e[0], e[1], e[2], e[3]))
        if m > len(entries):
            raise ConfigurationError(
                f"requested {m} modes but the dealiased band holds only {len(entries)}"
            )
        self.m = m
        entries = entries[:m]

        nyh = grid.ny // 2 + 1
        n_cells = grid.nx * grid.ny
        area = grid.area
        self.beta = np.array([e[0] for e in entries])
        self.jx = np.array([e[1] for e in entries], dtype=np.int64)
        self.jy = np.array([e[2] for e in entries], dtype=np.int64)
        self.phase = np.array([e[3] for e in entries], dtype=np.int64)

        rows = np.mod(self.jx, grid.nx)
        self.flat_idx = rows * nyh + self.jy
        # jy = 0 wavevectors also store the conjugate row in the half-plane
        self.mirror_idx = np.where(
            self.jy == 0, np.mod(-self.jx, grid.nx) * nyh + 0, -1
        )

        kx = np.array([e[4] for e in entries])
        ky = np.array([e[5] for e in entries])
        norm = np.sqrt(np.maximum(self.beta, 1e-300))
        dx, dy = -ky / norm, kx / norm  # unit vector orthogonal to k
        amp = np.sqrt(2.0 / area) * (n_cells / 2.0)
        phase_factor = np.where(self.phase == 0, 1.0 + 0.0j, -1.0j)
        self.scatter_x = amp * dx * phase_factor
        self.scatter_y = amp * dy * phase_factor
        gather_scale = 2.0 * grid.cell_area / n_cells
        self.gather_x = gather_scale * np.conj(self.scatter_x)
        self.gather_y = gather_scale * np.conj(self.scatter_y)

    def gather(self, uxh: np.ndarray, uyh: np.ndarray) -> np.ndarray:
        """L2 inner products <u, e_i> from rFFT coefficients of u."""
        ux_f, uy_f = uxh.reshape(-1), uyh.reshape(-1)
        vals = ux_f[self.flat_idx] * self.gather_x + uy_f[self.flat_idx] * self.gather_y
        return vals.real.copy()

    def scatter(self, amplitudes: np.ndarray):
        """rFFT coefficient arrays of sum_i amplitudes[i] * e_i."""
        nyh = self.grid.ny // 2 + 1
        outx = np.zeros(self.grid.nx * nyh, dtype=np.complex128)
        outy = np.zeros_like(outx)
        cx = amplitudes * self.scatter_x
        cy = amplitudes * self.scatter_y
        np.add.at(outx, self.flat_idx, cx)
        np.add.at(outy, self.flat_idx, cy)
        has_mirror = self.mirror_idx >= 0
        if np.any(has_mirror):
            np.add.at(outx, self.mirror_idx[has_mirror], np.conj(cx[has_mirror]))
            np.add.at(outy, self.mirror_idx[has_mirror], np.conj(cy[has_mirror]))
        shape = (self.grid.nx, nyh)
        return outx.reshape(shape), outy.reshape(shape)

    def mode_field(self, i: int) -> VectorField:
        """Physical-space eigenmode, mainly for tests and reports."""
        if not 0 <= i < self.m:
            raise ConfigurationError(f"mode index {i} out of range [0, {self.m})")
        amps = np.zeros(self.m)
        amps[i] = 1.0
        exh, eyh = self.scatter(amps)
        g = self.grid
        return VectorField(g, irfft2(exh, g.shape), irfft2(eyh, g.shape))

    def eigenvalue(self, i: int) -> float:
        return float(self.beta[i])

    def project(self, v: VectorField, m: int | None = None) -> VectorField:
        """Orthogonal projection of v onto the span of the first m modes."""
        mm = self.m if m is None else m
        if mm > self.m:
            raise ConfigurationError(f"projection rank {mm} exceeds basis size {self.m}")
        amps = np.zeros(self.m)
        amps[:mm] = self.gather(rfft2(v.x), rfft2(v.y))[:mm]
        exh, eyh = self.scatter(amps)
        g = self.grid
        return VectorField(g, irfft2(exh, g.shape), irfft2(eyh, g.shape))


def galerkin_project(basis: StokesEigenbasis, v: VectorField,
                     m: int | None = None) -> VectorField:
    return basis.project(v, m)


@dataclass(frozen=True)
class NoiseModel:
    """Affine-diagonal noise operator over a Stokes eigenbasis."""

    basis: StokesEigenbasis
    q: np.ndarray
    a: np.ndarray
    b: np.ndarray
    seed: int

    def __post_init__(self):
        m = self.basis.m
        for name in ("q", "a", "b"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (m,):
                raise ConfigurationError(f"noise weights {name} must have shape ({m},)")
            if not np.all(np.isfinite(arr)):
                raise ConfigurationError(f"noise weights {name} contain non-finite entries")
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return self.basis.m

    def coefficients(self, uxh: np.ndarray, uyh: np.ndarray) -> np.ndarray:
        """Per-mode amplitudes q_i (a_i + b_i <u, e_i>)."""
        return self.q * (self.a + self.b * self.basis.gather(uxh, uyh))

    def coefficients_physical(self, u: VectorField) -> np.ndarray:
        return self.coefficients(rfft2(u.x), rfft2(u.y))

    def hs_norm_sq(self, u: VectorField) -> float:
        """Squared Hilbert-Schmidt norm sum_i |q_i (a_i + b_i <u,e_i>)|^2."""
        s = self.coefficients_physical(u)
        return float(np.sum(s * s))

    def growth_constant(self) -> float:
        """C with ||sigma(u)||_HS^2 <= C (1 + ||u||_L2^2) for every u."""
        add = 2.0 * float(np.sum(self.q * self.q * self.a * self.a))
        mult = 2.0 * self.lipschitz_sq()
        return max(add, mult)

    def lipschitz_sq(self) -> float:
        """max_i q_i^2 b_i^2, the squared HS-Lipschitz constant."""
        if self.m == 0:
            return 0.0
        return float(np.max(self.q * self.q * self.b * self.b))

    def truncate(self, m: int) -> "NoiseModel":
        """Noise restricted to the first m modes (same seed: the shared-path
        coupling used by mode-count refinement studies)."""
        if m > self.m:
            raise ConfigurationError(f"cannot truncate {self.m}-mode noise to {m}")
        basis = StokesEigenbasis(self.basis.grid, m)
        return NoiseModel(basis, self.q[:m].copy(), self.a[:m].copy(),
                          self.b[:m].copy(), self.seed)

    def sigma_apply(self, u: VectorField, dw: np.ndarray) -> VectorField:
        """Physical-space noise increment sigma(u) dW for one step."""
        dw = np.asarray(dw, dtype=np.float64)
        if dw.shape != (self.m,):
            raise ContractViolationError(f"dW must have shape ({self.m},)")
        s = self.coefficients_physical(u)
        nxh, nyh_arr = self.basis.scatter(s * dw)
        g = self.basis.grid
        return VectorField(g, irfft2(nxh, g.shape), irfft2(nyh_arr, g.shape))


def make_noise_model(grid: Grid, m: int, q0: float = 1.0, decay_power: float = 1.5,
                     a_scale: float = 1.0, b_scale: float = 0.0,
                     seed: int = 0) -> NoiseModel:
    basis = StokesEigenbasis(grid, m)
    if m == 0:
        z = np.zeros(0)
        return NoiseModel(basis, z, z.copy(), z.copy(), seed)
    q = q0 * basis.beta ** (-decay_power)
    a = np.full(m, a_scale)
    b = np.full(m, b_scale)
    return NoiseModel(basis, q, a, b, seed)


# -- Wiener paths ---------------------------------------------------------------


@dataclass(frozen=True)
class WienerPath:
    """Increment matrix (steps, m); entry [k, i] is the increment of the i-th
    scalar Brownian motion over [k*dt, (k+1)*dt]."""

    dt: float
    increments: np.ndarray
    seed: int

    @property
    def steps(self) -> int:
        return self.increments.shape[0]

    @property
    def m(self) -> int:
        return self.increments.shape[1]

    def coarsen(self, factor: int) -> "WienerPath":
        """Sum consecutive groups of increments: the same Brownian path on a
        coarser step grid."""
        if factor < 1 or self.steps % factor != 0:
            raise ConfigurationError(
                f"coarsening factor {factor} does not divide {self.steps} steps")
        inc = self.increments.reshape(self.steps // factor, factor, self.m).sum(axis=1)
        return WienerPath(self.dt * factor, inc, self.seed)


def _mode_stream(seed: int, i: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=(int(seed), _STREAM_TAG, int(i)))
    return np.random.Generator(np.random.Philox(seed=ss))


def wiener_path(m: int, steps: int, dt: float, seed: int) -> WienerPath:
    """Draw a path from per-mode counter-based streams; column i is a function
    of (seed, i) only, independent of m."""
    if steps < 0:
        raise ConfigurationError(f"steps must be >= 0, got {steps}")
    if dt <= 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    inc = np.empty((steps, m))
    root = np.sqrt(dt)
    for i in range(m):
        inc[:, i] = root * _mode_stream(seed, i).standard_normal(steps)
    return WienerPath(float(dt), inc, int(seed))


def member_seed(master_seed: int, index: int) -> int:
    """Derived per-member seed for ensembles, stable and collision-resistant."""
    ss = np.random.SeedSequence(entropy=(int(master_seed), 0x6D656D62, int(index)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
