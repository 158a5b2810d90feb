"""Time integration by stochastic exponential Euler.

Each step applies the exact per-mode diffusion (or Stokes) semigroup to the
previous state minus dt times the nonlinear terms frozen at the left endpoint,
with the noise increment injected inside the final semigroup:

    n+ = S_delta(dt) [n - dt (div(u n) + div(chi(c) n grad c))]
    c+ = S_mu(dt)    [c - dt (div(u c) + k(c) n)]
    u+ = S_nu(dt)    [u - dt P(div(u x u) + n grad phi) + sigma(u) dW]

All transport terms are in conservative flux form and dealiased, so the mean
of n and the divergence-free property of u are preserved bit-exactly.  The
left-endpoint evaluation makes the noise term an Ito sum.

Dissipation tracking accumulates five nonnegative time integrals with
left-endpoint quadrature (rates evaluated at the pre-step state):
grad-sqrt-density, velocity gradient, and the three aggregation-transform
integrands (Hessian defect, quartic gradient, density-weighted gradient).

The advective step-size guard dt <= safety * min(h) / (max|u| + max|chi grad c|)
is re-checked every step; violations raise a step-size error carrying the
admissible dt.  Fields that stop being finite raise a divergence error naming
the term that broke first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels, operators
from .coefficients import CoefficientSet
from .errors import (
    ConfigurationError,
    ContractViolationError,
    DivergenceError,
    InvariantBreachError,
    StepSizeError,
)
from .fields import (
    SQUARE_NEUMANN,
    DissipationAccumulators,
    Grid,
    ScalarField,
    SemigroupKernel,
    State,
    VectorField,
    doubled_grid,
    even_extend,
    h1_sq_from_rfft2,
    h1_seminorm,
    irfft2,
    l2_norm,
    l2_sq_from_rfft2,
    rfft2,
    tables,
)
from .noise import NoiseModel, WienerPath, wiener_path

EPS_N = 1e-12  # density floor inside entropy and Fisher integrands


@dataclass(frozen=True)
class StepperConfig:
    """Everything a run needs besides the initial state."""

    dt: float
    t_final: float
    coeffs: CoefficientSet
    noise: NoiseModel | None = None
    cfl_safety: float = 0.5
    divergence_tol: float = 1e-8
    clip_negative: bool = False
    track_dissipation: bool = True
    record_stride: int = 1
    snapshot_stride: int = 0
    strict_monitors: bool = False
    mass_drift_tol: float = 1e-9
    c_overshoot_tol: float = 1e-5
    negativity_tol: float = 1e-5

    def __post_init__(self):
        if not np.isfinite(self.dt) or self.dt <= 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt!r}")
        if not np.isfinite(self.t_final) or self.t_final <= 0:
            raise ConfigurationError(f"t_final must be positive, got {self.t_final!r}")
        steps = self.t_final / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ConfigurationError(
                f"t_final {self.t_final} is not an integer multiple of dt {self.dt}")
        if self.record_stride < 1:
            raise ConfigurationError("record_stride must be >= 1")

    @property
    def steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass
class Trajectory:
    """Per-step scalar series, optional field snapshots, and the final state."""

    grid: Grid
    config: StepperConfig
    series: dict
    states: list
    final: State
    breaches: list
    clipped_mass: float = 0.0

    def __getitem__(self, key: str) -> np.ndarray:
        return self.series[key]


class Simulation:
    """Mutable integration context: spectral + physical state, cached decay
    factors, and the running dissipation accumulators."""

    def __init__(self, cfg: StepperConfig, initial: State):
        self.cfg = cfg
        grid = initial.grid
        self.grid = grid
        self.coeffs = cfg.coeffs
        if cfg.noise is not None and cfg.noise.basis.grid != grid:
            raise ConfigurationError("noise model grid differs from state grid")
        if cfg.track_dissipation:
            probe = np.linspace(0.0, self.coeffs.c_max, 257)
            if float(np.min(self.coeffs.chi(probe))) <= 0.0:
                raise ConfigurationError(
                    "dissipation tracking needs a positive sensitivity chi")

        if float(np.min(initial.n.values)) < -1e-6:
            raise ContractViolationError(
                f"initial density has negative entries (min {float(np.min(initial.n.values)):.3e})")

        self._square = grid.bc == SQUARE_NEUMANN
        self.t = float(initial.t)
        self.step_index = 0
        self.accum = (initial.accum.copy() if initial.accum is not None
                      else DissipationAccumulators())
        self.clipped_mass = 0.0

        if self._square:
            # generic field-level path: keep physical fields only
            self.n = initial.n.values.copy()
            self.c = initial.c.values.copy()
            self.ux = initial.u.x.copy()
            self.uy = initial.u.y.copy()
            ds = operators.divergence_sup(initial.u)
            if ds > cfg.divergence_tol:
                raise ContractViolationError(
                    f"initial velocity is not divergence-free (max div {ds:.3e})")
        else:
            tb = tables(grid)
            self._tb = tb
            nh = _kernels.masked_scale(rfft2(initial.n.values), tb.dealias)
            ch = _kernels.masked_scale(rfft2(initial.c.values), tb.dealias)
            uxh = _kernels.masked_scale(rfft2(initial.u.x), tb.dealias)
            uyh = _kernels.masked_scale(rfft2(initial.u.y), tb.dealias)
            uxh, uyh = _kernels.leray_project(uxh, uyh, tb.kxd, tb.kyd, tb.inv_ksq_d)
            div_sup = self._div_sup(uxh, uyh)
            if div_sup > cfg.divergence_tol:
                raise ContractViolationError(
                    f"initial velocity is not divergence-free (max div {div_sup:.3e})")
            self.nh, self.ch, self.uxh, self.uyh = nh, ch, uxh, uyh
            self._materialize()
            co = self.coeffs
            self._decay_n = SemigroupKernel(grid, co.delta).factors(cfg.dt)
            self._decay_c = SemigroupKernel(grid, co.mu).factors(cfg.dt)
            self._decay_u = SemigroupKernel(grid, co.nu).factors(cfg.dt)

        gx, gy = self.coeffs.phi.gradient(grid)
        self._phi_gx, self._phi_gy = gx, gy
        self._phi_gx_zero = not np.any(gx)
        self._phi_gy_zero = not np.any(gy)
        self._diag_time = None
        self._diag = None

    # -- helpers --

    def _div_sup(self, uxh, uyh) -> float:
        tb = self._tb
        dh = _kernels.flux_divergence(uxh, uyh, tb.kxd, tb.kyd, tb.ones)
        return float(np.max(np.abs(irfft2(dh, self.grid.shape))))

    def _materialize(self):
        shape = self.grid.shape
        self.n = irfft2(self.nh, shape)
        self.c = irfft2(self.ch, shape)
        self.ux = irfft2(self.uxh, shape)
        self.uy = irfft2(self.uyh, shape)

    def state(self) -> State:
        g = self.grid
        return State(ScalarField(g, self.n.copy()), ScalarField(g, self.c.copy()),
                     VectorField(g, self.ux.copy(), self.uy.copy()), self.t,
                     self.accum.copy())

    # -- diagnostics at the current time (cached per step) --

    def diagnostics(self) -> dict:
        if self._diag_time == (self.t, self.step_index):
            return self._diag
        g = self.grid
        ca = g.cell_area
        rec = {
            "t": self.t,
            "mass": ca * float(self.n.sum()),
            "sup_c": float(self.c.max()),
            "min_c": float(self.c.min()),
            "min_n": float(self.n.min()),
            "sup_n": float(self.n.max()),
        }
        if self._square:
            uf = VectorField(g, self.ux, self.uy)
            rec["u_l2_sq"] = l2_norm(uf) ** 2
            rec["enstrophy_rate"] = h1_seminorm(uf) ** 2
        else:
            rec["u_l2_sq"] = (l2_sq_from_rfft2(g, self.uxh)
                              + l2_sq_from_rfft2(g, self.uyh))
            rec["enstrophy_rate"] = (h1_sq_from_rfft2(g, self.uxh)
                                     + h1_sq_from_rfft2(g, self.uyh))
        if self.cfg.noise is not None:
            s = self._sigma_coefficients()
            rec["hs_norm_sq"] = float(np.sum(s * s))
        else:
            rec["hs_norm_sq"] = 0.0

        if self.cfg.track_dissipation:
            nlogn, floored = _kernels.nlogn_sum(self.n, EPS_N)
            rec["nlogn"] = ca * nlogn
            rec["floored_cells"] = float(floored)
            root = np.sqrt(np.maximum(self.n, EPS_N))
            psi_vals = np.ascontiguousarray(self.coeffs.psi(self.c))
            w = np.ascontiguousarray(self.coeffs.psi_weight(self.c))
            if self._square:
                sf = ScalarField(g, root)
                rec["fisher_rate"] = h1_seminorm(sf) ** 2
                pf = ScalarField(g, psi_vals)
                rec["psi_grad_sq"] = h1_seminorm(pf) ** 2
                gp = operators.gradient(pf)
                gpx, gpy = gp.x, gp.y
                hxx, hxy, hyy = (h.values for h in operators.hessian(pf))
            else:
                rec["fisher_rate"] = h1_sq_from_rfft2(g, rfft2(root))
                ph = rfft2(psi_vals)
                tb = self._tb
                rec["psi_grad_sq"] = h1_sq_from_rfft2(g, ph)
                gxh, gyh = _kernels.spectral_gradient(ph, tb.kxd, tb.kyd)
                gpx = irfft2(gxh, g.shape)
                gpy = irfft2(gyh, g.shape)
                hxx = irfft2(_kernels.masked_scale(ph, -(tb.kxd * tb.kxd)), g.shape)
                hxy = irfft2(_kernels.masked_scale(ph, -(tb.kxd * tb.kyd)), g.shape)
                hyy = irfft2(_kernels.masked_scale(ph, -(tb.kyd * tb.kyd)), g.shape)
            hxx = np.ascontiguousarray(hxx)
            hxy = np.ascontiguousarray(hxy)
            hyy = np.ascontiguousarray(hyy)
            gpx = np.ascontiguousarray(gpx)
            gpy = np.ascontiguousarray(gpy)
            rec["hessian_rate"] = ca * _kernels.hessian_defect_sum(
                hxx, hxy, hyy, gpx, gpy, w)
            quart, cross = _kernels.quartic_cross_sums(gpx, gpy, self.n)
            rec["quartic_rate"] = ca * quart
            rec["cross_rate"] = ca * cross
            rec["acc_fisher"] = self.accum.fisher
            rec["acc_enstrophy"] = self.accum.enstrophy
            rec["acc_hessian"] = self.accum.hessian
            rec["acc_quartic"] = self.accum.quartic
            rec["acc_cross"] = self.accum.cross

        self._diag_time = (self.t, self.step_index)
        self._diag = rec
        return rec

    def _sigma_coefficients(self) -> np.ndarray:
        model = self.cfg.noise
        if self._square:
            return model.coefficients(rfft2(self.ux), rfft2(self.uy))
        return model.coefficients(self.uxh, self.uyh)

    # -- stepping --

    def step(self, dw: np.ndarray | None = None):
        cfg = self.cfg
        model = cfg.noise
        if model is not None:
            if dw is None:
                raise ContractViolationError("noise model present but no increment given")
            dw = np.asarray(dw, dtype=np.float64)
            if dw.shape != (model.m,):
                raise ContractViolationError(
                    f"increment has shape {dw.shape}, expected ({model.m},)")

        rates = None
        if cfg.track_dissipation:
            d = self.diagnostics()
            rates = (d["fisher_rate"], d["enstrophy_rate"], d["hessian_rate"],
                     d["quartic_rate"], d["cross_rate"])

        if self._square:
            self._step_square(dw)
        else:
            self._step_torus(dw)

        if rates is not None:
            dt = cfg.dt
            self.accum.fisher += dt * rates[0]
            self.accum.enstrophy += dt * rates[1]
            self.accum.hessian += dt * rates[2]
            self.accum.quartic += dt * rates[3]
            self.accum.cross += dt * rates[4]
        self.t += cfg.dt
        self.step_index += 1

    def _check_cfl(self, gcx, gcy, chi_vals):
        cfg = self.cfg
        umax = _kernels.vector_max(self.ux, self.uy)
        chemo = _kernels.scaled_vector_max(np.abs(chi_vals), gcx, gcy)
        speed = umax + chemo
        h = min(self.grid.hx, self.grid.hy)
        if speed * cfg.dt > cfg.cfl_safety * h:
            admissible = cfg.cfl_safety * h / speed
            raise StepSizeError(
                f"dt {cfg.dt:.3e} exceeds advective limit {admissible:.3e} "
                f"at t = {self.t:.6f} (max transport speed {speed:.3f})",
                admissible_dt=admissible)

    def _step_torus(self, dw):
        cfg = self.cfg
        dt = cfg.dt
        g = self.grid
        tb = self._tb
        shape = g.shape
        co = self.coeffs

        gxh, gyh = _kernels.spectral_gradient(self.ch, tb.kxd, tb.kyd)
        gcx = irfft2(gxh, shape)
        gcy = irfft2(gyh, shape)
        chi_vals = np.ascontiguousarray(np.broadcast_to(
            np.asarray(co.chi(self.c), dtype=np.float64), shape))
        k_vals = np.ascontiguousarray(np.broadcast_to(
            np.asarray(co.k(self.c), dtype=np.float64), shape))
        self._check_cfl(gcx, gcy, chi_vals)

        # density: combined transport + aggregation flux
        fx = _kernels.transport_flux(self.n, self.ux, chi_vals, gcx)
        fy = _kernels.transport_flux(self.n, self.uy, chi_vals, gcy)
        gn = _kernels.flux_divergence(rfft2(fx), rfft2(fy), tb.kxd, tb.kyd, tb.dealias)
        nh_new = _kernels.semigroup_combine(self.nh, gn, self._decay_n, dt)

        # attractant: transport flux + consumption
        cfx = _kernels.multiply(self.ux, self.c)
        cfy = _kernels.multiply(self.uy, self.c)
        gc = _kernels.flux_divergence(rfft2(cfx), rfft2(cfy), tb.kxd, tb.kyd, tb.dealias)
        reac = _kernels.masked_scale(rfft2(_kernels.multiply(k_vals, self.n)), tb.dealias)
        ch_new = _kernels.semigroup_combine(self.ch, gc + reac, self._decay_c, dt)

        # velocity: momentum flux + buoyancy, projected, then noise in the
        # same semigroup application
        pxx = _kernels.multiply(self.ux, self.ux)
        pxy = _kernels.multiply(self.ux, self.uy)
        pyy = _kernels.multiply(self.uy, self.uy)
        gux = _kernels.flux_divergence(rfft2(pxx), rfft2(pxy), tb.kxd, tb.kyd, tb.dealias)
        guy = _kernels.flux_divergence(rfft2(pxy), rfft2(pyy), tb.kxd, tb.kyd, tb.dealias)
        if not self._phi_gx_zero:
            bx = _kernels.masked_scale(rfft2(_kernels.multiply(self.n, self._phi_gx)),
                                       tb.dealias)
            gux = gux + bx
        if not self._phi_gy_zero:
            by = _kernels.masked_scale(rfft2(_kernels.multiply(self.n, self._phi_gy)),
                                       tb.dealias)
            guy = guy + by
        gux, guy = _kernels.leray_project(gux, guy, tb.kxd, tb.kyd, tb.inv_ksq_d)

        if cfg.noise is not None:
            s = self._sigma_coefficients()
            nzx, nzy = cfg.noise.basis.scatter(s * dw)
            uxh_new = _kernels.semigroup_combine_noise(self.uxh, gux, nzx, self._decay_u, dt)
            uyh_new = _kernels.semigroup_combine_noise(self.uyh, guy, nzy, self._decay_u, dt)
        else:
            uxh_new = _kernels.semigroup_combine(self.uxh, gux, self._decay_u, dt)
            uyh_new = _kernels.semigroup_combine(self.uyh, guy, self._decay_u, dt)

        n_new = irfft2(nh_new, shape)
        c_new = irfft2(ch_new, shape)
        ux_new = irfft2(uxh_new, shape)
        uy_new = irfft2(uyh_new, shape)

        if not (np.isfinite(n_new).all() and np.isfinite(c_new).all()
                and np.isfinite(ux_new).all() and np.isfinite(uy_new).all()):
            term = "unknown"
            if not np.all(np.isfinite(gn.view(np.float64))):
                term = "density transport/aggregation flux"
            elif not np.all(np.isfinite((gc + reac).view(np.float64))):
                term = "attractant transport/consumption"
            elif not np.all(np.isfinite(gux.view(np.float64))) or \
                    not np.all(np.isfinite(guy.view(np.float64))):
                term = "momentum flux/buoyancy"
            raise DivergenceError(
                f"non-finite field after step at t = {self.t:.6f} ({term})",
                term=term, t=self.t)

        if cfg.clip_negative:
            n_new, nh_new = self._clip(n_new, nh_new)

        self.nh, self.ch, self.uxh, self.uyh = nh_new, ch_new, uxh_new, uyh_new
        self.n, self.c, self.ux, self.uy = n_new, c_new, ux_new, uy_new

    def _clip(self, n_new, nh_new=None):
        """Clip negative density and repair mass by uniform subtraction."""
        if not np.any(n_new < 0.0):
            return n_new, nh_new
        clipped = np.maximum(n_new, 0.0)
        added = float(clipped.sum() - n_new.sum()) * self.grid.cell_area
        clipped -= added / self.grid.area
        self.clipped_mass += added
        if self._square:
            return clipped, None
        return clipped, _kernels.masked_scale(rfft2(clipped), self._tb.dealias)

    def _step_square(self, dw):
        """Field-level path for the wall-bounded scalar mode; the velocity
        equation stays periodic."""
        cfg = self.cfg
        dt = cfg.dt
        g = self.grid
        co = self.coeffs

        n_f = ScalarField(g, self.n)
        c_f = ScalarField(g, self.c)
        u_f = VectorField(g, self.ux, self.uy)
        grad_c = operators.gradient(c_f)
        chi_vals = np.ascontiguousarray(np.broadcast_to(
            np.asarray(co.chi(self.c), dtype=np.float64), g.shape))
        k_vals = np.asarray(co.k(self.c), dtype=np.float64)
        self._check_cfl(grad_c.x, grad_c.y, chi_vals)

        adv_n = operators.advect_conservative(u_f, n_f, div_tol=cfg.divergence_tol)
        chemo = operators.chemotaxis_flux(n_f, c_f, co.chi)
        n_mid = ScalarField(g, self.n - dt * (adv_n.values + chemo.values))
        n_new = operators.heat_semigroup(n_mid, dt, co.delta).values

        adv_c = operators.advect_conservative(u_f, c_f, div_tol=cfg.divergence_tol)
        reac = _dealias_square(g, k_vals * self.n)
        c_mid = ScalarField(g, self.c - dt * (adv_c.values + reac))
        c_new = operators.heat_semigroup(c_mid, dt, co.mu).values

        # velocity on the torus, same arithmetic as the fast path
        tb = tables(g)
        uxh = rfft2(self.ux)
        uyh = rfft2(self.uy)
        pxx = _kernels.multiply(self.ux, self.ux)
        pxy = _kernels.multiply(self.ux, self.uy)
        pyy = _kernels.multiply(self.uy, self.uy)
        gux = _kernels.flux_divergence(rfft2(pxx), rfft2(pxy), tb.kxd, tb.kyd, tb.dealias)
        guy = _kernels.flux_divergence(rfft2(pxy), rfft2(pyy), tb.kxd, tb.kyd, tb.dealias)
        if not self._phi_gx_zero:
            gux = gux + _kernels.masked_scale(
                rfft2(_kernels.multiply(self.n, self._phi_gx)), tb.dealias)
        if not self._phi_gy_zero:
            guy = guy + _kernels.masked_scale(
                rfft2(_kernels.multiply(self.n, self._phi_gy)), tb.dealias)
        gux, guy = _kernels.leray_project(gux, guy, tb.kxd, tb.kyd, tb.inv_ksq_d)
        decay = SemigroupKernel(g, co.nu).factors(dt)
        if cfg.noise is not None:
            s = self._sigma_coefficients()
            nzx, nzy = cfg.noise.basis.scatter(s * dw)
            uxh_new = _kernels.semigroup_combine_noise(uxh, gux, nzx, decay, dt)
            uyh_new = _kernels.semigroup_combine_noise(uyh, guy, nzy, decay, dt)
        else:
            uxh_new = _kernels.semigroup_combine(uxh, gux, decay, dt)
            uyh_new = _kernels.semigroup_combine(uyh, guy, decay, dt)
        ux_new = irfft2(uxh_new, g.shape)
        uy_new = irfft2(uyh_new, g.shape)

        if not (np.isfinite(n_new).all() and np.isfinite(c_new).all()
                and np.isfinite(ux_new).all() and np.isfinite(uy_new).all()):
            raise DivergenceError(
                f"non-finite field after step at t = {self.t:.6f}", t=self.t)

        if cfg.clip_negative:
            n_new, _ = self._clip(n_new)
        self.n, self.c, self.ux, self.uy = n_new, c_new, ux_new, uy_new


def _dealias_square(grid: Grid, values: np.ndarray) -> np.ndarray:
    g2 = doubled_grid(grid)
    tb2 = tables(g2)
    out2 = irfft2(_kernels.masked_scale(rfft2(even_extend(values)), tb2.dealias),
                  g2.shape)
    return np.ascontiguousarray(out2[: grid.nx, : grid.ny])


def step(state: State, dt: float, coeffs: CoefficientSet,
         noise: NoiseModel | None = None, dw: np.ndarray | None = None,
         **options) -> State:
    """Advance one step.  Stateless convenience wrapper over Simulation; the
    returned state carries updated accumulators when tracking is enabled."""
    cfg = StepperConfig(dt=dt, t_final=dt, coeffs=coeffs, noise=noise, **options)
    sim = Simulation(cfg, state)
    sim.step(dw)
    return sim.state()


def run(cfg: StepperConfig, initial: State,
        wiener: WienerPath | None = None) -> Trajectory:
    """Integrate from the initial state to t_final, recording scalar series
    every record_stride steps (plus the initial and final instants) and field
    snapshots every snapshot_stride steps when requested."""
    steps = cfg.steps
    model = cfg.noise
    if model is not None:
        if wiener is None:
            wiener = wiener_path(model.m, steps, cfg.dt, model.seed)
        if wiener.increments.shape[0] != steps:
            raise ConfigurationError(
                f"wiener path has {wiener.increments.shape[0]} steps, run needs {steps}")
        if wiener.m < model.m:
            raise ConfigurationError(
                f"wiener path has {wiener.m} columns, noise model needs {model.m}")
        if abs(wiener.dt - cfg.dt) > 1e-12 * cfg.dt:
            raise ConfigurationError(
                f"wiener path dt {wiener.dt} does not match run dt {cfg.dt}")

    sim = Simulation(cfg, initial)
    records = []
    snapshots = []
    breaches = []
    mass0 = None
    sup_c0 = None

    def monitor(rec):
        nonlocal mass0, sup_c0
        if mass0 is None:
            mass0 = rec["mass"]
            sup_c0 = rec["sup_c"]
            return
        drift = abs(rec["mass"] - mass0) / max(abs(mass0), 1e-300)
        if drift > cfg.mass_drift_tol:
            breaches.append({"t": rec["t"], "kind": "mass_drift", "value": drift,
                             "tol": cfg.mass_drift_tol})
        over = rec["sup_c"] - sup_c0
        if over > cfg.c_overshoot_tol:
            breaches.append({"t": rec["t"], "kind": "c_overshoot", "value": over,
                             "tol": cfg.c_overshoot_tol})
        if rec["min_n"] < -cfg.negativity_tol:
            breaches.append({"t": rec["t"], "kind": "negative_density",
                             "value": rec["min_n"], "tol": cfg.negativity_tol})

    for k in range(steps + 1):
        if k % cfg.record_stride == 0 or k == steps:
            rec = sim.diagnostics()
            records.append(dict(rec))
            monitor(rec)
        if cfg.snapshot_stride and (k % cfg.snapshot_stride == 0 or k == steps):
            snapshots.append(sim.state())
        if k == steps:
            break
        dw = wiener.increments[k, :sim.cfg.noise.m] if model is not None else None
        sim.step(dw)

    if cfg.strict_monitors and breaches:
        b = breaches[0]
        raise InvariantBreachError(
            f"{b['kind']} = {b['value']:.3e} exceeded tolerance {b['tol']:.1e} "
            f"at t = {b['t']:.6f} ({len(breaches)} breach(es) total)")

    keys = records[0].keys()
    series = {key: np.array([r[key] for r in records]) for key in keys}
    return Trajectory(grid=sim.grid, config=cfg, series=series, states=snapshots,
                      final=sim.state(), breaches=breaches,
                      clipped_mass=sim.clipped_mass)


# -- initial data presets -------------------------------------------------------


def wrapped_gaussian(grid: Grid, x0: float, y0: float, sigma: float,
                     images: int = 3) -> np.ndarray:
    """Periodized Gaussian bump; integral 2 pi sigma^2 to machine precision
    for sigma <= min(lx, ly) / 8."""
    xx, yy = grid.meshgrid()
    out = np.zeros(grid.shape)
    for mx in range(-images, images + 1):
        for my in range(-images, images + 1):
            dx = xx - x0 + mx * grid.lx
            dy = yy - y0 + my * grid.ly
            out += np.exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma))
    return out


def band_limited_density(grid: Grid, seed: int, cutoff: int = 10,
                         offset: float = 0.0, amplitude: float = 1.0) -> ScalarField:
    """Nonnegative band-limited density sample: the square of a mean-free
    random trig polynomial (integer wavenumber radius <= cutoff, sup-norm 1)
    shifted by a uniform offset and scaled.  Squaring doubles the bandwidth,
    so cutoff <= nx/6 keeps the sample inside the dealiased band."""
    rng = np.random.Generator(np.random.Philox(
        seed=np.random.SeedSequence(entropy=(int(seed), 0x64656E73))))
    white = rng.standard_normal(grid.shape)
    sh = rfft2(white)
    ix = np.fft.fftfreq(grid.nx, d=1.0 / grid.nx)
    iy = np.arange(grid.ny // 2 + 1)
    rad2 = ix[:, None] ** 2 + iy[None, :] ** 2
    sh[rad2 > cutoff * cutoff] = 0.0
    sh[0, 0] = 0.0
    g = irfft2(sh, grid.shape)
    sup = np.max(np.abs(g))
    if sup > 0:
        g = g / sup
    return ScalarField(grid, amplitude * (offset + g) ** 2)


def _taylor_green(grid: Grid, amplitude: float):
    """Divergence-free cellular vortex from the stream function
    A sin(ax x) sin(ay y)."""
    xx, yy = grid.meshgrid()
    ax = 2.0 * np.pi / grid.lx
    ay = 2.0 * np.pi / grid.ly
    a = amplitude / max(ax, ay)
    ux = a * ay * np.sin(ax * xx) * np.cos(ay * yy)
    uy = -a * ax * np.cos(ax * xx) * np.sin(ay * yy)
    return ux, uy


def default_initial(grid: Grid, preset: str = "uniform_bump", seed: int = 0,
                    bump_amplitude: float = 0.5, c_base: float = 0.5,
                    c_amplitude: float = 0.4, u_amplitude: float = 0.5) -> State:
    """Initial data presets.

    uniform_bump: density 1 plus a centered Gaussian bump, cosine attractant
    profile inside (c_base - c_amp, c_base + c_amp), cellular vortex velocity.
    random_smooth: seeded band-limited random perturbations of the same means.
    benchmark: pinned two-bump configuration for cross-run comparisons.
    """
    xx, yy = grid.meshgrid()
    ax = 2.0 * np.pi / grid.lx
    ay = 2.0 * np.pi / grid.ly
    if preset == "uniform_bump":
        sig = grid.lx / 10.0
        n = 1.0 + bump_amplitude * wrapped_gaussian(grid, grid.lx / 2, grid.ly / 2, sig)
        c = c_base + c_amplitude * np.cos(ax * xx) * np.cos(ay * yy)
        ux, uy = _taylor_green(grid, u_amplitude)
    elif preset == "benchmark":
        sig = grid.lx / 12.0
        n = (1.0 + bump_amplitude * wrapped_gaussian(grid, 0.3 * grid.lx, 0.6 * grid.ly, sig)
             + 0.5 * bump_amplitude * wrapped_gaussian(grid, 0.7 * grid.lx, 0.3 * grid.ly, sig))
        c = c_base + c_amplitude * np.cos(ax * xx) * np.cos(ay * yy)
        ux, uy = _taylor_green(grid, u_amplitude)
    elif preset == "random_smooth":
        rng = np.random.Generator(np.random.Philox(
            seed=np.random.SeedSequence(entropy=(int(seed), 0x696E6974))))
        ell = 4.0 * max(grid.hx, grid.hy)

        def smooth_noise():
            white = rng.standard_normal(grid.shape)
            tb = tables(grid)
            sh = rfft2(white) * np.exp(-0.5 * ell * ell * tb.ksq) * tb.dealias
            r = irfft2(sh, grid.shape)
            r -= r.mean()
            sup = np.max(np.abs(r))
            return r / sup if sup > 0 else r

        n = 1.0 + bump_amplitude * smooth_noise()
        c = c_base + c_amplitude * smooth_noise()
        vx, vy = smooth_noise(), smooth_noise()
        v = VectorField(grid, vx, vy)
        p = operators.leray_project(v)
        sup = max(np.max(np.sqrt(p.x ** 2 + p.y ** 2)), 1e-300)
        ux, uy = u_amplitude * p.x / sup, u_amplitude * p.y / sup
    else:
        raise ConfigurationError(
            f"unknown initial preset {preset!r}; choose uniform_bump, random_smooth or benchmark")

    return State(ScalarField(grid, n), ScalarField(grid, c),
                 VectorField(grid, ux, uy), 0.0, DissipationAccumulators())
