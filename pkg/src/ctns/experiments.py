"""Multi-run experiment drivers.

* ensemble_run: independent noise paths from derived member seeds; reports
  per-member entropy suprema, the moment ratio E[sup E] / D0, and the
  ensemble-mean residual of the stochastic entropy increment bound.
* galerkin_sweep: one shared Wiener path, noise truncated to increasing mode
  counts; reports L2-in-time distances between consecutive resolutions.
* twin_run: two runs coupled through the same path with a perturbed initial
  state; reports the distance functional, regularity envelope, and fitted
  Gronwall constant.
* refinement_study: time-step (or grid) refinement against a reference
  solution; reports errors, the fitted convergence order, and fit quality.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .diagnostics import (
    calibrate_dissipation_constant,
    entropy_total_series,
    increment_residual,
    initial_budget,
    stability_functionals,
    StabilityReport,
)
from .errors import ConfigurationError, DivergenceError, StepSizeError
from .fields import Grid, ScalarField, State, VectorField, irfft2, rfft2
from .noise import member_seed, wiener_path
from .stepper import Simulation, StepperConfig, run


# -- ensembles -------------------------------------------------------------------


@dataclass(frozen=True)
class EnsembleResult:
    members: int
    master_seed: int
    k_const: float
    growth_const: float
    d0: float
    member_stats: tuple
    mean_increment_residual: np.ndarray | None
    survivors: int

    @property
    def sup_entropies(self) -> np.ndarray:
        return np.array([m["sup_entropy"] for m in self.member_stats
                         if m["survived"]])

    @property
    def moment_ratio(self) -> float:
        """mean over members of sup_t E(t), divided by the initial budget."""
        return float(np.mean(self.sup_entropies)) / self.d0

    def quantiles(self, qs=(0.25, 0.5, 0.75, 0.9)) -> dict:
        sup = self.sup_entropies
        return {f"q{int(100 * q)}": float(np.quantile(sup, q)) for q in qs}

    def as_dict(self) -> dict:
        out = {
            "members": self.members,
            "master_seed": self.master_seed,
            "k_const": self.k_const,
            "growth_const": self.growth_const,
            "d0": self.d0,
            "survivors": self.survivors,
            "moment_ratio": self.moment_ratio,
            "quantiles": self.quantiles(),
            "member_stats": list(self.member_stats),
        }
        if self.mean_increment_residual is not None:
            out["max_mean_increment_residual"] = float(
                np.max(self.mean_increment_residual))
        return out


def ensemble_run(cfg: StepperConfig, initial: State, members: int,
                 master_seed: int, k_const: float | None = None,
                 growth_const: float | None = None,
                 on_member=None) -> EnsembleResult:
    """Run `members` independent paths of the same configuration.

    Member i uses a noise seed derived from (master_seed, i).  Runs that blow
    up or trip the step-size guard are recorded as non-survivors rather than
    aborting the ensemble.  The envelope constant defaults to a calibration on
    the first surviving member; the growth constant defaults to the noise
    model's own linear-growth bound.
    """
    if cfg.noise is None:
        raise ConfigurationError("ensemble runs need a noise model")
    if members < 1:
        raise ConfigurationError(f"members must be >= 1, got {members}")
    if not cfg.track_dissipation:
        raise ConfigurationError("ensemble statistics need dissipation tracking")

    if growth_const is None:
        growth_const = cfg.noise.growth_constant()
    d0 = initial_budget(initial, cfg.coeffs)

    stats = []
    residual_sum = None
    residual_count = 0
    for i in range(members):
        seed_i = member_seed(master_seed, i)
        cfg_i = replace(cfg, noise=replace(cfg.noise, seed=seed_i))
        entry = {"member": i, "seed": seed_i, "survived": True}
        try:
            traj = run(cfg_i, initial)
        except (DivergenceError, StepSizeError) as exc:
            entry["survived"] = False
            entry["reason"] = str(exc)
            stats.append(entry)
            continue
        if k_const is None:
            k_const = calibrate_dissipation_constant(traj, cfg.coeffs)
        total = entropy_total_series(traj, cfg.coeffs, k_const)
        entry["sup_entropy"] = float(np.max(total))
        entry["final_entropy"] = float(total[-1])
        entry["sup_u_l2_sq"] = float(np.max(traj["u_l2_sq"]))
        entry["mass_drift"] = float(abs(traj["mass"][-1] - traj["mass"][0])
                                    / max(abs(traj["mass"][0]), 1e-300))
        res = increment_residual(traj, cfg.coeffs, k_const, growth_const)
        residual_sum = res if residual_sum is None else residual_sum + res
        residual_count += 1
        if on_member is not None:
            on_member(i, traj, k_const)
        stats.append(entry)

    survivors = sum(1 for s in stats if s["survived"])
    if survivors == 0:
        raise DivergenceError("every ensemble member diverged", term="ensemble")
    mean_res = residual_sum / residual_count if residual_count else None
    return EnsembleResult(members=members, master_seed=master_seed,
                          k_const=float(k_const), growth_const=float(growth_const),
                          d0=d0, member_stats=tuple(stats),
                          mean_increment_residual=mean_res, survivors=survivors)


# -- spectral truncation sweep -----------------------------------------------------


@dataclass(frozen=True)
class GalerkinResult:
    mode_counts: tuple
    distances: tuple  # combined L2(0,T; L2) distance between consecutive resolutions
    component_distances: dict  # "n" / "c" / "u" -> per-pair distance tuples
    decreasing: bool

    def component_decreasing(self, name: str) -> bool:
        d = self.component_distances[name]
        return all(b < a for a, b in zip(d, d[1:]))

    def as_dict(self) -> dict:
        return {"mode_counts": list(self.mode_counts),
                "distances": list(self.distances),
                "component_distances": {k: list(v)
                                        for k, v in self.component_distances.items()},
                "decreasing": self.decreasing}


def galerkin_sweep(cfg: StepperConfig, initial: State,
                   mode_counts: list) -> GalerkinResult:
    """Integrate the same path under noise truncated to increasing mode counts
    (all driven by one Wiener path with max(mode_counts) columns) and measure
    the L2-in-time distance between consecutive runs, stepping in lockstep."""
    if cfg.noise is None:
        raise ConfigurationError("the truncation sweep needs a noise model")
    ms = list(mode_counts)
    if len(ms) < 2 or any(b <= a for a, b in zip(ms, ms[1:])):
        raise ConfigurationError("mode_counts must be strictly increasing, length >= 2")
    if ms[-1] > cfg.noise.m:
        raise ConfigurationError(
            f"largest mode count {ms[-1]} exceeds the model's {cfg.noise.m} modes")

    steps = cfg.steps
    path = wiener_path(ms[-1], steps, cfg.dt, cfg.noise.seed)
    sims = []
    for m in ms:
        cfg_m = replace(cfg, noise=cfg.noise.truncate(m),
                        track_dissipation=False)
        sims.append(Simulation(cfg_m, initial))

    ca = initial.grid.cell_area
    acc = np.zeros((3, len(ms) - 1))  # squared-distance integrals for n, c, u

    def pair_distance_parts(a: Simulation, b: Simulation):
        dn = a.n - b.n
        dc = a.c - b.c
        dux = a.ux - b.ux
        duy = a.uy - b.uy
        return (ca * float(np.sum(dn * dn)),
                ca * float(np.sum(dc * dc)),
                ca * float(np.sum(dux * dux) + np.sum(duy * duy)))

    for k in range(steps):
        for j in range(len(ms) - 1):
            parts = pair_distance_parts(sims[j], sims[j + 1])
            for row in range(3):
                acc[row, j] += cfg.dt * parts[row]
        for sim, m in zip(sims, ms):
            sim.step(path.increments[k, :m])
    comp = {name: tuple(float(x) for x in np.sqrt(acc[row]))
            for row, name in enumerate(("n", "c", "u"))}
    dists = tuple(float(x) for x in np.sqrt(acc.sum(axis=0)))
    return GalerkinResult(mode_counts=tuple(ms), distances=dists,
                          component_distances=comp,
                          decreasing=all(b < a for a, b in zip(dists, dists[1:])))


# -- coupled twin runs --------------------------------------------------------------


@dataclass(frozen=True)
class TwinResult:
    delta0: float
    perturbed: str
    report: StabilityReport

    def as_dict(self) -> dict:
        out = {"delta0": self.delta0, "perturbed": self.perturbed}
        out.update(self.report.as_dict())
        return out


def _perturbation_pattern(grid: Grid):
    """Unit-L2-norm perturbation shapes inside the dealiased band."""
    xx, yy = grid.meshgrid()
    ax = 2.0 * np.pi / grid.lx
    ay = 2.0 * np.pi / grid.ly
    scalar = np.sqrt(2.0 / grid.area) * np.cos(ax * xx) * np.cos(ay * yy) * np.sqrt(2.0)
    # cos*cos has L2 norm sqrt(area)/2, so the prefactor normalizes to 1
    vec_x = np.sqrt(2.0 / grid.area) * np.sin(ax * xx) * np.cos(ay * yy)
    vec_y = -np.sqrt(2.0 / grid.area) * (ax / ay) * np.cos(ax * xx) * np.sin(ay * yy)
    norm = np.sqrt(grid.cell_area * (np.sum(vec_x ** 2) + np.sum(vec_y ** 2)))
    vec_x /= norm
    vec_y /= norm
    return scalar, vec_x, vec_y


def twin_run(cfg: StepperConfig, initial: State, delta0: float = 1e-6,
             perturb: str = "velocity", snapshot_stride: int = 10) -> TwinResult:
    """Two runs with identical noise, the second from a perturbed initial
    state at distance delta0; the distance functional starts at delta0^2 per
    perturbed component."""
    if perturb not in ("velocity", "density", "attractant", "all"):
        raise ConfigurationError(f"unknown perturbation target {perturb!r}")
    cfg_t = replace(cfg, snapshot_stride=snapshot_stride, track_dissipation=False)
    steps = cfg_t.steps
    path = None
    if cfg_t.noise is not None:
        path = wiener_path(cfg_t.noise.m, steps, cfg_t.dt, cfg_t.noise.seed)

    scalar, vec_x, vec_y = _perturbation_pattern(initial.grid)
    g = initial.grid
    n2 = initial.n.values.copy()
    c2 = initial.c.values.copy()
    ux2 = initial.u.x.copy()
    uy2 = initial.u.y.copy()
    if perturb in ("density", "all"):
        n2 = n2 + delta0 * scalar
    if perturb in ("attractant", "all"):
        c2 = c2 + delta0 * scalar
    if perturb in ("velocity", "all"):
        ux2 = ux2 + delta0 * vec_x
        uy2 = uy2 + delta0 * vec_y
    perturbed = State(ScalarField(g, n2), ScalarField(g, c2),
                      VectorField(g, ux2, uy2), initial.t)

    traj1 = run(cfg_t, initial, wiener=path)
    traj2 = run(cfg_t, perturbed, wiener=path)
    report = stability_functionals(traj1, traj2)
    return TwinResult(delta0=delta0, perturbed=perturb, report=report)


# -- refinement studies ---------------------------------------------------------------


@dataclass(frozen=True)
class RefinementResult:
    kind: str  # "dt" or "grid"
    parameters: tuple  # dt values or grid sizes
    errors: tuple
    order: float
    r_squared: float
    inconclusive: bool
    paths: int = 1

    def as_dict(self) -> dict:
        return {"kind": self.kind, "parameters": list(self.parameters),
                "errors": list(self.errors), "order": self.order,
                "r_squared": self.r_squared,
                "inconclusive": self.inconclusive, "paths": self.paths}


def _state_distance(a: State, b: State) -> float:
    ca = a.grid.cell_area
    dn = a.n.values - b.n.values
    dc = a.c.values - b.c.values
    dux = a.u.x - b.u.x
    duy = a.u.y - b.u.y
    return float(np.sqrt(ca * (np.sum(dn * dn) + np.sum(dc * dc)
                               + np.sum(dux * dux) + np.sum(duy * duy))))


def _fit_order(params: np.ndarray, errors: np.ndarray):
    """Least squares slope of log error against log parameter."""
    if np.any(errors <= 0.0) or len(params) < 2:
        return 0.0, 0.0, True
    x = np.log(np.asarray(params))
    y = np.log(np.asarray(errors))
    if np.ptp(x) == 0.0:
        return 0.0, 0.0, True
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(slope), float(r2), bool(r2 < 0.9)


def _quiet(cfg: StepperConfig) -> StepperConfig:
    return replace(cfg, track_dissipation=False, record_stride=max(cfg.steps, 1),
                   snapshot_stride=0)


def refinement_study_dt(cfg: StepperConfig, initial: State, dt_list: list,
                        paths: int = 1, master_seed: int = 0) -> RefinementResult:
    """Time-step refinement.

    Deterministic configurations use Richardson extrapolation from the two
    finest steps as the reference; stochastic ones couple every dt to a
    shared fine path (dt_min / 4) per sample path and average the endpoint
    errors in root mean square over paths.
    """
    dts = sorted(set(float(d) for d in dt_list), reverse=True)
    if len(dts) < 2:
        raise ConfigurationError("dt refinement needs at least two distinct steps")
    t_final = cfg.t_final
    for d in dts:
        steps = t_final / d
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ConfigurationError(f"t_final is not an integer multiple of dt {d}")

    def cfg_for(dt: float) -> StepperConfig:
        return _quiet(replace(cfg, dt=dt))

    if cfg.noise is None:
        fine = dts[-1]
        sol = {d: run(cfg_for(d), initial).final for d in dts}
        half = run(cfg_for(fine / 2.0), initial).final
        # first-order Richardson reference: 2 x(h/2) - x(h)
        g = initial.grid
        ref = State(
            ScalarField(g, 2.0 * half.n.values - sol[fine].n.values),
            ScalarField(g, 2.0 * half.c.values - sol[fine].c.values),
            VectorField(g, 2.0 * half.u.x - sol[fine].u.x,
                        2.0 * half.u.y - sol[fine].u.y),
            half.t)
        errors = [_state_distance(sol[d], ref) for d in dts]
        order, r2, bad = _fit_order(np.array(dts), np.array(errors))
        return RefinementResult("dt", tuple(dts), tuple(errors), order, r2, bad)

    dt_fine = dts[-1] / 4.0
    steps_fine = int(round(t_final / dt_fine))
    sq_err = np.zeros(len(dts))
    for p in range(paths):
        seed_p = member_seed(master_seed, p)
        fine_path = wiener_path(cfg.noise.m, steps_fine, dt_fine, seed_p)
        cfg_ref = _quiet(replace(cfg, dt=dt_fine,
                                 noise=replace(cfg.noise, seed=seed_p)))
        ref = run(cfg_ref, initial, wiener=fine_path).final
        for j, d in enumerate(dts):
            factor = int(round(d / dt_fine))
            cfg_d = _quiet(replace(cfg, dt=d, noise=replace(cfg.noise, seed=seed_p)))
            traj = run(cfg_d, initial, wiener=fine_path.coarsen(factor))
            sq_err[j] += _state_distance(traj.final, ref) ** 2
    errors = np.sqrt(sq_err / paths)
    order, r2, bad = _fit_order(np.array(dts), errors)
    return RefinementResult("dt", tuple(dts), tuple(float(e) for e in errors),
                            order, r2, bad, paths=paths)


def _inject_scalar(grid_from: Grid, grid_to: Grid, values: np.ndarray) -> np.ndarray:
    """Spectral zero-padding onto a finer grid (exact for band-limited data)."""
    fh = rfft2(values)
    nxf, nyhf = grid_to.nx, grid_to.ny // 2 + 1
    out = np.zeros((nxf, nyhf), dtype=np.complex128)
    nxc = grid_from.nx
    nyhc = grid_from.ny // 2 + 1
    half = nxc // 2
    out[:half, :nyhc] = fh[:half, :]
    out[nxf - half:, :nyhc] = fh[nxc - half:, :]
    scale = (grid_to.nx * grid_to.ny) / (grid_from.nx * grid_from.ny)
    return irfft2(out * scale, grid_to.shape)


def _restrict_scalar(grid_from: Grid, grid_to: Grid, values: np.ndarray) -> np.ndarray:
    """Spectral truncation onto a coarser grid."""
    fh = rfft2(values)
    nxc, nyhc = grid_to.nx, grid_to.ny // 2 + 1
    half = nxc // 2
    out = np.zeros((nxc, nyhc), dtype=np.complex128)
    out[:half, :] = fh[:half, :nyhc]
    out[half:, :] = fh[grid_from.nx - half:, :nyhc]
    out[half, :] = 0.0  # drop the unpaired coarse Nyquist row
    out[:, -1] = 0.0
    scale = (grid_to.nx * grid_to.ny) / (grid_from.nx * grid_from.ny)
    return irfft2(out * scale, grid_to.shape)


def _move_state(state: State, grid_to: Grid) -> State:
    g = state.grid
    if (grid_to.nx, grid_to.ny) == (g.nx, g.ny):
        return state
    mover = _inject_scalar if grid_to.nx >= g.nx else _restrict_scalar
    return State(
        ScalarField(grid_to, mover(g, grid_to, state.n.values)),
        ScalarField(grid_to, mover(g, grid_to, state.c.values)),
        VectorField(grid_to, mover(g, grid_to, state.u.x),
                    mover(g, grid_to, state.u.y)),
        state.t)


def refinement_study_grid(cfg: StepperConfig, initial: State,
                          sizes: list) -> RefinementResult:
    """Grid refinement at fixed dt: the initial state is injected spectrally
    onto each grid, and endpoint solutions are compared on the coarsest grid
    against the restricted finest-grid solution."""
    ns = sorted(set(int(s) for s in sizes))
    if len(ns) < 2:
        raise ConfigurationError("grid refinement needs at least two sizes")
    if cfg.noise is not None:
        raise ConfigurationError("grid refinement supports deterministic runs only")
    g0 = initial.grid
    finals = {}
    for n in ns:
        g = Grid(n, n, g0.lx, g0.ly, g0.bc)
        init_n = _move_state(initial, g)
        finals[n] = run(_quiet(cfg), init_n).final
    coarse = Grid(ns[0], ns[0], g0.lx, g0.ly, g0.bc)
    ref = _move_state(finals[ns[-1]], coarse)
    errors = []
    for n in ns[:-1]:
        errors.append(_state_distance(_move_state(finals[n], coarse), ref))
    hs = [g0.lx / n for n in ns[:-1]]
    order, r2, bad = _fit_order(np.array(hs), np.array(errors))
    return RefinementResult("grid", tuple(ns[:-1]), tuple(errors), order, r2, bad)
