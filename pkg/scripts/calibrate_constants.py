"""Calibration sweeps that freeze the empirical constants used by the
acceptance suite.

Four quantities are not fixed by theory and are instead calibrated once per
grid by maximizing the observed ratio over a seeded family, multiplying by a
1.1 safety factor, and freezing the result:

  * the interpolation-inequality prefactor (``gn_l2_bound``),
  * the velocity-gradient envelope constant in the entropy balance,
  * the affine growth constant of the ensemble increment bound,
  * tolerance ceilings for the residual checks at dt = 1e-3 and 5e-4.

Every family here uses seeds disjoint from the ones exercised by the test
suite, so the frozen numbers are never tuned against the runs that assert
them.  Run from the repo root:

    python scripts/calibrate_constants.py [--quick]

and paste the printed block into the constants it names.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace

import numpy as np

from ctns import (
    CoefficientSet,
    Grid,
    ScalarField,
    StepperConfig,
    band_limited_density,
    calibrate_dissipation_constant,
    chi_preset,
    default_initial,
    dissipation_residual,
    ensemble_run,
    gn_l2_bound,
    increment_residual,
    k_preset,
    log_entropy_bound,
    make_noise_model,
    max_principle_check,
    phi_preset,
    run,
    twin_run,
    wrapped_gaussian,
)

GRID = Grid(64, 64, 1.0, 1.0)

# The acceptance runs use the saturating consumption model so that every
# dissipation channel (including the quartic one) is active.
COEFFS = CoefficientSet(delta=1.0, mu=1.0, nu=1.0,
                        chi=chi_preset("one"), k=k_preset("saturating"),
                        phi=phi_preset("gravity", 0.1), c_max=1.0)

# Twin runs use gentler dissipation: with unit viscosity a 1e-8 velocity
# perturbation decays through the double-precision noise floor long before
# t = 1, leaving nothing but roundoff to fit.  At 0.05 the perturbation stays
# resolvable over the whole horizon.
COEFFS_SOFT = CoefficientSet(delta=0.05, mu=0.05, nu=0.05,
                             chi=chi_preset("one"), k=k_preset("saturating"),
                             phi=phi_preset("gravity", 0.1), c_max=1.0)


def base_config(dt: float = 1e-3, t_final: float = 1.0, noise=None,
                **kw) -> StepperConfig:
    return StepperConfig(dt=dt, t_final=t_final, coeffs=COEFFS, noise=noise,
                         track_dissipation=True, record_stride=1,
                         snapshot_stride=0, **kw)


# -- interpolation inequality prefactor -----------------------------------------


def calibration_density_family(quick: bool):
    """Fields deliberately broader than the test family: higher cutoffs, more
    extreme offsets (up to the constant-field limit, which maximizes the
    ratio on a unit-area torus), plus near-singular periodized bumps."""
    cutoffs = (2, 3, 5, 8, 10, 13, 16)
    offsets = (0.0, 0.02, 0.05, 0.15, 0.3, 0.6, 1.0, 2.0, 5.0, 20.0)
    seeds = range(5000, 5000 + (70 if quick else 420))
    for i, seed in enumerate(seeds):
        cut = cutoffs[i % len(cutoffs)]
        off = offsets[(i // len(cutoffs)) % len(offsets)]
        yield f"spectral c{cut} o{off}", band_limited_density(
            GRID, seed, cutoff=cut, offset=off)
    yield "constant", ScalarField(GRID, np.full(GRID.shape, 0.7))
    for sigma in (0.03, 0.05, 0.08, 0.12, 0.2):
        for x0, y0 in ((0.5, 0.5), (0.23, 0.71)):
            vals = wrapped_gaussian(GRID, x0 * GRID.lx, y0 * GRID.ly, sigma)
            yield f"gaussian s{sigma}", ScalarField(GRID, vals)
            yield f"gaussian+floor s{sigma}", ScalarField(GRID, 0.05 + vals)
    for q in (1, 2, 4, 8, 10):
        xx, _ = GRID.meshgrid()
        vals = (1.0 + np.cos(2.0 * np.pi * q * xx / GRID.lx)) ** 2
        yield f"single mode q{q}", ScalarField(GRID, vals)


def sweep_gn(quick: bool) -> float:
    best = 0.0
    best_label = ""
    worst_slack = np.inf
    for label, field in calibration_density_family(quick):
        ratio = gn_l2_bound(field, constant=1.0)["ratio"]
        if ratio > best:
            best, best_label = ratio, label
        slack = log_entropy_bound(field)["slack"]
        worst_slack = min(worst_slack, slack)
    print(f"  max L2-interpolation ratio {best:.6f}  ({best_label})")
    print(f"  min log-entropy slack over family {worst_slack:.3e}")
    frozen = np.ceil(best * 1.1 * 1000) / 1000
    print(f"  -> frozen prefactor {frozen}")
    return float(frozen)


# -- entropy-balance envelope constant -------------------------------------------


def sweep_k_envelope(quick: bool):
    """The minimal per-run envelope constant is dominated by the first-order
    discretization error of the balance (it scales almost exactly linearly in
    dt), so it is Richardson-extrapolated to dt -> 0 from two step sizes finer
    than any the acceptance runs use, and the continuum estimate is frozen.
    The leftover positive residual at the acceptance step sizes is then a
    genuine refinement quantity: it halves with dt."""
    initial = default_initial(GRID, "benchmark")
    t_final = 0.25 if quick else 1.0
    fine = {}
    for dt in (2.5e-4, 1.25e-4):
        traj = run(base_config(dt=dt, t_final=t_final), initial)
        fine[dt] = calibrate_dissipation_constant(traj, COEFFS, margin=1.0)
        print(f"  benchmark dt={dt:g}: minimal envelope {fine[dt]:.4f}")
    extrapolated = 2.0 * fine[1.25e-4] - fine[2.5e-4]
    frozen = float(np.ceil(max(1.0, extrapolated) * 1.1 * 1000) / 1000)
    print(f"  dt->0 estimate {extrapolated:.4f} -> frozen envelope {frozen}")

    ceilings = {}
    for dt in (1e-3, 5e-4):
        traj = run(base_config(dt=dt, t_final=t_final), initial)
        ceilings[dt] = float(np.max(dissipation_residual(traj, COEFFS, frozen)))
        print(f"  max positive balance residual at dt={dt:g}: {ceilings[dt]:.4f}")
    ratio = ceilings[5e-4] / ceilings[1e-3] if ceilings[1e-3] > 0 else 0.0
    print(f"  residual refinement ratio {ratio:.4f} (needs <= 0.6 after headroom)")

    # Sensitivity of the minimal envelope to the initial data (reported, not
    # frozen): rougher fields need visibly larger velocity-gradient envelopes.
    if not quick:
        for preset, seed in (("uniform_bump", 0), ("random_smooth", 9001),
                             ("random_smooth", 9002)):
            other = default_initial(GRID, preset, seed=seed)
            ks = []
            for dt in (2.5e-4, 1.25e-4):
                traj = run(base_config(dt=dt, t_final=t_final), other)
                ks.append(calibrate_dissipation_constant(traj, COEFFS, margin=1.0))
            print(f"  sensitivity {preset}/{seed}: dt->0 estimate "
                  f"{2.0 * ks[1] - ks[0]:.3f}")
    return frozen, ceilings


# -- ensemble increment growth constant -------------------------------------------


def acceptance_noise(seed: int):
    return make_noise_model(GRID, 16, q0=0.5, decay_power=1.5,
                            a_scale=1.0, b_scale=0.2, seed=seed)


def sweep_increment_growth(quick: bool, k_env: float):
    members = 4 if quick else 16
    t_final = 0.25 if quick else 1.0
    initial = default_initial(GRID, "benchmark")
    best = 0.0
    for master in (9101, 9102):
        cfg = base_config(t_final=t_final, noise=acceptance_noise(0))
        best = max(best, _max_mean_ratio(cfg, initial, members, master, k_env))
    frozen = float(np.ceil(best * 1.1 * 1000) / 1000)
    print(f"  max mean increment ratio {best:.6f}")
    print(f"  -> frozen growth constant {frozen}")

    # ceiling measured with the frozen constants on a third, disjoint seed
    worst = _max_mean_residual(frozen, k_env, members, t_final, master=9103)
    print(f"  max mean increment residual with frozen constants: {worst:.4e}")
    return frozen, worst


def _member_series(cfg, initial, members, master):
    from ctns import member_seed

    out = []
    for i in range(members):
        seed_i = member_seed(master, i)
        cfg_i = replace(cfg, noise=replace(cfg.noise, seed=seed_i))
        out.append(run(cfg_i, initial))
    return out


def _max_mean_ratio(cfg, initial, members, master, k_env) -> float:
    from ctns import entropy_total_series

    rates = []
    envs = []
    for traj in _member_series(cfg, initial, members, master):
        total = entropy_total_series(traj, COEFFS, k_env)
        rates.append((total[1:] - total[:-1]) / np.diff(traj["t"]))
        envs.append(1.0 + traj["u_l2_sq"][:-1] + traj["hs_norm_sq"][:-1])
    mean_rate = np.mean(rates, axis=0)
    mean_env = np.mean(envs, axis=0)
    return float(np.max(mean_rate / mean_env))


def _max_mean_residual(growth, k_env, members, t_final, master) -> float:
    initial = default_initial(GRID, "benchmark")
    cfg = base_config(t_final=t_final, noise=acceptance_noise(0))
    result = ensemble_run(cfg, initial, members=members, master_seed=master,
                          k_const=k_env, growth_const=growth)
    return float(np.max(result.mean_increment_residual))


# -- twin-run fit ceiling ----------------------------------------------------------


def sweep_gronwall(quick: bool):
    t_final = 0.25 if quick else 1.0
    initial = default_initial(GRID, "benchmark")
    worst = 0.0
    for seed in (9201, 9202, 9203):
        cfg = replace(base_config(t_final=t_final,
                                  noise=acceptance_noise(seed)),
                      coeffs=COEFFS_SOFT)
        fits = []
        for delta0 in (1e-8, 1e-6, 1e-4):
            result = twin_run(cfg, initial, delta0=delta0, perturb="velocity")
            rep = result.report
            worst = max(worst, float(np.max(rep.gronwall_margin)))
            fits.append(rep.gronwall_constant)
            print(f"  seed {seed} delta0={delta0:g}: fitted constant "
                  f"{rep.gronwall_constant:.4f}, max margin "
                  f"{np.max(rep.gronwall_margin):.3e}")
        spread = (max(fits) - min(fits)) / max(abs(np.mean(fits)), 1e-300)
        print(f"  seed {seed}: fitted-constant relative spread {spread:.3f}")
    return worst


# -- monitor headroom (diagnostic only) ---------------------------------------------


def sweep_monitors(quick: bool):
    t_final = 0.25 if quick else 1.0
    for preset in ("benchmark", "uniform_bump"):
        initial = default_initial(GRID, preset)
        for dt in (1e-3, 5e-4):
            cfg = base_config(dt=dt, t_final=t_final)
            rep = max_principle_check(run(cfg, initial))
            print(f"  {preset:14s} dt={dt:g}: overshoot {rep['overshoot']:.3e}, "
                  f"min c {rep['min_c']:.3e}, min n {rep['min_n']:.3e}")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true",
                    help="smaller families / shorter horizon for smoke runs")
    args = ap.parse_args(argv)
    t0 = time.time()

    print("L2 interpolation prefactor")
    gn = sweep_gn(args.quick)
    print("entropy-balance envelope")
    k_env, balance_ceilings = sweep_k_envelope(args.quick)
    print("ensemble increment growth")
    growth, increment_ceiling = sweep_increment_growth(args.quick, k_env)
    print("twin-run fit ceiling")
    gronwall_ceiling = sweep_gronwall(args.quick)
    print("monitor headroom")
    sweep_monitors(args.quick)

    print()
    print("# ---- frozen constants " + "-" * 40)
    print(f"GN_CONSTANT = {gn}")
    print(f"K_ENVELOPE = {k_env}")
    print(f"INCREMENT_GROWTH = {growth}")
    for dt, ceiling in balance_ceilings.items():
        print(f"balance residual ceiling dt={dt:g}: {ceiling:.6e}")
    print(f"increment residual ceiling: {increment_ceiling:.6e}")
    print(f"gronwall margin ceiling: {gronwall_ceiling:.6e}")
    print(f"[{time.time() - t0:.1f}s]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
