"""Diagnostics: entropy bookkeeping, inequality residuals, and the twin-run
stability functionals.

The central object is the entropy functional

    E(t) = int n ln n + (1/2) ||grad Psi(c)||^2 + 2 delta int_0^t ||grad sqrt n||^2
         + (K/nu) ||u||^2 + K int_0^t ||grad u||^2
         + mu int_0^t (Hessian defect) + lambda1 mu int_0^t int |grad Psi|^4
         + 2 lambda0 int_0^t int n |grad Psi|^2

with lambda0 = min (chi k)'/(4 chi), lambda1 = min -(k/chi)''/4 over the
attractant range, and K a calibrated envelope constant.  Its dissipation
balance (checked per step at the left endpoint):

    dS/dt + 4 delta ||grad sqrt n||^2 + mu (Hessian defect)
          + lambda1 mu int |grad Psi|^4 + 2 lambda0 int n |grad Psi|^2
      <= K ||grad u||^2,        S = int n ln n + (1/2) ||grad Psi||^2.

Note the factor 4 on the Fisher term in the balance versus 2 inside E: the
accumulators are stored raw so both weightings are reproducible.

The twin-run machinery measures the squared-distance functional
Lambda = ||n_d||^2 + ||c_d||^2 + ||grad c_d||^2 + ||u_d||^2 between two
trajectories and the regularity envelope Xi built from seven norm products of
each trajectory at powers j = 1, 2, then fits a single Gronwall constant
through the origin of log Lambda(t) - log Lambda(0) against int_0^t Xi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels, operators
from .coefficients import CoefficientSet
from .errors import ContractViolationError
from .fields import (
    ScalarField,
    State,
    VectorField,
    h1_seminorm,
    integrate,
    l2_norm,
)
from .stepper import EPS_N, Trajectory

# Empirical envelope: 1.1 times the largest ratio observed over the seeded
# calibration family of nonnegative fields (band-limited samples across
# cutoffs and offsets, periodized near-singular bumps, single modes, and the
# constant field, which attains the supremum 1.0 on a unit-area torus).
# Frozen by scripts/calibrate_constants.py; regenerate only if the norm
# conventions change.
GN_CONSTANT = 1.101


def mass(n: ScalarField) -> float:
    return integrate(n)


def fisher_information(n: ScalarField) -> float:
    """4 ||grad sqrt(max(n, eps))||^2, the density Fisher information."""
    root = np.sqrt(np.maximum(n.values, EPS_N))
    return 4.0 * h1_seminorm(ScalarField(n.grid, root)) ** 2


def cell_entropy(n: ScalarField) -> float:
    """int n ln n with 0 ln 0 = 0 and a floor absorbing roundoff negatives."""
    total, _ = _kernels.nlogn_sum(np.ascontiguousarray(n.values), EPS_N)
    return n.grid.cell_area * total


def absolute_cell_entropy(n: ScalarField) -> float:
    """int n |ln n| under the same conventions."""
    x = np.maximum(n.values, 0.0)
    vals = x * np.abs(np.log(np.maximum(x, EPS_N)))
    return n.grid.cell_area * float(np.sum(vals))


def log_entropy_bound(n: ScalarField) -> dict:
    """Lower/upper entropy comparison: the unsigned entropy never exceeds the
    signed one plus (4/e) sqrt(|O| * mass).  Returns both sides and the slack
    (nonnegative up to roundoff; zero iff n is the constant e^-2)."""
    signed = cell_entropy(n)
    unsigned = absolute_cell_entropy(n)
    m = max(integrate(n), 0.0)
    bound = signed + (4.0 / np.e) * np.sqrt(n.grid.area * m)
    return {"signed": signed, "unsigned": unsigned, "bound": bound,
            "slack": bound - unsigned}


def gn_l2_bound(n: ScalarField, constant: float = GN_CONSTANT) -> dict:
    """Interpolation bound ||n||_2 <= C (||n||_1^(1/2) ||grad sqrt n||_2 + ||n||_1)
    for nonnegative n; returns both sides and the realized ratio."""
    m = max(integrate(n), 0.0)
    root = np.sqrt(np.maximum(n.values, EPS_N))
    grad_root = h1_seminorm(ScalarField(n.grid, root))
    lhs = l2_norm(n)
    rhs_core = np.sqrt(m) * grad_root + m
    return {"lhs": lhs, "rhs": constant * rhs_core,
            "ratio": lhs / rhs_core if rhs_core > 0 else np.inf,
            "constant": constant}


def h2_norm(c: ScalarField) -> float:
    """sqrt(||c||^2 + ||grad c||^2 + ||D2 c||^2) with the mixed second
    derivative counted twice."""
    hxx, hxy, hyy = operators.hessian(c)
    hess_sq = l2_norm(hxx) ** 2 + 2.0 * l2_norm(hxy) ** 2 + l2_norm(hyy) ** 2
    return float(np.sqrt(l2_norm(c) ** 2 + h1_seminorm(c) ** 2 + hess_sq))


def max_principle_check(traj: Trajectory) -> dict:
    """Overshoot of sup c above its initial value and undershoot of min c / n
    below zero, over the recorded series."""
    sup_c = traj["sup_c"]
    return {
        "sup_c0": float(sup_c[0]),
        "overshoot": float(np.max(sup_c - sup_c[0])),
        "min_c": float(np.min(traj["min_c"])),
        "min_n": float(np.min(traj["min_n"])),
    }


# -- entropy reports ------------------------------------------------------------


@dataclass(frozen=True)
class EntropyReport:
    """One evaluation of the entropy functional, component by component."""

    t: float
    cell_entropy: float       # int n ln n
    psi_gradient: float       # (1/2) ||grad Psi(c)||^2
    fisher_history: float     # 2 delta int_0^t ||grad sqrt n||^2
    kinetic: float            # (K/nu) ||u||^2
    enstrophy_history: float  # K int_0^t ||grad u||^2
    hessian_history: float    # mu int_0^t (Hessian defect)
    quartic_history: float    # lambda1 mu int_0^t int |grad Psi|^4
    cross_history: float      # 2 lambda0 int_0^t int n |grad Psi|^2
    k_const: float
    lambda0: float
    lambda1: float

    @property
    def total(self) -> float:
        return (self.cell_entropy + self.psi_gradient + self.fisher_history
                + self.kinetic + self.enstrophy_history + self.hessian_history
                + self.quartic_history + self.cross_history)

    def as_dict(self) -> dict:
        return {
            "cell_entropy": self.cell_entropy,
            "psi_gradient": self.psi_gradient,
            "fisher_history": self.fisher_history,
            "kinetic": self.kinetic,
            "enstrophy_history": self.enstrophy_history,
            "hessian_history": self.hessian_history,
            "quartic_history": self.quartic_history,
            "cross_history": self.cross_history,
            "k_const": self.k_const,
            "total": self.total,
        }


def _require_tracked(traj: Trajectory):
    if "nlogn" not in traj.series:
        raise ContractViolationError(
            "trajectory was run without dissipation tracking")


def entropy_report_from_record(rec: dict, coeffs: CoefficientSet,
                               k_const: float) -> EntropyReport:
    lam0 = coeffs.lambda0()
    lam1 = coeffs.lambda1()
    return EntropyReport(
        t=rec["t"],
        cell_entropy=rec["nlogn"],
        psi_gradient=0.5 * rec["psi_grad_sq"],
        fisher_history=2.0 * coeffs.delta * rec["acc_fisher"],
        kinetic=(k_const / coeffs.nu) * rec["u_l2_sq"],
        enstrophy_history=k_const * rec["acc_enstrophy"],
        hessian_history=coeffs.mu * rec["acc_hessian"],
        quartic_history=max(lam1, 0.0) * coeffs.mu * rec["acc_quartic"],
        cross_history=2.0 * max(lam0, 0.0) * rec["acc_cross"],
        k_const=k_const,
        lambda0=lam0,
        lambda1=lam1,
    )


def entropy_total_series(traj: Trajectory, coeffs: CoefficientSet,
                         k_const: float) -> np.ndarray:
    """E(t_k) over the recorded series (vectorized)."""
    _require_tracked(traj)
    s = traj.series
    lam0 = max(coeffs.lambda0(), 0.0)
    lam1 = max(coeffs.lambda1(), 0.0)
    return (s["nlogn"] + 0.5 * s["psi_grad_sq"]
            + 2.0 * coeffs.delta * s["acc_fisher"]
            + (k_const / coeffs.nu) * s["u_l2_sq"]
            + k_const * s["acc_enstrophy"]
            + coeffs.mu * s["acc_hessian"]
            + lam1 * coeffs.mu * s["acc_quartic"]
            + 2.0 * lam0 * s["acc_cross"])


def initial_budget(traj_or_state, coeffs: CoefficientSet) -> float:
    """D0 = int n0 ln n0 + ||grad Psi(c0)||^2 + ||u0||^2 + 1, the moment-bound
    budget (full gradient norm here; the half enters only E itself)."""
    if isinstance(traj_or_state, Trajectory):
        _require_tracked(traj_or_state)
        s = traj_or_state.series
        return float(s["nlogn"][0] + s["psi_grad_sq"][0] + s["u_l2_sq"][0] + 1.0)
    state = traj_or_state
    psi = ScalarField(state.grid, np.asarray(coeffs.psi(state.c.values)))
    return (cell_entropy(state.n) + h1_seminorm(psi) ** 2
            + l2_norm(state.u) ** 2 + 1.0)


def _balance_parts(traj: Trajectory, coeffs: CoefficientSet) -> np.ndarray:
    """Entropy rate plus all dissipation terms at the recorded left endpoints,
    using the actual spacing of the recorded series."""
    s = traj.series
    lam0 = max(coeffs.lambda0(), 0.0)
    lam1 = max(coeffs.lambda1(), 0.0)
    entropy = s["nlogn"] + 0.5 * s["psi_grad_sq"]
    spacing = np.diff(s["t"])
    rate = (entropy[1:] - entropy[:-1]) / spacing
    return (rate
            + 4.0 * coeffs.delta * s["fisher_rate"][:-1]
            + coeffs.mu * s["hessian_rate"][:-1]
            + lam1 * coeffs.mu * s["quartic_rate"][:-1]
            + 2.0 * lam0 * s["cross_rate"][:-1])


def dissipation_residual(traj: Trajectory, coeffs: CoefficientSet,
                         k_const: float) -> np.ndarray:
    """Per-step residual of the entropy dissipation balance; nonpositive up to
    discretization error when k_const is a valid envelope.

    residual_k = (S_{k+1} - S_k)/dt + 4 delta F_k + mu H_k
                 + lambda1 mu Q_k + 2 lambda0 X_k - k_const * G_k
    """
    _require_tracked(traj)
    if traj.config.record_stride != 1:
        raise ContractViolationError("dissipation residual needs record_stride 1")
    return _balance_parts(traj, coeffs) - k_const * traj["enstrophy_rate"][:-1]


def calibrate_dissipation_constant(traj: Trajectory, coeffs: CoefficientSet,
                                   margin: float = 1.1) -> float:
    """Smallest (times margin) constant K making the dissipation balance hold
    along this trajectory; at least 1.  Steps where the velocity gradient is
    negligible are excluded from the ratio.  Subsampled series give a coarser
    (but still usable) envelope estimate."""
    _require_tracked(traj)
    base = _balance_parts(traj, coeffs)
    enst = traj["enstrophy_rate"][:-1]
    floor = 1e-12 * max(float(np.max(enst)), 1e-300)
    valid = enst > floor
    if not np.any(valid):
        return 1.0
    ratios = base[valid] / enst[valid]
    best = float(np.max(ratios))
    return max(margin * best, 1.0)


def increment_residual(traj: Trajectory, coeffs: CoefficientSet, k_const: float,
                       growth_const: float) -> np.ndarray:
    """Per-step residual of the stochastic entropy increment bound

        (E_{k+1} - E_k)/dt <= C (1 + ||u_k||^2 + ||sigma(u_k)||_HS^2) + noise

    The martingale part averages to zero over an ensemble, so the ensemble
    mean of this residual is what the bound controls."""
    _require_tracked(traj)
    total = entropy_total_series(traj, coeffs, k_const)
    s = traj.series
    rate = (total[1:] - total[:-1]) / np.diff(s["t"])
    envelope = growth_const * (1.0 + s["u_l2_sq"][:-1] + s["hs_norm_sq"][:-1])
    return rate - envelope


# -- twin-run stability ----------------------------------------------------------


@dataclass(frozen=True)
class StabilityReport:
    times: np.ndarray
    lambda_series: np.ndarray
    xi_series: np.ndarray
    xi_integral: np.ndarray
    gronwall_constant: float
    gronwall_margin: np.ndarray
    degenerate: bool

    def as_dict(self) -> dict:
        return {
            "times": self.times.tolist(),
            "lambda": self.lambda_series.tolist(),
            "xi": self.xi_series.tolist(),
            "xi_integral": self.xi_integral.tolist(),
            "gronwall_constant": self.gronwall_constant,
            "gronwall_margin": self.gronwall_margin.tolist(),
            "degenerate": self.degenerate,
        }


def _distance_functional(s1: State, s2: State) -> float:
    g = s1.grid
    dn = ScalarField(g, s1.n.values - s2.n.values)
    dc = ScalarField(g, s1.c.values - s2.c.values)
    du = VectorField(g, s1.u.x - s2.u.x, s1.u.y - s2.u.y)
    return (l2_norm(dn) ** 2 + l2_norm(dc) ** 2
            + h1_seminorm(dc) ** 2 + l2_norm(du) ** 2)


def _regularity_envelope(s: State) -> float:
    n_l2 = l2_norm(s.n)
    n_h1 = h1_seminorm(s.n)
    c_l2 = l2_norm(s.c)
    c_h1 = h1_seminorm(s.c)
    c_h2 = h2_norm(s.c)
    u_l2 = l2_norm(s.u)
    u_h1 = h1_seminorm(s.u)
    total = 0.0
    for j in (1, 2):
        total += (n_l2 ** j * n_h1 ** j + n_l2 ** (2 * j)
                  + c_l2 ** j * c_h1 ** j + c_l2 ** (2 * j)
                  + c_h2 ** j * c_h1 ** j + c_h1 ** (2 * j)
                  + u_l2 ** j * u_h1 ** j)
    return total


def stability_functionals(traj1: Trajectory, traj2: Trajectory) -> StabilityReport:
    """Distance functional, regularity envelope, and the fitted Gronwall
    constant between two trajectories sampled at the same snapshot times.

    Both trajectories must carry field snapshots (snapshot_stride > 0) on the
    same grid and time points.  When the trajectories coincide (Lambda = 0)
    the logarithmic fit is undefined and the report is flagged degenerate.
    """
    if not traj1.states or not traj2.states:
        raise ContractViolationError("stability functionals need field snapshots")
    if len(traj1.states) != len(traj2.states):
        raise ContractViolationError("trajectories have different snapshot counts")
    times = np.array([s.t for s in traj1.states])
    t2 = np.array([s.t for s in traj2.states])
    if not np.allclose(times, t2, rtol=0, atol=1e-12):
        raise ContractViolationError("snapshot times differ between trajectories")

    lam = np.array([_distance_functional(a, b)
                    for a, b in zip(traj1.states, traj2.states)])
    xi = np.array([1.0 + 0.5 * (_regularity_envelope(a) + _regularity_envelope(b))
                   for a, b in zip(traj1.states, traj2.states)])
    # left-endpoint cumulative integral of Xi
    dts = np.diff(times)
    xi_int = np.concatenate([[0.0], np.cumsum(xi[:-1] * dts)])

    degenerate = bool(np.any(lam <= 0.0))
    if degenerate:
        c_fit = 0.0
        marg = np.zeros_like(lam)
    else:
        y = np.log(lam) - np.log(lam[0])
        denom = float(np.sum(xi_int[1:] * xi_int[1:]))
        c_fit = float(np.sum(y[1:] * xi_int[1:]) / denom) if denom > 0 else 0.0
        marg = y - c_fit * xi_int
    return StabilityReport(times=times, lambda_series=lam, xi_series=xi,
                           xi_integral=xi_int, gronwall_constant=c_fit,
                           gronwall_margin=marg, degenerate=degenerate)


# -- record emission --------------------------------------------------------------


def diagnostics_records(traj: Trajectory, coeffs: CoefficientSet,
                        k_const: float | None = None) -> list:
    """Schema-stable per-sample records for the streamed diagnostics format.

    Tracked runs carry the full entropy block; untracked runs only the cheap
    scalars.  k_const defaults to a per-run calibrated envelope."""
    s = traj.series
    tracked = "nlogn" in s
    if tracked and k_const is None:
        k_const = calibrate_dissipation_constant(traj, coeffs)
    records = []
    lam0 = coeffs.lambda0()
    lam1 = coeffs.lambda1()
    for i in range(len(s["t"])):
        rec = {
            "t": float(s["t"][i]),
            "mass": float(s["mass"][i]),
            "sup_c": float(s["sup_c"][i]),
            "min_c": float(s["min_c"][i]),
            "min_n": float(s["min_n"][i]),
            "lambda0": lam0,
            "lambda1": lam1,
        }
        if tracked:
            rec["fisher"] = 4.0 * float(s["fisher_rate"][i])
            rec["floored_cells"] = int(s["floored_cells"][i])
            row = {key: float(s[key][i]) for key in s}
            rec["entropy"] = entropy_report_from_record(row, coeffs, k_const).as_dict()
        records.append(rec)
    return records
