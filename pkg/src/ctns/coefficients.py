"""Model coefficients: diffusivities, sensitivity chi(c), consumption k(c),
the external potential, and derived entropy quantities.

Structural conditions on (chi, k) come in two tiers.  The baseline tier
("H"): chi positive and twice differentiable; k twice differentiable,
vanishing at 0, positive for positive c; k/chi strictly increasing with
concave profile; (chi*k) non-decreasing.  The strengthened tier ("A") adds:
chi non-decreasing, k/chi strictly concave, (chi*k) strictly increasing.
``validate_coefficients`` samples these on [0, c_max] and reports margins
instead of raising, so infeasible presets can still be simulated.

Derived quantities:

* entropy weights lambda0 = min (chi*k)'/(4*chi), lambda1 = min -(k/chi)''/4
  over [0, c_max], used by the dissipation balance;
* the concavity transform Psi(c) = int_0^c sqrt(chi(s)/k(s)) ds, whose
  integrand is integrable at 0 whenever k vanishes linearly;
* its derivative weight w(c) = d/dc sqrt(k(c)/chi(c)).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .fields import Grid

EPS_C = 1e-8  # floor for c inside singular-at-zero derived weights


@dataclass(frozen=True)
class CoefficientFunction:
    """Scalar coefficient c -> value, vectorized over arrays, with optional
    closed-form derivatives (finite differences otherwise)."""

    name: str
    fn: Callable
    d1: Callable | None = None
    d2: Callable | None = None

    def __call__(self, c):
        return self.fn(np.asarray(c, dtype=np.float64))

    def deriv(self, c, order: int = 1):
        c = np.asarray(c, dtype=np.float64)
        if order == 1:
            if self.d1 is not None:
                return self.d1(c)
            h = 1e-6 * np.maximum(1.0, np.abs(c))
            return (self.fn(c + h) - self.fn(c - h)) / (2.0 * h)
        if order == 2:
            if self.d2 is not None:
                return self.d2(c)
            h = 1e-5 * np.maximum(1.0, np.abs(c))
            return (self.fn(c + h) - 2.0 * self.fn(c) + self.fn(c - h)) / (h * h)
        raise ConfigurationError(f"derivative order must be 1 or 2, got {order}")


def _const(v: float):
    return lambda c: np.full_like(np.asarray(c, dtype=np.float64), v)


def chi_one() -> CoefficientFunction:
    """Unit sensitivity."""
    return CoefficientFunction("one", _const(1.0), _const(0.0), _const(0.0))


def chi_zero() -> CoefficientFunction:
    """No aggregation; used to decouple the density equation in diagnostics."""
    return CoefficientFunction("zero", _const(0.0), _const(0.0), _const(0.0))


def k_linear(rate: float = 1.0) -> CoefficientFunction:
    """k(c) = rate * c."""
    return CoefficientFunction("linear", lambda c: rate * c, _const(rate), _const(0.0))


def k_saturating(rate: float = 1.0) -> CoefficientFunction:
    """k(c) = rate * c / (1 + c); strictly concave consumption."""
    return CoefficientFunction(
        "saturating",
        lambda c: rate * c / (1.0 + c),
        lambda c: rate / (1.0 + c) ** 2,
        lambda c: -2.0 * rate / (1.0 + c) ** 3,
    )


def k_zero() -> CoefficientFunction:
    """No consumption; decouples the attractant equation in diagnostics."""
    return CoefficientFunction("zero", _const(0.0), _const(0.0), _const(0.0))


_CHI_PRESETS = {"one": chi_one, "zero": chi_zero}
_K_PRESETS = {"linear": k_linear, "saturating": k_saturating, "zero": k_zero}


def chi_preset(name: str) -> CoefficientFunction:
    if name not in _CHI_PRESETS:
        raise ConfigurationError(f"unknown chi preset {name!r}; choose from {sorted(_CHI_PRESETS)}")
    return _CHI_PRESETS[name]()


def k_preset(name: str, rate: float = 1.0) -> CoefficientFunction:
    if name not in _K_PRESETS:
        raise ConfigurationError(f"unknown k preset {name!r}; choose from {sorted(_K_PRESETS)}")
    if name == "zero":
        return k_zero()
    return _K_PRESETS[name](rate)


@dataclass(frozen=True)
class Potential:
    """External potential with an analytic gradient.  The gravity preset is
    linear in y, which has no periodic representation; only its (constant)
    gradient enters the dynamics, so values are kept for reporting while the
    force uses the closed-form gradient arrays."""

    name: str
    values_fn: Callable
    grad_fn: Callable

    def values(self, grid: Grid) -> np.ndarray:
        return self.values_fn(grid)

    def gradient(self, grid: Grid) -> tuple:
        gx, gy = self.grad_fn(grid)
        return (np.ascontiguousarray(gx, dtype=np.float64),
                np.ascontiguousarray(gy, dtype=np.float64))


def potential_zero() -> Potential:
    return Potential(
        "zero",
        lambda g: np.zeros(g.shape),
        lambda g: (np.zeros(g.shape), np.zeros(g.shape)),
    )


def potential_gravity(strength: float = 0.1) -> Potential:
    """phi = strength * y: constant buoyancy force (0, strength)."""
    return Potential(
        "gravity",
        lambda g: strength * g.meshgrid()[1],
        lambda g: (np.zeros(g.shape), np.full(g.shape, strength)),
    )


def potential_cosine(strength: float = 0.1) -> Potential:
    """Smooth periodic potential cos(2 pi x / lx) * cos(2 pi y / ly)."""

    def vals(g: Grid) -> np.ndarray:
        xx, yy = g.meshgrid()
        return strength * np.cos(2 * np.pi * xx / g.lx) * np.cos(2 * np.pi * yy / g.ly)

    def grad(g: Grid) -> tuple:
        xx, yy = g.meshgrid()
        ax, ay = 2 * np.pi / g.lx, 2 * np.pi / g.ly
        return (-strength * ax * np.sin(ax * xx) * np.cos(ay * yy),
                -strength * ay * np.cos(ax * xx) * np.sin(ay * yy))

    return Potential("cosine", vals, grad)


_PHI_PRESETS = {"zero": potential_zero, "gravity": potential_gravity,
                "cosine": potential_cosine}


def phi_preset(name: str, strength: float = 0.1) -> Potential:
    if name not in _PHI_PRESETS:
        raise ConfigurationError(f"unknown phi preset {name!r}; choose from {sorted(_PHI_PRESETS)}")
    if name == "zero":
        return potential_zero()
    return _PHI_PRESETS[name](strength)


@dataclass(frozen=True)
class CoefficientSet:
    """All model coefficients.  c_max is the a-priori attractant ceiling
    (initial sup of c; the dynamics never exceed it) over which the structural
    conditions and entropy weights are evaluated."""

    delta: float = 1.0
    mu: float = 1.0
    nu: float = 1.0
    chi: CoefficientFunction = None  # type: ignore[assignment]
    k: CoefficientFunction = None  # type: ignore[assignment]
    phi: Potential = None  # type: ignore[assignment]
    c_max: float = 1.0

    def __post_init__(self):
        if self.chi is None:
            object.__setattr__(self, "chi", chi_one())
        if self.k is None:
            object.__setattr__(self, "k", k_linear())
        if self.phi is None:
            object.__setattr__(self, "phi", potential_gravity())
        for name in ("delta", "mu", "nu"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ConfigurationError(f"{name} must be positive, got {v!r}")
        if not np.isfinite(self.c_max) or self.c_max <= 0:
            raise ConfigurationError(f"c_max must be positive, got {self.c_max!r}")

    # -- derived pointwise quantities --

    def ratio(self, c):
        """k(c) / chi(c)."""
        return self.k(c) / self.chi(c)

    def ratio_d1(self, c):
        chi, k = self.chi(c), self.k(c)
        return (self.k.deriv(c, 1) * chi - k * self.chi.deriv(c, 1)) / (chi * chi)

    def ratio_d2(self, c):
        chi, k = self.chi(c), self.k(c)
        term = (self.k.deriv(c, 2) * chi - k * self.chi.deriv(c, 2)) / (chi * chi)
        return term - 2.0 * self.chi.deriv(c, 1) * self.ratio_d1(c) / chi

    def product_d1(self, c):
        """(chi * k)'."""
        return self.chi.deriv(c, 1) * self.k(c) + self.chi(c) * self.k.deriv(c, 1)

    def psi(self, c):
        """Psi(c) = int_0^c sqrt(chi/k); 2*sqrt(c/rate) closed form for the
        linear consumption family, Gauss-Legendre after s = r^2 otherwise."""
        c = np.asarray(c, dtype=np.float64)
        cc = np.maximum(c, 0.0)
        if self.chi.name == "one" and self.k.name == "linear":
            rate = float(self.k.deriv(0.0, 1))
            return 2.0 * np.sqrt(cc / rate)
        nodes, weights = np.polynomial.legendre.leggauss(48)
        shape = cc.shape
        flat = cc.reshape(-1)
        root = np.sqrt(flat)[None, :]
        r = root * (nodes[:, None] + 1.0) / 2.0
        s = r * r
        # substitution s = r^2 removes the k(0) = 0 singularity:
        # integrand 2 r sqrt(chi(r^2)/k(r^2)) is smooth at r = 0 for linear-order k
        integrand = 2.0 * r * np.sqrt(self.chi(s) / np.maximum(self.k(s), 1e-300))
        vals = (root / 2.0) * np.sum(weights[:, None] * integrand, axis=0)
        return vals.reshape(shape)

    def ratio_safe(self, c):
        return np.maximum(self.ratio(c), 1e-300)

    def psi_weight(self, c):
        """w(c) = d/dc sqrt(k/chi) = (k/chi)' / (2 sqrt(k/chi)), floored near
        c = 0 where the default pair is singular."""
        c = np.maximum(np.asarray(c, dtype=np.float64), EPS_C)
        return self.ratio_d1(c) / (2.0 * np.sqrt(self.ratio_safe(c)))

    # -- entropy weights --

    def _sample(self, n: int = 4097):
        return np.linspace(0.0, self.c_max, n)

    def lambda0(self) -> float:
        """min over [0, c_max] of (chi k)'/(4 chi)."""
        c = self._sample()
        return float(np.min(self.product_d1(c) / (4.0 * self.chi(c))))

    def lambda1(self) -> float:
        """min over [0, c_max] of -(k/chi)''/4."""
        c = self._sample()
        return float(np.min(-self.ratio_d2(c) / 4.0))


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    satisfied: bool
    margin: float
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    mode: str
    c_max: float
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(ch.satisfied for ch in self.checks)

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "c_max": self.c_max,
            "passed": self.passed,
            "checks": [
                {"name": ch.name, "satisfied": ch.satisfied,
                 "margin": ch.margin, "detail": ch.detail}
                for ch in self.checks
            ],
        }


_WEAK_TOL = 1e-12
_STRICT_TOL = 1e-14


def validate_coefficients(coeffs: CoefficientSet, mode: str = "H",
                          samples: int = 2001) -> ValidationReport:
    """Sample the structural conditions on [0, c_max] and report margins.

    mode "H" checks the baseline tier; mode "A" additionally checks the
    strengthened tier.  Validation never raises on a failed condition; the
    report carries one entry per condition with its worst-case margin.
    """
    if mode not in ("H", "A"):
        raise ConfigurationError(f"validation mode must be 'H' or 'A', got {mode!r}")
    c = np.linspace(0.0, coeffs.c_max, samples)
    c_pos = c[1:]
    checks = []

    chi_min = float(np.min(coeffs.chi(c)))
    checks.append(ConditionCheck(
        "chi_positive", chi_min > 0.0, chi_min,
        f"min chi on [0, c_max] = {chi_min:.6g}"))

    k0 = abs(float(coeffs.k(0.0)))
    checks.append(ConditionCheck(
        "k_vanishes_at_zero", k0 <= _WEAK_TOL, _WEAK_TOL - k0,
        f"|k(0)| = {k0:.3g}"))

    k_min = float(np.min(coeffs.k(c_pos)))
    checks.append(ConditionCheck(
        "k_positive", k_min > 0.0, k_min,
        f"min k on (0, c_max] = {k_min:.6g}"))

    r1_min = float(np.min(coeffs.ratio_d1(c)))
    checks.append(ConditionCheck(
        "ratio_increasing", r1_min > _STRICT_TOL, r1_min,
        f"min (k/chi)' = {r1_min:.6g}"))

    r2_max = float(np.max(coeffs.ratio_d2(c)))
    checks.append(ConditionCheck(
        "ratio_concave", r2_max <= _WEAK_TOL, -r2_max,
        f"max (k/chi)'' = {r2_max:.6g}"))

    p1_min = float(np.min(coeffs.product_d1(c)))
    checks.append(ConditionCheck(
        "product_nondecreasing", p1_min >= -_WEAK_TOL, p1_min,
        f"min (chi k)' = {p1_min:.6g}"))

    if mode == "A":
        chi1_min = float(np.min(coeffs.chi.deriv(c, 1)))
        checks.append(ConditionCheck(
            "chi_nondecreasing", chi1_min >= -_WEAK_TOL, chi1_min,
            f"min chi' = {chi1_min:.6g}"))
        checks.append(ConditionCheck(
            "ratio_strictly_concave", r2_max < -_STRICT_TOL, -r2_max,
            f"max (k/chi)'' = {r2_max:.6g}"))
        checks.append(ConditionCheck(
            "product_strictly_increasing", p1_min > _STRICT_TOL, p1_min,
            f"min (chi k)' = {p1_min:.6g}"))

    return ValidationReport(mode, coeffs.c_max, tuple(checks))
