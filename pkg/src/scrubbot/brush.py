"""Friction moment models for unidirectional and counter-rotating brushes.

All lengths are in mm, forces in N, pressures in N/mm^2 and moments in N*mm.
The brush is treated as a continuous disc of bristles under uniform pressure,
so every ring of radius r contributes a moment ``2*pi*mu*P*r**2 dr``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

# Translational brush speed is taken as ~0; spin dominates the friction direction.
TRANSLATIONAL_SPEED = 0.0


class DegenerateFitError(ValueError):
    pass


@dataclass(frozen=True)
class BrushSpec:
    mu: float
    r_outer: float
    r_inner: float = 0.0
    omega_rpm: float = 110.0

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not 0 <= self.r_inner < self.r_outer:
            raise ValueError(
                f"need 0 <= r_inner < r_outer, got {self.r_inner}, {self.r_outer}")
        if self.omega_rpm <= 0:
            raise ValueError(f"omega_rpm must be positive, got {self.omega_rpm}")

    @property
    def counter_rotating(self) -> bool:
        return self.r_inner > 0

    def pressure(self, force: float) -> float:
        """Uniform pressure for a total normal force spread over the outer disc."""
        return force_to_pressure(force, self.r_outer)


@dataclass(frozen=True)
class BacklashFit:
    k: float
    delta: float
    r_squared: float = 1.0

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.delta < 0:
            raise ValueError(f"delta must be non-negative, got {self.delta}")
        if not 0 <= self.r_squared <= 1:
            raise ValueError(f"r_squared must be in [0, 1], got {self.r_squared}")


class LinearFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float


# Measured values for the 35/25 mm counter-rotating brush.
MEASURED_BACKLASH = BacklashFit(k=9.34, delta=52.4)
MEASURED_MU = 0.93
DISC_BRUSH_RADIUS = 44.45  # 3.5 in brush
BRUSH_R_OUTER = 35.0
BRUSH_R_INNER = 25.0


def _check_nonnegative(**values):
    for name, value in values.items():
        if value < 0:
            raise ValueError(f"{name} must be non-negative, got {value}")


def force_to_pressure(force: float, radius: float) -> float:
    _check_nonnegative(force=force)
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    return force / (math.pi * radius ** 2)


def moment_unidirectional(mu: float, pressure: float, r: float) -> float:
    """Net friction moment of a solid disc brush of radius ``r``."""
    _check_nonnegative(mu=mu, pressure=pressure, r=r)
    return 2.0 * math.pi * mu * pressure * r ** 3 / 3.0


def moment_counter_rotating(mu: float, pressure: float, r_inner: float,
                            r_outer: float) -> float:
    """Net moment of an outer annulus minus the opposing inner disc.

    Positive when the outer face dominates; negative when the inner face does.
    """
    _check_nonnegative(mu=mu, pressure=pressure, r_inner=r_inner)
    if r_inner > r_outer:
        raise ValueError(f"r_inner ({r_inner}) exceeds r_outer ({r_outer})")
    return 2.0 * math.pi * mu * pressure * (r_outer ** 3 - 2.0 * r_inner ** 3) / 3.0


def zero_moment_ratio() -> float:
    """Inner/outer radius ratio at which both faces cancel: 2**(-1/3)."""
    return 2.0 ** (-1.0 / 3.0)


def slope_unidirectional(mu: float, r: float) -> float:
    """Moment per newton for a disc of radius ``r`` (uniform pressure)."""
    return 2.0 * mu * r / 3.0


def slope_counter_rotating(mu: float, r_inner: float, r_outer: float) -> float:
    """Moment per newton from the annulus integral, load spread over the outer disc."""
    pressure_per_newton = force_to_pressure(1.0, r_outer)
    return moment_counter_rotating(mu, pressure_per_newton, r_inner, r_outer)


def linear_slope_counter(mu: float, r_inner: float, r_outer: float) -> float:
    """Magnitude of the linearised counter-rotating slope ``2/3 mu |r_o - 2 r_i|``.

    This is the closed form used to predict the measured brush slope. It does
    not agree with :func:`slope_counter_rotating`; both are kept.
    """
    _check_nonnegative(mu=mu, r_inner=r_inner)
    if r_inner > r_outer:
        raise ValueError(f"r_inner ({r_inner}) exceeds r_outer ({r_outer})")
    return 2.0 * mu * abs(r_outer - 2.0 * r_inner) / 3.0


def backlash_moment(fit: BacklashFit, force: float) -> float:
    """Counter-rotating moment with gear backlash, clamped at zero before engagement."""
    _check_nonnegative(force=force)
    return max(0.0, fit.k * force - fit.delta)


def extract_mu_from_slope(slope: float, r: float) -> float:
    if slope <= 0 or r <= 0:
        raise ValueError(f"slope and r must be positive, got {slope}, {r}")
    return 3.0 * slope / (2.0 * r)


def fit_linear(points: Iterable[tuple[float, float]]) -> LinearFit:
    """Ordinary least squares line through ``(x, y)`` pairs.

    R^2 of a constant target is 1.0 when the fit is exact and 0.0 otherwise.
    """
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
        raise DegenerateFitError("need at least two (x, y) points")
    x, y = pts[:, 0], pts[:, 1]
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0.0:
        raise DegenerateFitError("all x values are identical")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - ym) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = max(0.0, 1.0 - ss_res / ss_tot)
    return LinearFit(slope, intercept, r2)


def monte_carlo_moment(mu: float, pressure: float, r_inner: float, r_outer: float,
                       n: int = 1_000_000, counter_rotating: bool = True,
                       seed: int = 0) -> float:
    """Sum per-bristle moments over points sampled uniformly on the contact disc.

    Each sample carries area ``pi*r_outer**2/n`` and contributes ``mu*P*dA*r``,
    signed negative on the inner disc when ``counter_rotating`` is set.
    """
    rng = np.random.default_rng(seed)
    # rejection-free uniform sampling in the disc
    radius = r_outer * np.sqrt(rng.random(n))
    d_area = math.pi * r_outer ** 2 / n
    contrib = mu * pressure * d_area * radius
    if counter_rotating:
        contrib = np.where(radius < r_inner, -contrib, contrib)
    return float(np.sum(contrib))


def average_reduction(forces: Iterable[float], mu: float = MEASURED_MU,
                      r_uni: float = DISC_BRUSH_RADIUS,
                      fit: BacklashFit = MEASURED_BACKLASH) -> float:
    """Mean fractional moment reduction of the backlash model vs a disc brush."""
    k_uni = slope_unidirectional(mu, r_uni)
    ratios = [1.0 - backlash_moment(fit, f) / (k_uni * f) for f in forces if f > 0]
    if not ratios:
        raise ValueError("need at least one positive force")
    return float(np.mean(ratios))


def force_sweep(spec: BrushSpec, forces: Iterable[float],
                fit: BacklashFit = MEASURED_BACKLASH) -> list[tuple[float, float, float, float]]:
    """Rows of (force, unidirectional, counter-rotating, backlash) moments."""
    rows = []
    for f in forces:
        p = spec.pressure(f)
        rows.append((f,
                     moment_unidirectional(spec.mu, p, spec.r_outer),
                     moment_counter_rotating(spec.mu, p, spec.r_inner, spec.r_outer),
                     backlash_moment(fit, f)))
    return rows
