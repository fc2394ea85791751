"""Quasi-static load bookkeeping for the hanging arm.

The arm scrubs planar surfaces normal to gravity, so no lateral loads exist
and the vertical balance ``F_t + F_n - F_g = 0`` is the whole model.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

log = logging.getLogger(__name__)


class InfeasibleLoadError(ValueError):
    pass


class OutOfDistributionError(ValueError):
    pass


@dataclass(frozen=True)
class OperatingRange:
    f_g_min: float = 6.2
    f_g_max: float = 15.3

    def __post_init__(self):
        if not self.f_g_min < self.f_g_max:
            raise ValueError(f"f_g_min ({self.f_g_min}) must be below f_g_max ({self.f_g_max})")

    def max_normal_force(self, f_gravity: float) -> float:
        """Largest contact force that keeps the tension inside the range."""
        return f_gravity - self.f_g_min


DEFAULT_RANGE = OperatingRange()


@dataclass(frozen=True)
class LoadState:
    f_gravity: float
    f_normal: float = 0.0

    def __post_init__(self):
        tendon_tension(self.f_gravity, self.f_normal)

    @property
    def f_tendon(self) -> float:
        return tendon_tension(self.f_gravity, self.f_normal)


def tendon_tension(f_gravity: float, f_normal: float) -> float:
    if f_gravity <= 0:
        raise ValueError(f"f_gravity must be positive, got {f_gravity}")
    if f_normal < 0:
        raise ValueError(f"f_normal must be non-negative, got {f_normal}")
    if f_normal > f_gravity:
        raise InfeasibleLoadError(
            f"normal force {f_normal} N exceeds carried weight {f_gravity} N")
    return f_gravity - f_normal


def check_in_distribution(f_tendon: float,
                          rng: OperatingRange = DEFAULT_RANGE) -> tuple[bool, str]:
    """Return ``(ok, diagnostic)``; bounds are inclusive."""
    if f_tendon < rng.f_g_min:
        msg = f"tension {f_tendon:g} N below training minimum {rng.f_g_min:g} N"
    elif f_tendon > rng.f_g_max:
        msg = f"tension {f_tendon:g} N above training maximum {rng.f_g_max:g} N"
    else:
        return True, ""
    log.warning("out of distribution: %s", msg)
    return False, msg


def require_in_distribution(f_tendon: float, rng: OperatingRange = DEFAULT_RANGE) -> None:
    ok, msg = check_in_distribution(f_tendon, rng)
    if not ok:
        raise OutOfDistributionError(msg)
