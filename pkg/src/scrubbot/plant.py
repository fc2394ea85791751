"""Synthetic ground-truth arm.

Three constant-curvature segments, each driven by three tendons spaced 120 deg
apart on a circle of radius ``d``. The base hangs from the origin with the arm
pointing along -z. A tip load bends the arm further than the kinematics alone:
a tension above the reference sags the tip down and pulls it toward the axis.

Conventions
-----------
* tendon ``i`` of a stage sits at angle ``theta_i = 2*pi*i/3`` (i = 0, 1, 2)
* ``phi`` is the direction the segment bends toward; ``phi = 0`` bends toward
  tendon 1, which is then the shortest of its stage
* orientation quaternions are (w, x, y, z) with ``w >= 0``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

N_STAGES = 3
N_TENDONS = 3 * N_STAGES
TENDON_ANGLES = np.array([0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0])
STRAIGHT_KAPPA = 1e-9  # 1/mm; below this a segment is treated as a straight line
ARM_LENGTH = 710.0

# base frame: rotate pi about x so the arm's forward axis points down
_FLIP = np.diag([1.0, -1.0, -1.0])


class ManifoldError(ValueError):
    pass


class EnvelopeError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


class ArcParams(NamedTuple):
    kappa: float
    phi: float
    ell: float


@dataclass(frozen=True)
class Pose:
    position: np.ndarray
    orientation: np.ndarray  # (w, x, y, z)

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "orientation", canonical_quat(self.orientation))

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.position, self.orientation])

    @classmethod
    def from_vector(cls, vec) -> "Pose":
        vec = np.asarray(vec, dtype=float)
        return cls(vec[:3], vec[3:7])


@dataclass(frozen=True)
class PlantConfig:
    tendon_radius: float = 40.0          # mm
    nominal_length: float = ARM_LENGTH  # mm
    axial_compliance: float = 3.0        # mm/N
    lateral_compliance: float = 10.0     # mm/N per unit radial offset fraction
    contact_stiffness: float = 5.0       # N/mm
    reference_tension: float = 6.2       # N, deflection-free tension
    noise_sigma: float = 0.0             # mm, tip position noise
    force_noise_sigma: float = 0.0       # N, load-cell noise (brush spin)

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name.endswith("noise_sigma"):
                if value < 0:
                    raise ValueError(f"{f.name} must be >= 0, got {value}")
            elif value <= 0:
                raise ValueError(f"{f.name} must be positive, got {value}")

    @property
    def segment_length(self) -> float:
        return self.nominal_length / N_STAGES

    @classmethod
    def from_file(cls, path) -> "PlantConfig":
        """Read a flat ``key = value`` file; ``#`` starts a comment."""
        known = {f.name for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = float(value)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad number {value!r}") from None
        return cls(**values)

    def to_text(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)!r}\n" for f in fields(self))

    def with_noise(self, sigma: float) -> "PlantConfig":
        return replace(self, noise_sigma=sigma)


def canonical_quat(q) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(4)
    n = np.linalg.norm(q)
    if not np.isfinite(n) or n == 0.0:
        raise ValueError(f"invalid quaternion {q}")
    q = q / n
    return -q if q[0] < 0 else q


def quat_from_matrix(m: np.ndarray) -> np.ndarray:
    # Shepperd's method: branch on the largest diagonal term for stability
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0:
        s = 2.0 * math.sqrt(tr + 1.0)
        q = [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = 2.0 * math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2])
        q = [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
    elif m[1, 1] > m[2, 2]:
        s = 2.0 * math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2])
        q = [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
    else:
        s = 2.0 * math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1])
        q = [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
    return canonical_quat(q)


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return canonical_quat(np.concatenate([[math.cos(angle / 2)], math.sin(angle / 2) * axis]))


def tendons_to_arc(l1: float, l2: float, l3: float, d: float) -> ArcParams:
    if min(l1, l2, l3) <= 0:
        raise ValueError(f"tendon lengths must be positive, got {(l1, l2, l3)}")
    total = l1 + l2 + l3
    ell = total / 3.0
    # l1^2+l2^2+l3^2-l1l2-l2l3-l3l1 written as squared differences to avoid cancellation
    spread = 0.5 * ((l1 - l2) ** 2 + (l2 - l3) ** 2 + (l3 - l1) ** 2)
    kappa = 2.0 * math.sqrt(spread) / (d * total)
    if kappa < STRAIGHT_KAPPA:
        return ArcParams(0.0, 0.0, ell)
    phi = math.atan2(math.sqrt(3.0) * (l3 - l2), l2 + l3 - 2.0 * l1)
    return ArcParams(kappa, phi, ell)


def arc_to_tendons(arc: ArcParams, d: float) -> tuple[float, float, float]:
    kappa, phi, ell = arc
    if ell <= 0 or kappa < 0:
        raise ValueError(f"invalid arc {arc}")
    lengths = ell * (1.0 - kappa * d * np.cos(phi - TENDON_ANGLES))
    if np.any(lengths <= 0):
        raise EnvelopeError(f"arc {arc} gives non-positive tendon lengths {lengths}")
    return tuple(float(v) for v in lengths)


def config_to_arcs(q, d: float) -> list[ArcParams]:
    q = np.asarray(q, dtype=float)
    if q.shape != (N_TENDONS,):
        raise ManifoldError(f"expected {N_TENDONS} tendon lengths, got shape {q.shape}")
    if not np.all(np.isfinite(q)) or np.any(q <= 0):
        raise ManifoldError(f"tendon lengths must be finite and positive: {q}")
    arcs = [tendons_to_arc(*q[3 * s:3 * s + 3], d) for s in range(N_STAGES)]
    for s, arc in enumerate(arcs):
        if arc.kappa * arc.ell >= math.pi:
            raise ManifoldError(f"stage {s} bends past pi (kappa*ell = {arc.kappa * arc.ell:.3f})")
    return arcs


def arcs_to_config(arcs, d: float) -> np.ndarray:
    return np.array([length for arc in arcs for length in arc_to_tendons(arc, d)])


def _segment_transform(arc: ArcParams) -> tuple[np.ndarray, np.ndarray]:
    kappa, phi, ell = arc
    if kappa < STRAIGHT_KAPPA:
        return np.eye(3), np.array([0.0, 0.0, ell])
    theta = kappa * ell
    cp, sp = math.cos(phi), math.sin(phi)
    ct, st = math.cos(theta), math.sin(theta)
    rz = np.array([[cp, -sp, 0.0], [sp, cp, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[ct, 0.0, st], [0.0, 1.0, 0.0], [-st, 0.0, ct]])
    rot = rz @ ry @ rz.T
    r = 1.0 / kappa
    pos = np.array([cp * r * (1.0 - ct), sp * r * (1.0 - ct), r * st])
    return rot, pos


def kinematic_tip(q, cfg: PlantConfig) -> tuple[np.ndarray, np.ndarray]:
    """Load-free tip position and rotation matrix in the world frame."""
    rot = np.eye(3)
    pos = np.zeros(3)
    for arc in config_to_arcs(q, cfg.tendon_radius):
        r_s, p_s = _segment_transform(arc)
        pos = pos + rot @ p_s
        rot = rot @ r_s
    return _FLIP @ pos, _FLIP @ rot @ _FLIP


def deflect(position: np.ndarray, f_tendon: float, cfg: PlantConfig) -> np.ndarray:
    """Apply the elastic tip deflection for a given tendon tension.

    The tip drops by ``c_ax*s`` and its horizontal offset rho shrinks by
    ``c_lat*s*rho/L`` where ``s = f_tendon - reference_tension``.
    """
    excess = f_tendon - cfg.reference_tension
    out = np.array(position, dtype=float)
    out[:2] *= 1.0 - cfg.lateral_compliance * excess / cfg.nominal_length
    out[2] -= cfg.axial_compliance * excess
    return out


def forward_pose(q, f_tendon: float, cfg: PlantConfig = PlantConfig(),
                 rng: np.random.Generator | None = None) -> Pose:
    """Tip pose for tendon lengths ``q`` carrying ``f_tendon`` newtons.

    Position noise of ``cfg.noise_sigma`` is added only when ``rng`` is given.
    """
    if not math.isfinite(f_tendon) or f_tendon < 0:
        raise ValueError(f"tendon tension must be finite and >= 0, got {f_tendon}")
    pos, rot = kinematic_tip(q, cfg)
    pos = deflect(pos, f_tendon, cfg)
    if rng is not None and cfg.noise_sigma > 0:
        pos = pos + rng.normal(0.0, cfg.noise_sigma, size=3)
    return Pose(pos, quat_from_matrix(rot))


def tip_height(q, f_tendon: float, cfg: PlantConfig) -> float:
    pos, _ = kinematic_tip(q, cfg)
    return float(pos[2] - cfg.axial_compliance * (f_tendon - cfg.reference_tension))


def contact_force(q, f_gravity: float, surface_z: float, cfg: PlantConfig = PlantConfig(),
                  tol: float = 1e-6, max_iter: int = 200,
                  rng: np.random.Generator | None = None) -> float:
    """Normal force from a horizontal surface at height ``surface_z`` below the tip.

    Solves ``F = k_c * max(0, surface_z - z_tip(q, f_gravity - F))`` by
    bisection. Pushing back relieves tension and lifts the tip, so the
    residual is strictly increasing in ``F``. The bracket is ``[0, f_gravity]``:
    a surface high enough to carry the full weight returns ``f_gravity``.
    """
    if f_gravity <= 0:
        raise ValueError(f"f_gravity must be positive, got {f_gravity}")
    z0, _ = kinematic_tip(q, cfg)
    z0 = z0[2]
    k_c, c_ax, f_ref = cfg.contact_stiffness, cfg.axial_compliance, cfg.reference_tension

    def residual(force):
        z_tip = z0 - c_ax * (f_gravity - force - f_ref)
        return force - k_c * max(0.0, surface_z - z_tip)

    lo, hi = 0.0, f_gravity
    if residual(lo) >= 0.0:
        force = 0.0
    elif residual(hi) <= 0.0:
        force = f_gravity
    else:
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            r = residual(mid)
            if abs(r) < tol:
                break
            if r < 0.0:
                lo = mid
            else:
                hi = mid
        else:
            raise ConvergenceError(f"bisection did not converge in {max_iter} iterations")
        force = mid
    if rng is not None and cfg.force_noise_sigma > 0 and force > 0:
        force = max(0.0, force + rng.normal(0.0, cfg.force_noise_sigma))
    return force


def straight_config(cfg: PlantConfig = PlantConfig()) -> np.ndarray:
    return np.full(N_TENDONS, cfg.segment_length)
