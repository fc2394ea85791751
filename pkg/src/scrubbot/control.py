"""Trajectories, open-loop planning and evaluation against the plant.

A *model* is anything with ``predict(inputs) -> tendon lengths`` taking the
8-vector ``[x, y, z, qw, qx, qy, qz, F_t]``; trained :class:`MLPParams` and
:class:`NumericalInverse` both qualify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np
from scipy.spatial.transform import Rotation

from . import plant as pl
from .brush import LinearFit, fit_linear
from .statics import DEFAULT_RANGE, OperatingRange, require_in_distribution, tendon_tension

TOOL_DOWN = np.array([1.0, 0.0, 0.0, 0.0])
MIN_MITER_ANGLE = math.radians(15.0)

# Hardware force-ramp results, kept as reference output only.
HARDWARE_FORCE_REFERENCE = {
    0.0: dict(r_squared=0.923, gain_error_pct=35.7, offset=0.23),
    25.0: dict(r_squared=0.965, gain_error_pct=35.0, offset=-0.44),
    50.0: dict(r_squared=0.926, gain_error_pct=21.4, offset=0.90),
    75.0: dict(r_squared=0.995, gain_error_pct=8.85, offset=0.17),
}
HARDWARE_TRACKING_REFERENCE = dict(aware_mm=7.0, aware_deg=1.3, baseline_mm=15.7, baseline_deg=2.1)


class Model(Protocol):
    def predict(self, inputs) -> np.ndarray: ...


class DegenerateOffsetError(ValueError):
    pass


@dataclass
class Waypoint:
    pose: pl.Pose
    f_normal: float = 0.0
    dwell: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite(self.pose.to_vector())):
            raise ValueError("waypoint pose must be finite")
        if self.dwell < 0 or self.f_normal < 0:
            raise ValueError("dwell and f_normal must be non-negative")


@dataclass
class Trajectory:
    waypoints: list[Waypoint]

    def __post_init__(self):
        if not self.waypoints:
            raise ValueError("trajectory needs at least one waypoint")

    def __len__(self):
        return len(self.waypoints)

    def __iter__(self):
        return iter(self.waypoints)

    @property
    def positions(self) -> np.ndarray:
        return np.array([w.pose.position for w in self.waypoints])


def circle_trajectory(center: pl.Pose, diameter: float = 150.0, n_waypoints: int = 100,
                      f_normal: float = 0.0, dwell: float = 0.5) -> Trajectory:
    """Evenly spaced closed loop in the horizontal plane, tool pointing down."""
    if diameter <= 0 or n_waypoints < 3:
        raise ValueError("need diameter > 0 and at least 3 waypoints")
    radius = diameter / 2.0
    c = center.position
    wps = []
    for k in range(n_waypoints):
        a = 2.0 * math.pi * k / n_waypoints
        pos = c + radius * np.array([math.cos(a), math.sin(a), 0.0])
        wps.append(Waypoint(pl.Pose(pos, TOOL_DOWN), f_normal, dwell))
    return Trajectory(wps)


def _signed_area(xy: np.ndarray) -> float:
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _offset_polyline(xy: np.ndarray, dist: float, closed: bool) -> np.ndarray:
    """Offset along the left normal by ``dist``; miter joins, bevel when too sharp."""
    n = len(xy)
    if dist == 0:
        return xy.copy()
    nxt = np.roll(xy, -1, axis=0) - xy
    seg = nxt if closed else nxt[:-1]
    lengths = np.linalg.norm(seg, axis=1)
    if np.any(lengths == 0):
        raise DegenerateOffsetError("centerline has repeated points")
    tang = seg / lengths[:, None]
    normals = np.column_stack([-tang[:, 1], tang[:, 0]])
    out = []
    for i in range(n):
        if closed:
            n_in, n_out = normals[i - 1], normals[i]
        else:
            n_in = normals[max(i - 1, 0)]
            n_out = normals[min(i, n - 2)]
        cos_turn = float(np.clip(np.dot(n_in, n_out), -1.0, 1.0))
        interior = math.pi - math.acos(cos_turn)
        if interior < MIN_MITER_ANGLE:
            out.append(xy[i] + dist * n_in)
            out.append(xy[i] + dist * n_out)
            continue
        bis = n_in + n_out
        bis /= np.linalg.norm(bis)
        out.append(xy[i] + bis * dist / np.dot(bis, n_out))
    out = np.array(out)
    # an offset edge running backwards means the offset overran the local radius
    if len(out) == n:
        o_next = np.roll(out, -1, axis=0) - out
        o_seg = o_next if closed else o_next[:-1]
        if np.any(np.sum(o_seg * seg, axis=1) <= 0):
            raise DegenerateOffsetError(
                f"offset {dist:g} exceeds the local radius of curvature")
    return out


def offset_path(centerline, outer_offset: float = 27.5, inner_offset: float = 16.0,
                closed: bool = True, f_normal: float = 0.0, dwell: float = 0.0) -> Trajectory:
    """Two coverage loops around a measured centerline, outer loop first.

    Points may be 2-D (height 0) or 3-D; offsets act in the horizontal plane.
    For a closed loop "outer" means away from the enclosed area; for an open
    polyline it is the left-hand side of the travel direction.
    """
    pts = np.asarray(centerline, dtype=float)
    if pts.ndim != 2 or len(pts) < 3 and closed or len(pts) < 2:
        raise ValueError("centerline needs at least 3 points (2 for an open line)")
    if pts.shape[1] == 2:
        pts = np.column_stack([pts, np.zeros(len(pts))])
    xy = pts[:, :2]
    left_is_outer = True
    if closed:
        # counter-clockwise loops have the interior on the left
        left_is_outer = _signed_area(xy) < 0
    sign = 1.0 if left_is_outer else -1.0
    loops = []
    for dist in (sign * outer_offset, -sign * inner_offset):
        off = _offset_polyline(xy, dist, closed)
        z = np.interp(np.linspace(0, 1, len(off)), np.linspace(0, 1, len(pts)), pts[:, 2])
        loops.append(np.column_stack([off, z]))
    wps = [Waypoint(pl.Pose(p, TOOL_DOWN), f_normal, dwell) for loop in loops for p in loop]
    return Trajectory(wps)


def plan_waypoint(pose: pl.Pose, f_normal: float, f_gravity: float, model: Model,
                  rng: OperatingRange = DEFAULT_RANGE) -> np.ndarray:
    """Tendon lengths that place the loaded tip at ``pose`` while pressing ``f_normal``."""
    f_t = tendon_tension(f_gravity, f_normal)
    require_in_distribution(f_t, rng)
    x = np.concatenate([pose.to_vector(), [f_t]])
    return np.asarray(model.predict(x), dtype=float)


def orientation_error(a, b) -> float:
    """Geodesic angle between two rotations, degrees."""
    a = pl.canonical_quat(a)
    b = pl.canonical_quat(b)
    return math.degrees(2.0 * math.acos(min(1.0, abs(float(np.dot(a, b))))))


@dataclass
class TrackingReport:
    targets: np.ndarray        # (n, 7)
    achieved: np.ndarray       # (n, 7)
    position_error: np.ndarray  # mm
    orientation_error: np.ndarray  # deg
    arm_length: float = pl.ARM_LENGTH

    @property
    def mean_mm(self) -> float:
        return float(np.mean(self.position_error))

    @property
    def max_mm(self) -> float:
        return float(np.max(self.position_error))

    @property
    def mean_pct_length(self) -> float:
        return 100.0 * self.mean_mm / self.arm_length

    @property
    def max_pct_length(self) -> float:
        return 100.0 * self.max_mm / self.arm_length

    @property
    def mean_deg(self) -> float:
        return float(np.mean(self.orientation_error))

    @property
    def max_deg(self) -> float:
        return float(np.max(self.orientation_error))

    def rows(self):
        for i, (t, a, e, o) in enumerate(zip(self.targets, self.achieved,
                                             self.position_error, self.orientation_error)):
            yield (i, *t[:3], *a[:3], e, o)

    CSV_HEADER = ("waypoint", "target_x", "target_y", "target_z",
                  "actual_x", "actual_y", "actual_z", "err_mm", "err_deg")


def track_and_evaluate(traj: Trajectory, model: Model, plant: pl.PlantConfig,
                       f_gravity: float, extra_load: float = 0.0, seed: int | None = None,
                       rng: OperatingRange = DEFAULT_RANGE) -> TrackingReport:
    """Plan every waypoint with the true total load and compare the plant's pose.

    The model is told the full carried weight ``f_gravity + extra_load``;
    a model trained at a single weight simply cannot use that information.
    """
    total = f_gravity + extra_load
    noise = np.random.default_rng(seed) if plant.noise_sigma > 0 else None
    targets, achieved, perr, oerr = [], [], [], []
    for wp in traj:
        q = plan_waypoint(wp.pose, wp.f_normal, total, model, rng)
        pose = pl.forward_pose(q, tendon_tension(total, wp.f_normal), plant, noise)
        targets.append(wp.pose.to_vector())
        achieved.append(pose.to_vector())
        perr.append(float(np.linalg.norm(pose.position - wp.pose.position)))
        oerr.append(orientation_error(pose.orientation, wp.pose.orientation))
    return TrackingReport(np.array(targets), np.array(achieved), np.array(perr), np.array(oerr),
                          plant.nominal_length)


@dataclass
class RampResult:
    delta_r: float
    fit: LinearFit
    targets: np.ndarray
    measured: np.ndarray

    @property
    def gain(self) -> float:
        return self.fit.slope

    @property
    def offset(self) -> float:
        return self.fit.intercept

    @property
    def gain_error_percent(self) -> float:
        return (self.fit.slope - 1.0) * 100.0


@dataclass
class ForceRampReport:
    sweeps: list[RampResult] = field(default_factory=list)
    f_gravity: float = 15.3
    surface_z: float = -pl.ARM_LENGTH

    CSV_HEADER = ("delta_r", "K", "b", "R2", "gain_err_pct",
                  "hw_R2", "hw_gain_err_pct", "hw_b")

    def rows(self):
        for s in self.sweeps:
            ref = HARDWARE_FORCE_REFERENCE.get(float(s.delta_r), {})
            yield (s.delta_r, s.gain, s.offset, s.fit.r_squared, s.gain_error_percent,
                   ref.get("r_squared", float("nan")), ref.get("gain_error_pct", float("nan")),
                   ref.get("offset", float("nan")))


def force_ramp_eval(model: Model, plant: pl.PlantConfig = pl.PlantConfig(), f_gravity: float = 15.3,
                    ramp: tuple[float, float] = (1.0, 8.5), n_steps: int = 16,
                    delta_r: Sequence[float] = (0.0, 25.0, 50.0, 75.0),
                    surface_z: float | None = None, seed: int | None = None,
                    rng: OperatingRange = DEFAULT_RANGE) -> ForceRampReport:
    """Command a linear force ramp at several radial offsets and fit measured vs target.

    The surface defaults to the depth of the straight, unloaded arm. Each target
    pose is placed ``F_n / k_c`` below the surface, the indentation at which
    the contact would push back with exactly ``F_n``.
    """
    if surface_z is None:
        surface_z = -plant.nominal_length
    lo, hi = ramp
    if not 0 <= lo < hi or hi > rng.max_normal_force(f_gravity) + 1e-12:
        raise ValueError(f"ramp {ramp} N not reachable in distribution at F_g = {f_gravity} N")
    noise = np.random.default_rng(seed) if plant.force_noise_sigma > 0 else None
    targets = np.linspace(lo, hi, n_steps)
    report = ForceRampReport(f_gravity=f_gravity, surface_z=surface_z)
    for dr in delta_r:
        measured = []
        for fn in targets:
            pose = pl.Pose([dr, 0.0, surface_z - fn / plant.contact_stiffness], TOOL_DOWN)
            q = plan_waypoint(pose, fn, f_gravity, model, rng)
            measured.append(pl.contact_force(q, f_gravity, surface_z, plant, rng=noise))
        measured = np.array(measured)
        report.sweeps.append(RampResult(float(dr), fit_linear(zip(targets, measured)),
                                        targets, measured))
    return report


class NumericalInverse:
    """Exact inverse of the plant by minimum-norm Gauss-Newton over arc parameters.

    Used as the ideal model in tests. The arm is redundant (nine inputs, six
    pose constraints), so each step is the least-norm correction, starting
    from the straight nominal arm.
    """

    def __init__(self, plant: pl.PlantConfig = pl.PlantConfig(), tol: float = 1e-10,
                 max_iter: int = 60):
        self.plant = plant
        self.tol = tol
        self.max_iter = max_iter
        self._x0 = np.tile([0.0, 0.0, plant.segment_length], pl.N_STAGES)
        # bending parameters are curvatures (~1e-3 /mm), lengths are ~200 mm
        self._scale = np.tile([1e-3, 1e-3, 1.0], pl.N_STAGES)

    def _arcs(self, params):
        arcs = []
        for s in range(pl.N_STAGES):
            u, v, ell = params[3 * s:3 * s + 3]
            arcs.append(pl.ArcParams(math.hypot(u, v), math.atan2(v, u), ell))
        return arcs

    def _residual(self, params, target, f_t):
        q = pl.arcs_to_config(self._arcs(params), self.plant.tendon_radius)
        pose = pl.forward_pose(q, f_t, self.plant)
        dpos = pose.position - target[:3]
        rot_err = (Rotation.from_quat(_xyzw(target[3:7])).inv()
                   * Rotation.from_quat(_xyzw(pose.orientation))).as_rotvec()
        # weight orientation so 1 rad counts like one segment length
        return np.concatenate([dpos, rot_err * self.plant.segment_length])

    def _jacobian(self, x, target, f_t):
        cols = []
        for h in np.diag(self._scale * 1e-4):
            cols.append((self._residual(x + h, target, f_t) - self._residual(x - h, target, f_t))
                        / (2.0 * h.max()))
        return np.column_stack(cols)

    def solve(self, target, f_t) -> np.ndarray:
        target = np.asarray(target, dtype=float)
        x = self._x0.copy()
        r = self._residual(x, target, f_t)
        for _ in range(self.max_iter):
            err = np.linalg.norm(r)
            if err < self.tol:
                break
            jac = self._jacobian(x, target, f_t)
            step = np.linalg.lstsq(jac * self._scale, -r, rcond=None)[0] * self._scale
            t = 1.0
            while t > 1e-4:
                try:
                    r_new = self._residual(x + t * step, target, f_t)
                except (pl.EnvelopeError, pl.ManifoldError):
                    t *= 0.5
                    continue
                if np.linalg.norm(r_new) < err:
                    break
                t *= 0.5
            else:
                break
            x = x + t * step
            r = r_new
        return pl.arcs_to_config(self._arcs(x), self.plant.tendon_radius)

    def predict(self, inputs) -> np.ndarray:
        x = np.asarray(inputs, dtype=float)
        if x.ndim == 1:
            return self.solve(x[:7], x[7])
        return np.array([self.solve(row[:7], row[7]) for row in x])


def _xyzw(q):
    return np.array([q[1], q[2], q[3], q[0]])
