"""Force-deflection training corpus drawn from the synthetic plant."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from . import plant as pl
from .statics import DEFAULT_RANGE, OperatingRange

Q_COLUMNS = [f"l{i}" for i in range(1, 10)]
POSE_COLUMNS = ["x", "y", "z", "qw", "qx", "qy", "qz"]
COLUMNS = Q_COLUMNS + POSE_COLUMNS + ["Ft"]
MAX_RETRIES = 100


class DatasetParseError(ValueError):
    pass


class SegmentBounds(NamedTuple):
    kappa: tuple[float, float]
    phi: tuple[float, float]
    ell: tuple[float, float]


# Curvature up to ~0.33 rad of bend per segment keeps the tip inside a
# ~120 mm radius; the length band lets the arm raise or lower its tip by
# about +-20 mm to offset load sag.
DEFAULT_SEGMENT = SegmentBounds(kappa=(0.0, 1.4e-3), phi=(-math.pi, math.pi),
                                ell=(226.0, 240.0))
DEFAULT_BOUNDS = (DEFAULT_SEGMENT,) * pl.N_STAGES


def straight_bounds(ell: float) -> tuple[SegmentBounds, ...]:
    seg = SegmentBounds((0.0, 0.0), (0.0, 0.0), (ell, ell))
    return (seg,) * pl.N_STAGES


def even_levels(n: int = 5, rng: OperatingRange = DEFAULT_RANGE) -> tuple[float, ...]:
    if n == 1:
        return (rng.f_g_min,)
    return tuple(float(v) for v in np.linspace(rng.f_g_min, rng.f_g_max, n))


@dataclass(frozen=True)
class DatasetSpec:
    weight_levels: tuple[float, ...] = field(default_factory=even_levels)
    samples_per_level: int = 2000
    seed: int = 0
    noise_sigma: float = 0.0
    bounds: tuple[SegmentBounds, ...] = DEFAULT_BOUNDS
    operating_range: OperatingRange = DEFAULT_RANGE

    def __post_init__(self):
        if not self.weight_levels:
            raise ValueError("need at least one weight level")
        for w in self.weight_levels:
            if not self.operating_range.f_g_min <= w <= self.operating_range.f_g_max:
                raise ValueError(f"weight level {w} N outside operating range")
        if self.samples_per_level <= 0:
            raise ValueError("samples_per_level must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if len(self.bounds) != pl.N_STAGES:
            raise ValueError(f"need bounds for {pl.N_STAGES} stages")


class Sample(NamedTuple):
    pose: pl.Pose
    f_tendon: float
    q: np.ndarray


@dataclass
class Dataset:
    q: np.ndarray        # (n, 9) tendon lengths, mm
    pose: np.ndarray     # (n, 7) x, y, z, qw, qx, qy, qz
    f_tendon: np.ndarray  # (n,) N

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float).reshape(-1, pl.N_TENDONS)
        self.pose = np.asarray(self.pose, dtype=float).reshape(-1, 7)
        self.f_tendon = np.asarray(self.f_tendon, dtype=float).reshape(-1)
        if not len(self.q) == len(self.pose) == len(self.f_tendon):
            raise ValueError("dataset columns have different lengths")

    def __len__(self):
        return len(self.f_tendon)

    def __iter__(self) -> Iterator[Sample]:
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, i) -> Sample:
        return Sample(pl.Pose.from_vector(self.pose[i]), float(self.f_tendon[i]), self.q[i].copy())

    def subset(self, idx) -> "Dataset":
        return Dataset(self.q[idx], self.pose[idx], self.f_tendon[idx])

    @property
    def inputs(self) -> np.ndarray:
        """Network inputs: pose followed by tension, shape (n, 8)."""
        return np.column_stack([self.pose, self.f_tendon])

    def table(self) -> np.ndarray:
        return np.column_stack([self.q, self.pose, self.f_tendon])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return bool(np.array_equal(self.table(), other.table()))

    @classmethod
    def concat(cls, parts: Sequence["Dataset"]) -> "Dataset":
        return cls(np.concatenate([p.q for p in parts]),
                   np.concatenate([p.pose for p in parts]),
                   np.concatenate([p.f_tendon for p in parts]))


def sample_config(rng: np.random.Generator, bounds=DEFAULT_BOUNDS,
                  d: float = pl.PlantConfig.tendon_radius) -> np.ndarray:
    """Draw arc parameters uniformly per stage and convert to tendon lengths."""
    for _ in range(MAX_RETRIES):
        arcs = []
        for b in bounds:
            arcs.append(pl.ArcParams(rng.uniform(*b.kappa), rng.uniform(*b.phi), rng.uniform(*b.ell)))
        if any(a.kappa * a.ell >= math.pi for a in arcs):
            continue
        try:
            return pl.arcs_to_config(arcs, d)
        except pl.EnvelopeError:
            continue
    raise pl.EnvelopeError(f"no valid configuration after {MAX_RETRIES} draws; check bounds")


def generate(spec: DatasetSpec = DatasetSpec(), plant: pl.PlantConfig = pl.PlantConfig()) -> Dataset:
    """One block of ``samples_per_level`` free-hanging samples per weight level.

    Each level draws from its own child of ``SeedSequence(spec.seed)``, so a
    level's samples do not depend on how many other levels there are before it.
    """
    if spec.noise_sigma != plant.noise_sigma:
        plant = plant.with_noise(spec.noise_sigma)
    children = np.random.SeedSequence(spec.seed).spawn(len(spec.weight_levels))
    n = spec.samples_per_level
    parts = []
    for level, child in zip(spec.weight_levels, children):
        rng = np.random.default_rng(child)
        q = np.empty((n, pl.N_TENDONS))
        pose = np.empty((n, 7))
        for i in range(n):
            q[i] = sample_config(rng, spec.bounds, plant.tendon_radius)
            pose[i] = pl.forward_pose(q[i], level, plant, rng if plant.noise_sigma > 0 else None).to_vector()
        parts.append(Dataset(q, pose, np.full(n, float(level))))
    return Dataset.concat(parts)


def split(dataset: Dataset, train_fraction: float = 0.8, seed: int = 0) -> tuple[Dataset, Dataset]:
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    perm = np.random.default_rng(seed).permutation(len(dataset))
    n_train = int(round(train_fraction * len(dataset)))
    return dataset.subset(perm[:n_train]), dataset.subset(perm[n_train:])


def save(dataset: Dataset, path, meta: dict | None = None) -> None:
    """Write CSV; values use shortest round-trip repr so reloading is exact."""
    lines = [f"# {k}={v}" for k, v in (meta or {}).items()]
    lines.append(",".join(COLUMNS))
    for row in dataset.table():
        lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load(path) -> Dataset:
    text = Path(path).read_text().splitlines()
    rows = []
    header_seen = False
    for lineno, line in enumerate(text, 1):
        if not line.strip() or line.startswith("#"):
            continue
        cells = line.split(",")
        if not header_seen:
            if [c.strip() for c in cells] != COLUMNS:
                raise DatasetParseError(f"{path}:{lineno}: header must be {','.join(COLUMNS)}")
            header_seen = True
            continue
        if len(cells) != len(COLUMNS):
            raise DatasetParseError(
                f"{path}:{lineno}: expected {len(COLUMNS)} columns, got {len(cells)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise DatasetParseError(f"{path}:{lineno}: {exc}") from None
    if not header_seen:
        raise DatasetParseError(f"{path}: missing header line")
    table = np.array(rows, dtype=float).reshape(-1, len(COLUMNS))
    return Dataset(table[:, :9], table[:, 9:16], table[:, 16])
