"""Synthetic plate and seat photographs with exactly known contamination.

Contamination is drawn as filled ellipses kept well inside the padded region
of interest, so the true stained-pixel count is simply the drawn area.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .clean import RasterImage, read_pixmap, write_pixmap

BACKGROUND = (40, 40, 48)
PLATE = (230, 230, 225)
PLATE_RIM_TINT = (235, 200, 195)   # bright but red-dominant; must fall in the rim pad
KETCHUP = (150, 40, 25)
GREY_SMUDGE = (120, 120, 120)      # not red-dominant; must not be counted
SEAT_BACKGROUND = (90, 95, 100)
SEAT = (245, 245, 245)
PRESERVE = (70, 40, 100)

PLATE_GEOMETRY = dict(shape=(480, 480), center=(240.0, 240.0), radius=200.0, rim_band=22.0)
SEAT_GEOMETRY = dict(shape=(520, 500), center=(260.0, 250.0), outer=220.0, inner=100.0)
PLATE_PAD = 30.0
SEAT_OUTER_PAD = 30.0
SEAT_INNER_PAD = 20.0


@dataclass
class Fixture:
    image: np.ndarray
    stain: np.ndarray  # ground-truth contamination mask

    @property
    def count(self) -> int:
        return int(self.stain.sum())


def _grid(shape):
    return np.indices(shape)


def _ellipse(shape, cy, cx, ry, rx, angle):
    rows, cols = _grid(shape)
    y, x = rows - cy, cols - cx
    ca, sa = np.cos(angle), np.sin(angle)
    u = (x * ca + y * sa) / rx
    v = (-x * sa + y * ca) / ry
    return u * u + v * v <= 1.0


def _scatter(rng, shape, center, r_min, r_max, n, size):
    """Random ellipses whose extent stays inside the ring ``[r_min, r_max]``."""
    stain = np.zeros(shape, dtype=bool)
    for _ in range(n):
        ry, rx = rng.uniform(size[0], size[1], 2)
        reach = max(ry, rx) + 1.0
        rad = rng.uniform(r_min + reach, r_max - reach)
        theta = rng.uniform(0, 2 * np.pi)
        cy = center[0] + rad * np.sin(theta)
        cx = center[1] + rad * np.cos(theta)
        stain |= _ellipse(shape, cy, cx, ry, rx, rng.uniform(0, np.pi))
    return stain


def make_plate(n_stains: int, seed: int, stain_size=(4.0, 14.0), offset=(0, 0)) -> Fixture:
    g = PLATE_GEOMETRY
    shape = g["shape"]
    center = (g["center"][0] + offset[0], g["center"][1] + offset[1])
    rng = np.random.default_rng(seed)
    rows, cols = _grid(shape)
    dist = np.hypot(rows - center[0], cols - center[1])
    img = np.empty(shape + (3,), dtype=np.uint8)
    img[:] = BACKGROUND
    img[dist <= g["radius"]] = PLATE
    img[(dist <= g["radius"]) & (dist > g["radius"] - g["rim_band"])] = PLATE_RIM_TINT
    safe = g["radius"] - PLATE_PAD - 8.0
    smudge = _scatter(rng, shape, center, 0.0, safe, 3, (5.0, 10.0))
    img[smudge] = GREY_SMUDGE
    stain = _scatter(rng, shape, center, 0.0, safe, n_stains, stain_size)
    img[stain] = KETCHUP
    return Fixture(img, stain)


def make_seat(n_stains: int, seed: int, stain_size=(3.0, 10.0), offset=(0, 0)) -> Fixture:
    g = SEAT_GEOMETRY
    shape = g["shape"]
    center = (g["center"][0] + offset[0], g["center"][1] + offset[1])
    rng = np.random.default_rng(seed)
    rows, cols = _grid(shape)
    dist = np.hypot(rows - center[0], cols - center[1])
    img = np.empty(shape + (3,), dtype=np.uint8)
    img[:] = SEAT_BACKGROUND
    img[(dist <= g["outer"]) & (dist > g["inner"])] = SEAT
    lo = g["inner"] + SEAT_INNER_PAD + 6.0
    hi = g["outer"] - SEAT_OUTER_PAD - 6.0
    stain = _scatter(rng, shape, center, lo, hi, n_stains, stain_size)
    img[stain] = PRESERVE
    return Fixture(img, stain)


def analytic_plate_roi_area() -> float:
    return float(np.pi * (PLATE_GEOMETRY["radius"] - PLATE_PAD) ** 2)


def analytic_seat_roi_area() -> float:
    g = SEAT_GEOMETRY
    return float(np.pi * ((g["outer"] - SEAT_OUTER_PAD) ** 2 - (g["inner"] + SEAT_INNER_PAD) ** 2))


FIXTURE_RECIPES = {
    "plate_before": (make_plate, 40, 11),
    "plate_after": (make_plate, 3, 12),
    "seat_before": (make_seat, 45, 21),
    "seat_after": (make_seat, 2, 22),
}


def build_all() -> dict[str, Fixture]:
    return {name: fn(n, seed) for name, (fn, n, seed) in FIXTURE_RECIPES.items()}


def write_all(directory) -> dict:
    """Write every fixture as P6 plus a ``truth.json`` of stained-pixel counts."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    truth = {}
    for name, fx in build_all().items():
        write_pixmap(directory / f"{name}.ppm", fx.image)
        truth[name] = fx.count
    truth["plate_roi_area"] = analytic_plate_roi_area()
    truth["seat_roi_area"] = analytic_seat_roi_area()
    (directory / "truth.json").write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n")
    return truth


def fixture_dir() -> Path:
    return Path(str(resources.files("scrubbot") / "data" / "fixtures"))


def load_fixture(name: str) -> RasterImage:
    return read_pixmap(fixture_dir() / f"{name}.ppm")


def load_truth() -> dict:
    return json.loads((fixture_dir() / "truth.json").read_text())
