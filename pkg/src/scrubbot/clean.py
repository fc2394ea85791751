"""Before/after contamination measurement on RGB photographs.

Images are ``(height, width, 3)`` uint8 arrays; masks are boolean arrays of
shape ``(height, width)``. Pixel coordinates are ``(row, col)``; circles use
``x = col`` and ``y = row``.
"""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels


class PixmapFormatError(ValueError):
    pass


class ROIError(ValueError):
    pass


class UndefinedMetricError(ValueError):
    pass


class ContaminationGrewWarning(UserWarning):
    pass


class Circle(NamedTuple):
    x: float
    y: float
    radius: float


@dataclass
class RasterImage:
    pixels: np.ndarray  # (h, w, 3) uint8

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (h, w, 3) pixels, got shape {px.shape}")
        self.pixels = np.ascontiguousarray(px, dtype=np.uint8)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.pixels if dtype is None else self.pixels.astype(dtype)


# --- portable pixmap I/O ---------------------------------------------------

def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise PixmapFormatError("truncated header")
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def parse_pixmap(data: bytes) -> np.ndarray:
    """Decode binary P6 (RGB) or P5 (gray) bytes; only maxval 255 is supported."""
    tokens, offset = _header_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P6", b"P5"):
        raise PixmapFormatError(f"unsupported magic {magic!r}; expected P6 or P5")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise PixmapFormatError("non-numeric header field") from None
    if maxval != 255:
        raise PixmapFormatError(f"unsupported depth: maxval {maxval}, only 255 is handled")
    channels = 3 if magic == b"P6" else 1
    size = width * height * channels
    raster = data[offset:offset + size]
    if len(raster) != size:
        raise PixmapFormatError(f"raster has {len(raster)} bytes, expected {size}")
    arr = np.frombuffer(raster, dtype=np.uint8)
    return arr.reshape(height, width, 3) if channels == 3 else arr.reshape(height, width)


def read_pixmap(path) -> RasterImage:
    arr = parse_pixmap(Path(path).read_bytes())
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    return RasterImage(arr)


def encode_pixmap(image) -> bytes:
    arr = np.asarray(image)
    if arr.dtype == bool:
        arr = arr.astype(np.uint8) * 255
    arr = np.ascontiguousarray(arr, dtype=np.uint8)
    if arr.ndim == 3:
        magic = b"P6"
    elif arr.ndim == 2:
        magic = b"P5"
    else:
        raise ValueError(f"cannot encode array of shape {arr.shape}")
    h, w = arr.shape[:2]
    return magic + f"\n{w} {h}\n255\n".encode() + arr.tobytes()


def write_pixmap(path, image) -> None:
    """Write RGB as P6; 2-D arrays and boolean masks go out as P5."""
    Path(path).write_bytes(encode_pixmap(image))


# --- pixel rules -------------------------------------------------------------

def to_grayscale(image) -> np.ndarray:
    """Rounded BT.601 luma; a 2-D input is already gray and is returned as is."""
    arr = np.asarray(image)
    if arr.ndim == 2:
        return arr.astype(np.uint8)
    rgb = arr.astype(np.float64)
    luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.floor(luma + 0.5).clip(0, 255).astype(np.uint8)


_THRESHOLD_MODES = {
    "above": np.greater,
    "below": np.less,
    "at_least": np.greater_equal,
    "at_most": np.less_equal,
}


def threshold(gray, t: float, mode: str = "above") -> np.ndarray:
    """Strict ``above``/``below`` comparisons; ``at_least``/``at_most`` include ``t``."""
    try:
        op = _THRESHOLD_MODES[mode]
    except KeyError:
        raise ValueError(f"unknown threshold mode {mode!r}") from None
    return op(np.asarray(gray), t)


# --- components and contours -------------------------------------------------

@dataclass
class Components:
    labels: np.ndarray  # int32, 0 = background
    count: int
    areas: np.ndarray   # areas[k - 1] is the pixel count of label k

    def mask(self, k: int) -> np.ndarray:
        return self.labels == k

    def largest(self, n: int = 1) -> list[int]:
        """Labels of the ``n`` largest components, biggest first (ties by label)."""
        order = sorted(range(1, self.count + 1), key=lambda k: (-self.areas[k - 1], k))
        return order[:n]


def connected_components(mask, connectivity: int = 8) -> Components:
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    m = np.ascontiguousarray(np.asarray(mask, dtype=bool), dtype=np.uint8)
    labels, count = kernels.label(m, connectivity)
    areas = np.bincount(labels.ravel(), minlength=count + 1)[1:]
    return Components(labels, count, areas)


def boundary_contour(component) -> list[tuple[int, int]]:
    """Ordered outer boundary of a single 8-connected component (Moore tracing)."""
    m = np.ascontiguousarray(np.asarray(component, dtype=bool), dtype=np.uint8)
    rows, cols = np.nonzero(m)
    if len(rows) == 0:
        raise ValueError("empty component")
    return [tuple(map(int, p)) for p in kernels.trace(m, int(rows[0]), int(cols[0]))]


# --- minimal enclosing circle --------------------------------------------------

_MEC_EPS = 1e-9


def _contains(c: Circle, p) -> bool:
    return math.hypot(p[0] - c.x, p[1] - c.y) <= c.radius + _MEC_EPS * max(1.0, c.radius)


def _circle_two(a, b) -> Circle:
    return Circle((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, math.hypot(a[0] - b[0], a[1] - b[1]) / 2.0)


def _circle_three(a, b, c) -> Circle:
    bx, by = b[0] - a[0], b[1] - a[1]
    cx, cy = c[0] - a[0], c[1] - a[1]
    d = 2.0 * (bx * cy - by * cx)
    if abs(d) < 1e-12 * max(1.0, bx * bx + by * by, cx * cx + cy * cy):
        # collinear: the farthest pair spans the circle
        pairs = [(a, b), (a, c), (b, c)]
        return max((_circle_two(p, q) for p, q in pairs), key=lambda k: k.radius)
    b2, c2 = bx * bx + by * by, cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    return Circle(a[0] + ux, a[1] + uy, math.hypot(ux, uy))


def min_enclosing_circle(points: Sequence[Sequence[float]], seed: int = 0) -> Circle:
    """Smallest circle containing all ``(x, y)`` points (Welzl, randomised incremental)."""
    pts = [(float(p[0]), float(p[1])) for p in points]
    if not pts:
        raise ValueError("no points")
    random.Random(seed).shuffle(pts)
    c = Circle(pts[0][0], pts[0][1], 0.0)
    for i, p in enumerate(pts):
        if _contains(c, p):
            continue
        c = Circle(p[0], p[1], 0.0)
        for j in range(i):
            q = pts[j]
            if _contains(c, q):
                continue
            c = _circle_two(p, q)
            for k in range(j):
                r = pts[k]
                if not _contains(c, r):
                    c = _circle_three(p, q, r)
    return c


# --- morphology ----------------------------------------------------------------

def _distance_sq_to(sites: np.ndarray, outside_is_site: bool) -> np.ndarray:
    s = np.asarray(sites, dtype=bool)
    padded = np.pad(s, 1, constant_values=outside_is_site)
    d2 = kernels.squared_edt(np.ascontiguousarray(padded, dtype=np.uint8))
    return d2[1:-1, 1:-1]


def erode(mask, radius: float) -> np.ndarray:
    """Erosion by a disc; pixels outside the image count as background."""
    m = np.asarray(mask, dtype=bool)
    if radius <= 0:
        return m.copy()
    return m & (_distance_sq_to(~m, True) > radius * radius)


def dilate(mask, radius: float) -> np.ndarray:
    m = np.asarray(mask, dtype=bool)
    if radius <= 0:
        return m.copy()
    return _distance_sq_to(m, False) <= radius * radius


def disc_mask(shape, circle: Circle) -> np.ndarray:
    rows, cols = np.indices(shape[:2])
    r = max(circle.radius, 0.0)
    return (cols - circle.x) ** 2 + (rows - circle.y) ** 2 <= r * r


# --- regions of interest -------------------------------------------------------

def plate_rim(image, bright: float = 200) -> Circle:
    """Circle around the largest bright region's outer boundary."""
    comps = connected_components(threshold(to_grayscale(image), bright, "above"))
    if comps.count == 0:
        raise ROIError("no bright region found for the plate rim")
    contour = boundary_contour(comps.mask(comps.largest(1)[0]))
    return min_enclosing_circle([(c, r) for r, c in contour])


def plate_roi(image, pad: float = 30, bright: float = 200) -> np.ndarray:
    rim = plate_rim(image, bright)
    inner = Circle(rim.x, rim.y, rim.radius - pad)
    if inner.radius <= 0:
        raise ROIError(f"rim radius {rim.radius:.1f} px does not exceed pad {pad}")
    return disc_mask(np.asarray(image).shape, inner)


def _fill_holes(region: np.ndarray) -> tuple[np.ndarray, Components]:
    """Fill enclosed background; also return the enclosed background components."""
    bg = connected_components(~region, connectivity=4)
    border = np.unique(np.concatenate([bg.labels[0], bg.labels[-1], bg.labels[:, 0], bg.labels[:, -1]]))
    enclosed = ~np.isin(bg.labels, border) & (bg.labels > 0)
    holes = connected_components(enclosed, connectivity=4)
    return region | enclosed, holes


def seat_roi(image, outer_pad: float = 30, inner_pad: float = 20, bright: float = 200) -> np.ndarray:
    """Annulus between the seat's outer edge and its central opening, both padded.

    The seat is the largest bright component; its outer contour and its
    largest enclosed hole are the two defining boundaries. Smaller enclosed
    holes are stains on the seat and stay inside the ROI.
    """
    comps = connected_components(threshold(to_grayscale(image), bright, "above"))
    if comps.count == 0:
        raise ROIError("no bright region found for the seat")
    seat = comps.mask(comps.largest(1)[0])
    filled, holes = _fill_holes(seat)
    if holes.count == 0:
        raise ROIError("seat has no inner opening; need two boundaries")
    opening = holes.mask(holes.largest(1)[0])
    roi = erode(filled, outer_pad) & ~dilate(opening, inner_pad)
    if not roi.any():
        raise ROIError("padding removed the whole seat")
    return roi


# --- segmentation and scoring ---------------------------------------------------

def segment_red(image, roi, min_red: int = 25) -> tuple[int, np.ndarray]:
    px = np.asarray(image).astype(np.int16)
    r, g, b = px[..., 0], px[..., 1], px[..., 2]
    mask = (r > min_red) & (r > g) & (r > b) & np.asarray(roi, dtype=bool)
    return int(mask.sum()), mask


def segment_dark(image, roi, t: float = 150) -> tuple[int, np.ndarray]:
    mask = threshold(to_grayscale(image), t, "below") & np.asarray(roi, dtype=bool)
    return int(mask.sum()), mask


def cleaned_percent(before_px: int, after_px: int) -> float:
    if before_px <= 0:
        raise UndefinedMetricError("no contamination in the before image")
    if after_px > before_px:
        warnings.warn(f"contamination grew from {before_px} to {after_px} px",
                      ContaminationGrewWarning, stacklevel=2)
    return 100.0 * (before_px - after_px) / before_px


@dataclass
class CleaningResult:
    surface: str
    before_px: int
    after_px: int
    percent: float
    before_mask: np.ndarray
    after_mask: np.ndarray
    before_roi: np.ndarray
    after_roi: np.ndarray


SURFACES = ("plate", "seat")


def measure_surface(image, surface: str) -> tuple[int, np.ndarray, np.ndarray]:
    if surface == "plate":
        roi = plate_roi(image)
        count, mask = segment_red(image, roi)
    elif surface == "seat":
        roi = seat_roi(image)
        count, mask = segment_dark(image, roi)
    else:
        raise ValueError(f"unknown surface {surface!r}; expected one of {SURFACES}")
    return count, mask, roi


def measure_cleaning(before, after, surface: str) -> CleaningResult:
    """Segment both images independently and score the reduction."""
    nb, mb, rb = measure_surface(before, surface)
    na, ma, ra = measure_surface(after, surface)
    return CleaningResult(surface, nb, na, cleaned_percent(nb, na), mb, ma, rb, ra)


# before/after pixel counts reported for the two demonstrations
REPORTED_COUNTS = {
    ("plate", "scrub"): (575188, 1624, 99.7),
    ("plate", "rinse"): (679327, 455273, 32.9),
    ("toilet", "scrub"): (425240, 450, 99.8),
    ("toilet", "rinse"): (537547, 207614, 61.3),
}
