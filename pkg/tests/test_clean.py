import itertools
import math
import warnings

import numpy as np
import pytest
from scipy import ndimage

from scrubbot import clean as cl
from scrubbot import fixtures as fx


def test_pixmap_round_trip(tmp_path):
    img = np.arange(18, dtype=np.uint8).reshape(2, 3, 3)
    path = tmp_path / "a.ppm"
    cl.write_pixmap(path, img)
    assert np.array_equal(cl.read_pixmap(path).pixels, img)
    gray = np.array([[0, 255], [7, 9]], np.uint8)
    cl.write_pixmap(path, gray)
    assert np.array_equal(cl.read_pixmap(path).pixels[..., 1], gray)


def test_pixmap_header_comments_and_errors():
    body = bytes(range(6))
    data = b"P6\n# made by hand\n2 # width\n1\n255\n" + body
    assert cl.parse_pixmap(data).tolist() == [[[0, 1, 2], [3, 4, 5]]]
    with pytest.raises(cl.PixmapFormatError, match="depth"):
        cl.parse_pixmap(b"P6\n1 1\n65535\n" + bytes(6))
    with pytest.raises(cl.PixmapFormatError):
        cl.parse_pixmap(b"P3\n1 1\n255\n0 0 0")
    with pytest.raises(cl.PixmapFormatError):
        cl.parse_pixmap(b"P6\n2 2\n255\n" + bytes(3))


def test_grayscale():
    img = np.array([[[255, 255, 255], [255, 0, 0]]], np.uint8)
    assert cl.to_grayscale(img).tolist() == [[255, 76]]
    g = np.array([[3, 200]], np.uint8)
    assert np.array_equal(cl.to_grayscale(g), g)


def test_threshold_conventions():
    g = np.array([[199, 200, 201, 255]], np.uint8)
    assert cl.threshold(g, 200, "above").tolist() == [[False, False, True, True]]
    assert np.all(cl.threshold(np.full((3, 3), 255), 200))
    assert np.all(cl.threshold(g, 200) | cl.threshold(g, 200, "at_most"))
    with pytest.raises(ValueError):
        cl.threshold(g, 1, "sideways")


def test_components_examples():
    m = np.zeros((10, 20), bool)
    m[1:3, 1:6] = True
    m[6:8, 10:15] = True
    comps = cl.connected_components(m)
    assert comps.count == 2 and list(comps.areas) == [10, 10]
    diag = np.eye(4, dtype=bool)
    assert cl.connected_components(diag).count == 1
    assert cl.connected_components(diag, 4).count == 4
    checker = (np.indices((4, 4)).sum(axis=0) % 2).astype(bool)
    assert cl.connected_components(checker).count == 1
    assert cl.connected_components(~checker).count == 1


def test_boundary_contour_properties():
    sq = np.zeros((5, 5), bool)
    sq[1:4, 1:4] = True
    assert len(cl.boundary_contour(sq)) == 8
    dot = np.zeros((3, 3), bool)
    dot[1, 1] = True
    assert cl.boundary_contour(dot) == [(1, 1)]
    rng = np.random.default_rng(0)
    blob = ndimage.binary_closing(rng.random((40, 40)) < 0.7, iterations=2)
    comps = cl.connected_components(blob)
    region = comps.mask(comps.largest(1)[0])
    padded = np.pad(region, 1)
    for r, c in cl.boundary_contour(region):
        assert region[r, c]
        assert not padded[r:r + 3, c:c + 3].all()


def brute_circle(points):
    best = None
    for a, b in itertools.combinations(points, 2):
        cands = [cl._circle_two(a, b)]
        for c in points:
            cands.append(cl._circle_three(a, b, c))
        for circ in cands:
            if all(math.hypot(p[0] - circ.x, p[1] - circ.y) <= circ.radius + 1e-7 for p in points):
                if best is None or circ.radius < best.radius:
                    best = circ
    return best


def test_mec_examples():
    c = cl.min_enclosing_circle([(0, 0), (4, 0)])
    assert c == pytest.approx((2, 0, 2))
    c = cl.min_enclosing_circle([(0, 0), (1, 0), (0, 1), (1, 1)])
    assert c == pytest.approx((0.5, 0.5, math.sqrt(2) / 2))
    assert cl.min_enclosing_circle([(3, 4)]) == (3, 4, 0)
    with pytest.raises(ValueError):
        cl.min_enclosing_circle([])


def test_mec_containment_minimality_and_order():
    rng = np.random.default_rng(1)
    for trial in range(100):
        pts = [tuple(p) for p in rng.normal(size=(int(rng.integers(2, 25)), 2)) * rng.uniform(1, 100)]
        c = cl.min_enclosing_circle(pts)
        dist = [math.hypot(p[0] - c.x, p[1] - c.y) for p in pts]
        assert max(dist) <= c.radius + 1e-7
        assert max(dist) > c.radius - 1e-4
        if trial < 10:
            assert c.radius == pytest.approx(brute_circle(pts).radius, abs=1e-7)
            for s in range(10):
                shuffled = list(pts)
                np.random.default_rng(s).shuffle(shuffled)
                other = cl.min_enclosing_circle(shuffled, seed=s)
                assert np.allclose(other, c, atol=1e-7)


def test_morphology_matches_scipy():
    rng = np.random.default_rng(2)
    m = ndimage.binary_closing(rng.random((60, 60)) < 0.6, iterations=2)
    for radius in (1.5, 4.0):
        disc = cl.disc_mask((2 * 10 + 1, 2 * 10 + 1), cl.Circle(10, 10, radius))
        ref_d = ndimage.binary_dilation(m, disc)
        ref_e = ndimage.binary_erosion(m, disc, border_value=0)
        assert np.array_equal(cl.dilate(m, radius), ref_d)
        assert np.array_equal(cl.erode(m, radius), ref_e)


def white_disc(radius=200, size=480):
    rows, cols = np.indices((size, size))
    img = np.zeros((size, size, 3), np.uint8)
    img[np.hypot(rows - size / 2, cols - size / 2) <= radius] = 255
    return img


def test_plate_roi_synthetic_disc():
    img = white_disc()
    rim = cl.plate_rim(img)
    roi = cl.plate_roi(img)
    assert abs(rim.radius - 30 - 170) <= 1
    assert np.all(cl.disc_mask(img.shape, rim)[roi])
    area = roi.sum()
    assert abs(area - math.pi * 170 ** 2) / (math.pi * 170 ** 2) < 0.02
    with pytest.raises(cl.ROIError):
        cl.plate_roi(np.zeros((20, 20, 3), np.uint8))


def test_seat_roi_errors_and_pad():
    with pytest.raises(cl.ROIError):
        cl.seat_roi(white_disc())
    seat = fx.load_fixture("seat_before")
    roi = cl.seat_roi(seat)
    g = fx.SEAT_GEOMETRY
    rows, cols = np.indices(roi.shape)
    dist = np.hypot(rows - g["center"][0], cols - g["center"][1])
    assert dist[roi].min() > g["inner"] + 20 - 1.5
    assert dist[roi].max() < g["outer"] - 30 + 1.5


def test_segmentation_rules():
    img = np.zeros((1, 4, 3), np.uint8)
    img[0] = [(26, 0, 0), (25, 0, 0), (100, 100, 100), (200, 10, 199)]
    roi = np.ones((1, 4), bool)
    n, mask = cl.segment_red(img, roi)
    assert mask.tolist() == [[True, False, False, True]] and n == 2
    gray = np.array([[149, 150, 0, 255]], np.uint8)
    rgb = np.repeat(gray[..., None], 3, axis=2)
    roi = np.array([[True, True, False, True]])
    n, mask = cl.segment_dark(rgb, roi)
    assert mask.tolist() == [[True, False, False, False]]
    assert cl.segment_dark(np.full((3, 3, 3), 255, np.uint8), np.ones((3, 3), bool))[0] == 0


def test_cleaned_percent():
    assert cl.cleaned_percent(575188, 1624) == pytest.approx(99.72, abs=0.005)
    assert cl.cleaned_percent(679327, 455273) == pytest.approx(32.98, abs=0.005)
    assert cl.cleaned_percent(10, 10) == 0.0
    assert cl.cleaned_percent(10, 0) == 100.0
    with pytest.raises(cl.UndefinedMetricError):
        cl.cleaned_percent(0, 0)
    with pytest.warns(cl.ContaminationGrewWarning):
        assert cl.cleaned_percent(10, 15) == -50.0


def test_reported_counts():
    for (_, _), (before, after, printed) in cl.REPORTED_COUNTS.items():
        assert abs(cl.cleaned_percent(before, after) - printed) <= 0.15


@pytest.mark.parametrize("name", sorted(fx.FIXTURE_RECIPES))
def test_fixture_counts_exact(name):
    truth = fx.load_truth()
    surface = name.split("_")[0]
    count, mask, roi = cl.measure_surface(fx.load_fixture(name), surface)
    assert count == truth[name]
    # and the mask is the drawn stain, not just the same size
    fn, n, seed = fx.FIXTURE_RECIPES[name]
    assert np.array_equal(mask, fn(n, seed).stain)


def test_fixture_roi_areas():
    truth = fx.load_truth()
    for surface in cl.SURFACES:
        _, _, roi = cl.measure_surface(fx.load_fixture(f"{surface}_before"), surface)
        expected = truth[f"{surface}_roi_area"]
        assert abs(roi.sum() - expected) / expected < 0.02


def test_checked_in_fixtures_match_generator():
    for name, f in fx.build_all().items():
        assert np.array_equal(fx.load_fixture(name).pixels, f.image)


@pytest.mark.parametrize("offset", [(7, -5), (-12, 9)])
def test_translation_invariance(offset):
    base = fx.make_plate(15, 3)
    moved = fx.make_plate(15, 3, offset=offset)
    n0, m0, _ = cl.measure_surface(base.image, "plate")
    n1, m1, _ = cl.measure_surface(moved.image, "plate")
    assert n0 == n1 == base.count
    assert np.array_equal(np.roll(m0, offset, axis=(0, 1)), m1)
    seat0 = fx.make_seat(10, 4)
    seat1 = fx.make_seat(10, 4, offset=offset)
    assert cl.measure_surface(seat0.image, "seat")[0] == cl.measure_surface(seat1.image, "seat")[0] == seat0.count


def test_measure_cleaning_and_unknown_surface():
    res = cl.measure_cleaning(fx.load_fixture("plate_before"), fx.load_fixture("plate_after"), "plate")
    truth = fx.load_truth()
    assert res.percent == cl.cleaned_percent(truth["plate_before"], truth["plate_after"])
    with pytest.raises(ValueError):
        cl.measure_surface(white_disc(), "bathtub")
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cl.measure_cleaning(fx.load_fixture("seat_before"), fx.load_fixture("seat_after"), "seat")
