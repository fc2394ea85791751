import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scrubbot import plant as pl

CFG = pl.PlantConfig()
D = CFG.tendon_radius


def random_config(rng, kmax=1.4e-3):
    arcs = [pl.ArcParams(rng.uniform(0, kmax), rng.uniform(-math.pi, math.pi),
                         rng.uniform(226, 240)) for _ in range(3)]
    return pl.arcs_to_config(arcs, D)


def test_straight_segment():
    assert pl.tendons_to_arc(200, 200, 200, 40) == (0.0, 0.0, 200.0)
    assert pl.arc_to_tendons(pl.ArcParams(0.0, 1.3, 200.0), 40) == (200.0, 200.0, 200.0)


def test_arc_to_tendons_hand_value():
    l1, l2, l3 = pl.arc_to_tendons(pl.ArcParams(0.002, 0.0, 200.0), 40)
    assert l1 == pytest.approx(184.0, abs=1e-12)
    assert l2 == pytest.approx(208.0, abs=1e-12) and l3 == pytest.approx(208.0, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-6, 5e-3), st.floats(-math.pi + 1e-6, math.pi), st.floats(50, 300))
def test_arc_round_trip(kappa, phi, ell):
    lengths = pl.arc_to_tendons(pl.ArcParams(kappa, phi, ell), D)
    assert np.mean(lengths) == pytest.approx(ell, rel=1e-12)
    back = pl.tendons_to_arc(*lengths, D)
    assert back.kappa == pytest.approx(kappa, rel=1e-7, abs=1e-12)
    assert back.ell == pytest.approx(ell, rel=1e-12)
    dphi = math.remainder(back.phi - phi, 2 * math.pi)
    assert abs(dphi) < 1e-6


def test_shortened_tendon_bends_toward_it():
    eps = 1e-3
    arc = pl.tendons_to_arc(200 - eps, 200, 200, 40)
    assert arc.phi == pytest.approx(0.0, abs=1e-12)
    # finite difference of the tip: shortening l1 moves the tip toward tendon 1 (+x)
    q0 = pl.straight_config(CFG)
    q1 = q0.copy()
    q1[0] -= 0.5
    x0 = pl.forward_pose(q0, CFG.reference_tension, CFG).position
    x1 = pl.forward_pose(q1, CFG.reference_tension, CFG).position
    assert x1[0] - x0[0] > 0
    assert abs(x1[1] - x0[1]) < 1e-9


def test_envelope_and_domain_errors():
    with pytest.raises(ValueError):
        pl.tendons_to_arc(0, 1, 1, 40)
    with pytest.raises(pl.EnvelopeError):
        pl.arc_to_tendons(pl.ArcParams(0.1, 0.0, 100.0), 40)
    with pytest.raises(pl.ManifoldError):
        pl.config_to_arcs(np.ones(8), 40)
    with pytest.raises(pl.ManifoldError):
        pl.config_to_arcs(-np.ones(9), 40)
    bent = pl.arcs_to_config([pl.ArcParams(0.02, 0.0, 200.0)] * 3, 20)
    with pytest.raises(pl.ManifoldError):
        pl.config_to_arcs(bent, 20)


def test_straight_free_hang():
    pose = pl.forward_pose(pl.straight_config(CFG), CFG.reference_tension, CFG)
    assert np.array_equal(pose.position, [0.0, 0.0, -CFG.nominal_length])
    assert np.allclose(pose.orientation, [1, 0, 0, 0])


def test_heavier_load_hangs_lower():
    rng = np.random.default_rng(1)
    for _ in range(20):
        q = random_config(rng)
        z1 = pl.forward_pose(q, 7.0, CFG).position[2]
        z2 = pl.forward_pose(q, 12.0, CFG).position[2]
        assert z2 < z1


def test_deflection_closed_form():
    rho, excess = 75.0, 9.1
    start = np.array([rho, 0.0, -700.0])
    moved = pl.deflect(start, CFG.reference_tension + excess, CFG)
    assert start[2] - moved[2] == pytest.approx(CFG.axial_compliance * excess, abs=1e-12)
    inward = rho - moved[0]
    expected = CFG.lateral_compliance * excess * rho / CFG.nominal_length
    assert inward == pytest.approx(expected, abs=1e-12)
    assert np.array_equal(pl.deflect(start, CFG.reference_tension, CFG), start)


def test_quaternions_unit_and_canonical():
    rng = np.random.default_rng(2)
    for _ in range(200):
        pose = pl.forward_pose(random_config(rng, 4e-3), rng.uniform(6.2, 15.3), CFG)
        assert abs(np.linalg.norm(pose.orientation) - 1) < 1e-9
        assert pose.orientation[0] >= 0


def test_quat_from_matrix_matches_scipy():
    from scipy.spatial.transform import Rotation
    for m in Rotation.random(50, random_state=4).as_matrix():
        x, y, z, w = Rotation.from_matrix(m).as_quat()
        assert np.allclose(pl.quat_from_matrix(m), pl.canonical_quat([w, x, y, z]), atol=1e-12)


def test_rotational_symmetry():
    rng = np.random.default_rng(4)
    c, s = math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3)
    for _ in range(20):
        q = random_config(rng)
        # shifting each triple by one slot turns every bending plane by +120 deg
        shifted = np.concatenate([np.roll(q[3 * k:3 * k + 3], 1) for k in range(3)])
        p0 = pl.forward_pose(q, 9.0, CFG).position
        p1 = pl.forward_pose(shifted, 9.0, CFG).position
        # the world flip mirrors y, so the image rotates by -120 deg about z
        rot = np.array([[c, s, 0], [-s, c, 0], [0, 0, 1]])
        assert np.allclose(p1, rot @ p0, atol=1e-9)


def test_noise_is_seeded():
    noisy = CFG.with_noise(1.0)
    q = pl.straight_config(noisy)
    a = pl.forward_pose(q, 8.0, noisy, np.random.default_rng(7)).position
    b = pl.forward_pose(q, 8.0, noisy, np.random.default_rng(7)).position
    c = pl.forward_pose(q, 8.0, noisy).position
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def _residual(q, f_g, surface_z, force):
    z = pl.tip_height(q, f_g - force, CFG)
    return force - CFG.contact_stiffness * max(0.0, surface_z - z)


def test_contact_no_contact_and_residual():
    q = pl.straight_config(CFG)
    assert pl.contact_force(q, 10.0, -900.0, CFG) == 0.0
    rng = np.random.default_rng(5)
    for _ in range(30):
        q = random_config(rng)
        f = pl.contact_force(q, 15.3, -712.0, CFG)
        assert abs(_residual(q, 15.3, -712.0, f)) < 1e-6


def test_contact_grid_oracle():
    rng = np.random.default_rng(6)
    for _ in range(5):
        q = random_config(rng)
        surface = pl.tip_height(q, 15.3, CFG) + rng.uniform(0.3, 1.6)
        grid = np.arange(0, 15.3, 1e-4)
        z0 = pl.tip_height(q, CFG.reference_tension, CFG)
        z = z0 - CFG.axial_compliance * (15.3 - grid - CFG.reference_tension)
        res = np.abs(grid - CFG.contact_stiffness * np.maximum(0.0, surface - z))
        assert abs(grid[np.argmin(res)] - pl.contact_force(q, 15.3, surface, CFG)) < 2e-4


def test_contact_monotone_in_surface_height():
    q = pl.straight_config(CFG)
    forces = [pl.contact_force(q, 15.3, z, CFG) for z in np.linspace(-740, -640, 51)]
    assert all(b >= a for a, b in zip(forces, forces[1:]))
    assert forces[-1] == pytest.approx(15.3)


def test_config_file_round_trip(tmp_path):
    cfg = pl.PlantConfig(axial_compliance=2.5, noise_sigma=0.1)
    path = tmp_path / "p.cfg"
    path.write_text("# comment\n" + cfg.to_text())
    assert pl.PlantConfig.from_file(path) == cfg
    path.write_text("tendon_radius = 40\nbogus = 1\n")
    with pytest.raises(ValueError, match=":2:"):
        pl.PlantConfig.from_file(path)
    with pytest.raises(ValueError):
        pl.PlantConfig(contact_stiffness=0)


def test_bundled_config_matches_defaults():
    from importlib import resources
    path = resources.files("scrubbot") / "data" / "plant.cfg"
    assert pl.PlantConfig.from_file(path) == pl.PlantConfig()
