import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scrubbot import brush as br


def test_unidirectional_integral_matches_quadrature():
    # integrate mu*P*r over the disc numerically
    r = np.linspace(0, 44.45, 200001)
    dens = 0.93 * 0.01 * r * 2 * math.pi * r
    num = np.trapezoid(dens, r) if hasattr(np, "trapezoid") else np.trapz(dens, r)
    assert br.moment_unidirectional(0.93, 0.01, 44.45) == pytest.approx(num, rel=1e-9)


def test_zero_moment_ratio():
    ratio = br.zero_moment_ratio()
    assert ratio == pytest.approx(0.79370, abs=5e-6)
    assert abs(ratio ** 3 - 0.5) < 1e-12
    m_uni = br.moment_unidirectional(0.9, 0.02, 35.0)
    assert abs(br.moment_counter_rotating(0.9, 0.02, ratio * 35.0, 35.0)) < 1e-9 * m_uni


def test_counter_rotating_sign_for_brush_geometry():
    # the integral keeps the outer face dominant while r_o - 2 r_i is negative
    assert br.moment_counter_rotating(0.93, 0.01, 25.0, 35.0) > 0
    assert 35.0 - 2 * 25.0 < 0
    # past the zero-moment radius the inner face wins
    assert br.moment_counter_rotating(0.93, 0.01, 30.0, 35.0) < 0


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 2), st.floats(0, 1), st.floats(0.1, 100))
def test_counter_reduces_to_disc_without_inner(mu, p, r):
    assert br.moment_counter_rotating(mu, p, 0.0, r) == pytest.approx(
        br.moment_unidirectional(mu, p, r), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.01, 0.45), st.floats(0.55, 0.99))
def test_counter_decreasing_in_inner_radius(r_o, a, b):
    m1 = br.moment_counter_rotating(0.9, 0.05, a * r_o, r_o)
    m2 = br.moment_counter_rotating(0.9, 0.05, b * r_o, r_o)
    assert m2 < m1


def test_linear_slope_counter():
    assert br.linear_slope_counter(0.93, 25, 35) == pytest.approx(9.30, abs=1e-12)
    assert abs(br.linear_slope_counter(0.93, 25, 35) - 9.34) / 9.34 < 0.005
    assert br.linear_slope_counter(0.93, 17.5, 35) == 0.0
    assert br.linear_slope_counter(0.0, 25, 35) == 0.0


def test_integral_slope_disagrees_with_linearised_form():
    s = br.slope_counter_rotating(0.93, 25, 35)
    assert abs(s) == pytest.approx(5.88, abs=0.05)
    assert abs(abs(s) - br.linear_slope_counter(0.93, 25, 35)) > 3


def test_backlash_moment():
    fit = br.MEASURED_BACKLASH
    assert br.backlash_moment(fit, 0.0) == 0.0
    assert br.backlash_moment(fit, 11.0) == pytest.approx(50.34, abs=1e-9)
    assert br.backlash_moment(fit, fit.delta / fit.k) == 0.0
    with pytest.raises(ValueError):
        br.backlash_moment(fit, -1.0)


def test_extract_mu():
    assert br.extract_mu_from_slope(27.56, 44.45) == pytest.approx(0.93, abs=1e-3)
    assert br.extract_mu_from_slope(2 * 12.0 / 3, 12.0) == pytest.approx(1.0)
    for mu in (0.1, 0.5, 1.7):
        k = br.slope_unidirectional(mu, 30.0)
        assert abs(br.extract_mu_from_slope(k, 30.0) - mu) < 1e-12
    with pytest.raises(ValueError):
        br.extract_mu_from_slope(0.0, 1.0)


def test_fit_linear_exact_and_degenerate():
    fit = br.fit_linear([(x, 2 * x + 1) for x in range(5)])
    assert fit.slope == pytest.approx(2) and fit.intercept == pytest.approx(1)
    assert fit.r_squared == 1.0
    const = br.fit_linear([(0, 3.0), (1, 3.0), (2, 3.0)])
    assert const.slope == 0.0 and const.r_squared == 1.0
    with pytest.raises(br.DegenerateFitError):
        br.fit_linear([(1, 2), (1, 3)])
    with pytest.raises(br.DegenerateFitError):
        br.fit_linear([(1, 2)])


def test_fit_recovers_backlash_model():
    fs = np.linspace(6, 11, 21)
    fit = br.fit_linear([(f, br.backlash_moment(br.MEASURED_BACKLASH, f)) for f in fs])
    assert abs(fit.slope - 9.34) < 1e-9
    assert abs(fit.intercept + 52.4) < 1e-9


def test_monte_carlo_matches_closed_forms():
    rng = np.random.default_rng(5)
    for i in range(5):
        r_o = rng.uniform(10, 60)
        r_i = rng.uniform(0.1, 0.9) * r_o
        mc = br.monte_carlo_moment(0.9, 0.02, r_i, r_o, n=200_000, counter_rotating=False, seed=i)
        assert mc == pytest.approx(br.moment_unidirectional(0.9, 0.02, r_o), rel=0.01)


def test_average_reduction_band():
    red = br.average_reduction(np.linspace(4, 11, 71))
    assert 0.80 <= red <= 0.95
    with pytest.raises(ValueError):
        br.average_reduction([0.0])


def test_brush_spec_validation():
    with pytest.raises(ValueError):
        br.BrushSpec(0.9, 10.0, 12.0)
    with pytest.raises(ValueError):
        br.BrushSpec(-0.1, 10.0)
    spec = br.BrushSpec(0.93, 35.0, 25.0)
    assert spec.counter_rotating
    assert spec.pressure(math.pi * 35.0 ** 2) == pytest.approx(1.0)


def test_force_sweep_rows():
    rows = br.force_sweep(br.BrushSpec(0.93, 35.0, 25.0), [0.0, 11.0])
    assert rows[0] == (0.0, 0.0, 0.0, 0.0)
    f, uni, cr, bl = rows[1]
    assert uni == pytest.approx(br.slope_unidirectional(0.93, 35.0) * 11.0)
    assert bl == pytest.approx(50.34)
