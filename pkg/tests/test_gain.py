import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from mbshape.constellation import PamConstellation, base_grid, mb_pmf
from mbshape.gain import (
    GainCurve,
    curve_crossings,
    gains_for_pmf,
    is_saturated,
    matched_gain_curve,
    matched_snr_for_rate,
    required_snr_uniform,
    required_snr_uniform_batch,
    sensitivity_gain,
    shape_mi_2d,
    uniform_mi_2d,
)
from mbshape.infotheory import mi_awgn_2d
from mbshape.shaping import optimize_shaping


def _inverse_oracle(m, target):
    """Root of the scalar uniform-MI curve, evaluated point by point."""
    u = PamConstellation.uniform(m)
    return brentq(lambda s: mi_awgn_2d(u, s).mi_bits_per_2d - target, -30.0, 80.0, xtol=1e-12)


def test_round_trip_at_12db():
    target = float(uniform_mi_2d(8, 12.0))
    assert required_snr_uniform(8, target) == pytest.approx(12.0, abs=1e-6)


@pytest.mark.parametrize("m, target", [(4, 0.3), (4, 3.5), (8, 2.0), (8, 4.4), (8, 5.9), (16, 7.5)])
def test_inverse_matches_root_finder(m, target):
    s = required_snr_uniform(m, target)
    assert abs(float(uniform_mi_2d(m, s)) - target) < 1e-9
    assert s == pytest.approx(_inverse_oracle(m, target), abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 5.99))
def test_inverse_residual(target):
    s = required_snr_uniform(8, target)
    assert abs(float(uniform_mi_2d(8, s)) - target) < 1e-9


def test_batch_equals_scalar():
    t = np.array([1.0, 2.5, 4.0, 5.5])
    batch = required_snr_uniform_batch(8, t)
    np.testing.assert_allclose(batch, [required_snr_uniform(8, x) for x in t], atol=1e-12)


@pytest.mark.parametrize("target", [0.0, -1.0, 6.0, 6.5, math.nan])
def test_inverse_rejects_outside_open_range(target):
    with pytest.raises(ValueError):
        required_snr_uniform(8, target)


def test_shape_mi_matches_scalar_path():
    g = base_grid(8)
    p = mb_pmf(g, 0.04)
    snr = np.array([5.0, 12.3, 20.0])
    expected = [mi_awgn_2d(PamConstellation(g, p), s).mi_bits_per_2d for s in snr]
    np.testing.assert_allclose(shape_mi_2d(g, p, snr), expected, atol=1e-12)


def test_saturation_flags():
    sat = is_saturated(8, np.array([10.0, 24.0, 25.0, 40.0]))
    assert sat.tolist() == [False, False, True, True]
    assert math.isnan(sensitivity_gain(8, 40.0, 14.5))


def test_uniform_pmf_has_zero_gain():
    g = gains_for_pmf(8, np.full(8, 0.125), np.array([6.0, 12.0, 20.0]))
    np.testing.assert_allclose(g, 0.0, atol=1e-7)


def test_gain_is_horizontal_offset():
    sol = optimize_shaping(8, 16.0)
    g = sensitivity_gain(8, 16.0, 16.0)
    assert float(uniform_mi_2d(8, 16.0 + g)) == pytest.approx(sol.mi_bits_per_2d, abs=1e-9)


@pytest.mark.parametrize("m", [4, 8])
def test_matched_gain_nonnegative_and_smooth(m):
    grid = np.round(np.arange(5.0, 25.05, 0.1), 10)
    curve = matched_gain_curve(m, grid)
    live = curve.gain_db[~curve.saturated]
    assert np.all(live >= -1e-7)
    assert np.nanmax(np.abs(np.diff(curve.gain_db))) < 0.05


def test_mismatched_gain_below_matched():
    for c in (8.0, 14.0, 20.0):
        matched = sensitivity_gain(8, c, c)
        for s in (6.0, 12.0, 18.0, 24.0):
            assert sensitivity_gain(8, c, s) <= matched + 1e-7


def test_gain_curve_helpers():
    grid = np.array([0.0, 1.0, 2.0, 3.0])
    a = GainCurve(grid, np.array([0.0, 1.0, 2.0, np.nan]))
    b = GainCurve(grid, np.array([1.5, 1.5, 1.5, 1.5]))
    assert curve_crossings(a, b) == [pytest.approx(1.5)]
    assert a.peak() == (2.0, 2.0)
    assert a.saturated.tolist() == [False, False, False, True]
    with pytest.raises(ValueError):
        curve_crossings(a, GainCurve(grid + 1, b.gain_db))


def test_matched_snr_for_rate():
    s = matched_snr_for_rate(8, 4.4)
    assert optimize_shaping(8, s).mi_bits_per_2d == pytest.approx(4.4, abs=1e-8)
