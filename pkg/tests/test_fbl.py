import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats

from ris_lab.fbl import (
    DISPERSION_LIMIT, Linearization, SecrecyCode, bler_no_secrecy, dispersion, linearize_rate,
    linearize_secrecy, secrecy_bler, secrecy_threshold,
)

LOG2E = 1 / math.log(2)


def oracle_secrecy_bler(ga, ge, m, b, delta):
    """Direct scalar evaluation with scipy's normal distribution."""
    if ga <= ge:
        return 1.0
    va = (1 - (1 + ga) ** -2) * LOG2E ** 2
    ve = (1 - (1 + ge) ** -2) * LOG2E ** 2
    arg = math.sqrt(m / va) * (math.log2((1 + ga) / (1 + ge))
                               - math.sqrt(ve / m) * stats.norm.isf(delta) - b / m)
    return stats.norm.sf(arg)


def oracle_bler(g, m, b):
    v = (1 - (1 + g) ** -2) * LOG2E ** 2
    return stats.norm.sf(math.sqrt(m / v) * (math.log2(1 + g) - b / m))


# --- code ---------------------------------------------------------------------------------

@pytest.mark.parametrize("bad", [dict(m=0.5, b=10), dict(m=10, b=0), dict(m=10, b=5, delta=0.5),
                                 dict(m=10, b=5, delta=0.0)])
def test_code_validation(bad):
    with pytest.raises(ValueError):
        SecrecyCode(**bad)


# --- dispersion -----------------------------------------------------------------------------

def test_dispersion_values():
    assert dispersion(0.0) == 0.0
    assert dispersion(1e9) == pytest.approx(DISPERSION_LIMIT, abs=1e-8)
    assert dispersion(1e9) == pytest.approx(2.0814, abs=1e-4)
    assert dispersion(1.0) == pytest.approx(0.75 * LOG2E ** 2, rel=1e-15)


# --- secrecy BLER ------------------------------------------------------------------------------

def test_secrecy_bler_eve_stronger_is_one():
    code = SecrecyCode(200, 150)
    assert secrecy_bler(3.0, 3.0, code) == 1.0
    assert secrecy_bler(1.0, 5.0, code) == 1.0


def test_secrecy_bler_half_point():
    code = SecrecyCode(200, 150)
    for ge in (0.5, 3.0, 40.0):
        assert secrecy_bler(secrecy_threshold(ge, code), ge, code) == pytest.approx(0.5, abs=1e-12)


def test_secrecy_bler_dual_implementation():
    code = SecrecyCode(200, 150, 1e-3)
    assert secrecy_bler(100.0, 1.0, code) == pytest.approx(
        oracle_secrecy_bler(100.0, 1.0, 200, 150, 1e-3), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1e4), st.floats(0, 1e3), st.integers(20, 3000), st.floats(1, 600),
       st.floats(1e-4, 0.49))
def test_secrecy_bler_oracle_property(ga, ge, m, b, delta):
    code = SecrecyCode(m, b, delta)
    v = secrecy_bler(ga, ge, code)
    assert 0.0 <= v <= 1.0
    if ga > ge and ga > 1e-6:
        assert v == pytest.approx(oracle_secrecy_bler(ga, ge, m, b, delta), abs=1e-12)


def test_secrecy_bler_monotonicity():
    g = np.logspace(-1, 3, 120)
    code = SecrecyCode(200, 150)
    e = secrecy_bler(g[:, None], g[None, :], code)
    assert np.all(np.diff(e, axis=0) <= 1e-15)   # nonincreasing in gamma_A
    assert np.all(np.diff(e, axis=1) >= -1e-15)  # nondecreasing in gamma_E
    ga, ge = 60.0, 2.0
    ms = np.arange(20, 2000, 10)
    by_m = [secrecy_bler(ga, ge, code.with_m(m)) for m in ms]
    assert np.all(np.diff(by_m) <= 1e-15)


def test_secrecy_bler_looser_delta_is_smaller():
    g = np.logspace(-1, 3, 60)
    tight = secrecy_bler(g[:, None], g[None, :], SecrecyCode(200, 150, 1e-3))
    loose = secrecy_bler(g[:, None], g[None, :], SecrecyCode(200, 150, 1e-2))
    assert np.all(loose <= tight + 1e-15)


# --- plain BLER -------------------------------------------------------------------------------

def test_bler_half_point_and_zero_snr():
    code = SecrecyCode(300, 150)
    assert bler_no_secrecy(2 ** 0.5 - 1, code) == pytest.approx(0.5, abs=1e-12)
    assert bler_no_secrecy(0.0, code) == 1.0


def test_bler_dual_implementation():
    assert bler_no_secrecy(5.0, SecrecyCode(300, 150)) == pytest.approx(oracle_bler(5.0, 300, 150),
                                                                       abs=1e-12)


# --- linearisations ------------------------------------------------------------------------------

def test_linearization_shape():
    lin = linearize_secrecy(2.0, SecrecyCode(200, 150))
    assert lin.slope < 0 and lin.lower < lin.x0 < lin.upper
    assert lin(lin.x0) == 0.5
    assert lin(lin.lower) == pytest.approx(1.0, abs=1e-12)
    assert lin(lin.upper) == pytest.approx(0.0, abs=1e-12)
    x = np.linspace(lin.lower - 5, lin.upper + 5, 1000)
    assert np.all(np.diff(lin(x)) <= 0)


def test_linearize_secrecy_slope_formula():
    code = SecrecyCode(200, 150)
    lin = linearize_secrecy(2.0, code)
    assert lin.slope == pytest.approx(-math.sqrt(200 / (2 * math.pi * lin.x0 * (lin.x0 + 2))))
    assert lin.x0 == pytest.approx(secrecy_threshold(2.0, code))


def test_linearization_integral_is_midpoint():
    for lin in (linearize_secrecy(3.0, SecrecyCode(200, 150)), linearize_rate(SecrecyCode(300, 150))):
        x = np.linspace(lin.lower, lin.upper, 200_001)
        y = lin(x)
        area = float(np.sum((y[1:] + y[:-1]) / 2 * np.diff(x)))
        assert area == pytest.approx((lin.upper - lin.lower) * lin(lin.x0), rel=1e-9)


def test_linearize_rate_knots():
    code = SecrecyCode(300, 150)
    lin = linearize_rate(code)
    assert lin.x0 == pytest.approx(2 ** 0.5 - 1)
    assert lin(lin.x0) == 0.5
    assert abs(lin(lin.lower) - 1.0) < 1e-12 and abs(lin(lin.upper)) < 1e-12
    assert lin.slope == pytest.approx(-math.sqrt(300) / math.sqrt(2 * math.pi * lin.x0))


def sup_gap(lin, exact):
    x = np.linspace(lin.lower, lin.upper, 20_001)
    return float(np.max(np.abs(lin(x) - exact(x))))


def test_linearization_gap_recorded(cfg):
    code = SecrecyCode(200, 150)
    ge = cfg.eve_mean_snr
    lin = linearize_secrecy(ge, code)
    gap_s = sup_gap(lin, lambda x: secrecy_bler(x, ge, code))
    lin_r = linearize_rate(SecrecyCode(300, 150))
    gap_r = sup_gap(lin_r, lambda x: bler_no_secrecy(x, SecrecyCode(300, 150)))
    # at the knots the affine piece reaches 0 / 1 while Q(+-sqrt(pi/2)) = 0.105
    assert gap_s == pytest.approx(special.erfc(math.sqrt(math.pi) / 2) / 2, abs=0.02)
    assert 0.1 < gap_r < 0.3


@pytest.mark.xfail(strict=True, reason="a first-order expansion cannot track Q within 0.05 up to "
                   "its knots; intrinsic gap Q(sqrt(pi/2)) ~ 0.105 (measured 0.115)")
def test_linearize_secrecy_gap_below_005(cfg):
    code = SecrecyCode(200, 150)
    ge = cfg.eve_mean_snr
    assert sup_gap(linearize_secrecy(ge, code), lambda x: secrecy_bler(x, ge, code)) < 0.05


@pytest.mark.xfail(strict=True, reason="the slope drops the (beta + 2) factor; measured gap 0.22")
def test_linearize_rate_gap_below_005():
    code = SecrecyCode(300, 150)
    assert sup_gap(linearize_rate(code), lambda x: bler_no_secrecy(x, code)) < 0.05


def test_linearization_direct():
    lin = Linearization(x0=10.0, slope=-0.25)
    assert (lin.lower, lin.upper) == (8.0, 12.0)
    assert lin(np.array([0.0, 9.0, 20.0])).tolist() == [1.0, 0.75, 0.0]
