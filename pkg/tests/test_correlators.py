import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ecsbell.correlators import (
    MeasurementKind,
    MeasurementSettings,
    bell_chsh,
    corr_onoff,
    corr_parity,
    correlation,
)
from ecsbell.errors import DegenerateState
from ecsbell.states import ChannelParams, EcsParams, Parity

amps = st.floats(0.0, 3.0)
etas = st.floats(0.0, 1.0)
parities = st.sampled_from([Parity.EVEN, Parity.ODD])
kinds = st.sampled_from(list(MeasurementKind))
disp = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


def _params(a1, a2, parity):
    # odd states close to the vacuum lose about eps / alpha^2 to cancellation
    if parity is Parity.ODD and a1 * a1 + a2 * a2 < 0.05**2:
        a1 = 0.05
    return EcsParams(a1, a2, parity)


@given(kinds, amps, amps, parities, etas, etas, disp, disp)
def test_correlation_is_bounded(kind, a1, a2, parity, e1, e2, xi, chi):
    e = correlation(kind, _params(a1, a2, parity), ChannelParams(e1, e2), xi, chi)
    assert -1.0 - 1e-12 <= e <= 1.0 + 1e-12


@given(kinds, amps, amps, parities, etas, etas, disp, disp)
def test_mode_exchange_symmetry(kind, a1, a2, parity, e1, e2, xi, chi):
    p, c = _params(a1, a2, parity), ChannelParams(e1, e2)
    a = correlation(kind, p, c, xi, chi)
    b = correlation(kind, p.swapped(), c.swapped(), chi, xi)
    assert abs(a - b) < 1e-9


@given(kinds, amps, amps, parities, etas, etas, disp, disp)
def test_joint_sign_flip_symmetry(kind, a1, a2, parity, e1, e2, xi, chi):
    # the ECS is invariant under (alpha1, alpha2) -> (-alpha1, -alpha2)
    p, c = _params(a1, a2, parity), ChannelParams(e1, e2)
    assert abs(correlation(kind, p, c, xi, chi) - correlation(kind, p, c, -xi, -chi)) < 1e-9


@given(amps, amps, parities)
def test_undisplaced_parity_is_total_parity(a1, a2, parity):
    p = _params(a1, a2, parity)
    assert corr_parity(p, ChannelParams(), 0, 0) == pytest.approx(parity.sign, abs=1e-12)


def test_undisplaced_onoff_odd_has_no_joint_vacuum():
    # P12 = 0 for the odd state, so E = 1 - 2 P1 - 2 P2
    a1, a2 = 0.9, 0.6
    p = EcsParams(a1, a2, Parity.ODD)
    n_sq = 1.0 / (2.0 - 2.0 * math.exp(-2.0 * (a1**2 + a2**2)))
    p1 = n_sq * (2 * math.exp(-(a1**2)) - 2 * math.exp(-(a1**2) - 2 * a2**2))
    p2 = n_sq * (2 * math.exp(-(a2**2)) - 2 * math.exp(-(a2**2) - 2 * a1**2))
    assert corr_onoff(p, ChannelParams(), 0, 0) == pytest.approx(1 - 2 * p1 - 2 * p2, abs=1e-14)


@given(amps, amps, parities, disp, disp)
def test_complete_loss_leaves_vacuum(a1, a2, parity, xi, chi):
    p, c = _params(a1, a2, parity), ChannelParams(0.0, 0.0)
    assert corr_parity(p, c, xi, chi) == pytest.approx(
        math.exp(-2 * abs(xi) ** 2 - 2 * abs(chi) ** 2), abs=1e-12
    )
    q1, q2 = math.exp(-abs(xi) ** 2), math.exp(-abs(chi) ** 2)
    assert corr_onoff(p, c, xi, chi) == pytest.approx((1 - 2 * q1) * (1 - 2 * q2), abs=1e-12)


def test_bell_is_chsh_combination():
    p, c = EcsParams(0.8, 0.5, Parity.ODD), ChannelParams(0.9, 0.7)
    s = MeasurementSettings(0.1 + 0.2j, -0.4, 0.3j, 0.5 - 0.1j)
    for kind in MeasurementKind:
        e = lambda a, b: correlation(kind, p, c, a, b)  # noqa: E731
        expected = e(s.xi1, s.xi2) + e(s.xi1p, s.xi2) + e(s.xi1, s.xi2p) - e(s.xi1p, s.xi2p)
        assert bell_chsh(kind, p, c, s) == pytest.approx(expected, abs=1e-14)


def test_settings_round_trip_and_validation():
    s = MeasurementSettings(1 + 2j, 3 + 4j, 5 + 6j, 7 + 8j)
    assert np.array_equal(s.to_array(), np.arange(1, 9, dtype=float))
    assert MeasurementSettings.from_array(s.to_array()) == s
    with pytest.raises(ValueError):
        MeasurementSettings(float("nan"), 0, 0, 0)


def test_kind_parse():
    assert MeasurementKind.parse("ONOFF") is MeasurementKind.ONOFF
    with pytest.raises(ValueError):
        MeasurementKind.parse("homodyne")


def test_degenerate_state_rejected_before_arithmetic():
    with pytest.raises(DegenerateState):
        EcsParams(0.0, 0.0, Parity.ODD)


def test_large_arguments_do_not_overflow():
    p = EcsParams(30.0, 25.0, Parity.EVEN)
    for kind in MeasurementKind:
        assert math.isfinite(correlation(kind, p, ChannelParams(0.3, 0.6), 40 - 5j, -35 + 2j))
