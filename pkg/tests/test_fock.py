import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecsbell.correlators import MeasurementKind, correlation
from ecsbell.errors import DimensionTooSmall
from ecsbell.fock import (
    apply_loss,
    coherent_amplitudes,
    displacement_matrix,
    fock_trace,
    loss_kraus_operators,
    measurement_matrix,
    oracle_correlation,
    oracle_dimension,
    realize_density_matrix,
)
from ecsbell.states import ChannelParams, EcsParams, Parity, lossy_ecs_state

amps = st.floats(0.0, 2.0)
etas = st.floats(0.5, 1.0)
parities = st.sampled_from([Parity.EVEN, Parity.ODD])
kinds = st.sampled_from(list(MeasurementKind))
disp = st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False)


def _params(a1, a2, parity):
    if parity is Parity.ODD and a1 * a1 + a2 * a2 < 0.05**2:
        a1 = 0.05
    return EcsParams(a1, a2, parity)


def test_coherent_state_truncation_guard():
    vec = coherent_amplitudes(1.0, 30)
    assert vec.dim == 30 and vec.tail_mass < 1e-9
    with pytest.raises(DimensionTooSmall):
        coherent_amplitudes(3.0, 10)


def test_displacement_matches_coherent_state():
    xi = 0.8 - 0.6j
    d = displacement_matrix(xi, 40)
    assert np.allclose(d[:, 0], coherent_amplitudes(xi, 40).amplitudes, atol=1e-12)


def test_displacement_inverse_on_low_block():
    # the product of cropped matrices is exact only away from the truncation edge
    xi, dim, k = 1.1 + 0.4j, 48, 12
    prod = displacement_matrix(xi, dim) @ displacement_matrix(-xi, dim)
    assert np.allclose(prod[:k, :k], np.eye(k), atol=1e-10)
    assert np.allclose(displacement_matrix(-xi, dim), displacement_matrix(xi, dim).conj().T, atol=1e-12)


def test_displacement_guard():
    with pytest.raises(DimensionTooSmall):
        displacement_matrix(4.0, 8)


def test_measurement_matrices():
    assert np.array_equal(np.diag(measurement_matrix("onoff", 4)), [-1, 1, 1, 1])
    assert np.array_equal(np.diag(measurement_matrix("parity", 4)), [1, -1, 1, -1])


@pytest.mark.parametrize("eta", [0.0, 0.3, 1.0])
def test_kraus_completeness(eta):
    ops = loss_kraus_operators(eta, 16)
    total = sum(k.T @ k for k in ops)
    assert np.allclose(total, np.eye(16), atol=1e-12)


def test_kraus_loss_matches_dyadic_loss():
    # single-mode Kraus channels on the realized pure state vs the analytic mixture
    p, c, dim = EcsParams(0.9, 0.6, Parity.ODD), ChannelParams(0.7, 0.85), 18
    rho = realize_density_matrix(lossy_ecs_state(p, ChannelParams()), dim)
    k1 = loss_kraus_operators(c.eta1, dim)
    k2 = loss_kraus_operators(c.eta2, dim)
    out = np.zeros_like(rho)
    for a in k1:
        for b in k2:
            kk = np.kron(a, b)
            out += kk @ rho @ kk.T
    expected = realize_density_matrix(lossy_ecs_state(p, c), dim)
    assert np.max(np.abs(out - expected)) < 1e-10
    assert abs(np.trace(out) - 1) < 1e-9


def test_apply_loss_on_coherent_state():
    dim = 30
    v = coherent_amplitudes(1.2, dim).amplitudes
    out = apply_loss(np.outer(v, v.conj()), 0.64)
    w = coherent_amplitudes(1.2 * 0.8, dim).amplitudes
    assert np.allclose(out, np.outer(w, w.conj()), atol=1e-10)


@given(amps, amps, parities, etas, etas)
@settings(max_examples=40)
def test_fock_trace_is_one(a1, a2, parity, e1, e2):
    rho = lossy_ecs_state(_params(a1, a2, parity), ChannelParams(e1, e2))
    assert abs(fock_trace(rho, 48) - 1.0) < 1e-10


@given(kinds, amps, amps, parities, etas, etas, disp, disp)
@settings(max_examples=60)
def test_oracle_agrees_with_closed_form(kind, a1, a2, parity, e1, e2, xi, chi):
    p, c = _params(a1, a2, parity), ChannelParams(e1, e2)
    assert abs(correlation(kind, p, c, xi, chi) - oracle_correlation(kind, p, c, xi, chi)) < 1e-8


@given(kinds, amps, amps, parities, etas, etas, disp, disp)
@settings(max_examples=30)
def test_displace_first_with_rescaled_displacement(kind, a1, a2, parity, e1, e2, xi, chi):
    p, c = _params(a1, a2, parity), ChannelParams(e1, e2)
    other = oracle_correlation(kind, p, c, xi / np.sqrt(e1), chi / np.sqrt(e2), order="displace_first")
    assert abs(correlation(kind, p, c, xi, chi) - other) < 1e-8


def test_dimension_refinement():
    p, c = EcsParams(1.8, 1.2, Parity.EVEN), ChannelParams(0.6, 0.9)
    for kind in MeasurementKind:
        lo = oracle_correlation(kind, p, c, 1.2 - 0.7j, -0.4 + 1.1j, dim=48)
        hi = oracle_correlation(kind, p, c, 1.2 - 0.7j, -0.4 + 1.1j, dim=96)
        assert abs(lo - hi) < 1e-9


def test_oracle_dimension_grows_with_amplitude():
    small = oracle_dimension(EcsParams(0.2, 0.2), ChannelParams(), [0.1])
    large = oracle_dimension(EcsParams(2.0, 0.2), ChannelParams(), [1.5])
    assert 8 <= small < large


def test_oracle_rejects_small_dimension():
    with pytest.raises(DimensionTooSmall):
        oracle_correlation("parity", EcsParams(2.0, 2.0), ChannelParams(), 1.0, 1.0, dim=10)


def test_unknown_order():
    with pytest.raises(ValueError):
        oracle_correlation("parity", EcsParams(1.0, 1.0), ChannelParams(), 0, 0, order="sideways")
