import math

import numpy as np
import pytest

from ecsbell.correlators import (
    MeasurementSettings,
    bell_chsh,
    chsh_from_kernel,
    onoff_kernel,
    parity_kernel,
)
from ecsbell.errors import OutOfRange
from ecsbell.optimizer import (
    CIRELSON,
    OptimizationProblem,
    maximize_bell,
    numerical_gradient,
    ridge_line,
    sweep_amplitude_grid,
    sweep_nbar,
)
from ecsbell.states import ChannelParams, EcsParams, Parity, mean_photon_number


def test_numerical_gradient_of_quadratic():
    a = np.array([[2.0, 0.5], [0.5, 1.0]])

    def f(x):
        return 0.5 * np.einsum("...i,ij,...j->...", x, a, x)

    x = np.array([0.3, -1.7])
    val, grad = numerical_gradient(f, x)
    assert val == pytest.approx(f(x))
    assert np.allclose(grad, a @ x, atol=1e-8)


def test_problem_validation():
    with pytest.raises(OutOfRange):
        OptimizationProblem("onoff", "odd", starts=0)
    with pytest.raises(ValueError):
        OptimizationProblem("onoff", "odd", amplitudes="fixed", alpha1=1.0)
    with pytest.raises(OutOfRange):
        OptimizationProblem("onoff", "odd", amplitudes="fixed_nbar", nbar=0.9)
    with pytest.raises(ValueError):
        OptimizationProblem("onoff", "odd", amplitudes="wobbly")


def test_odd_onoff_free_optimum():
    res = maximize_bell(OptimizationProblem("onoff", "odd", starts=16))
    assert res.value == pytest.approx(2.743, abs=0.01)
    assert res.gradient_norm < 1e-6
    # the reported settings and amplitudes reproduce the reported value
    p = EcsParams(res.alpha1, res.alpha2, Parity.ODD)
    assert abs(bell_chsh("onoff", p, ChannelParams(), res.settings)) == pytest.approx(res.value, abs=1e-12)


def test_deterministic():
    prob = OptimizationProblem("parity", "even", ChannelParams(0.9, 0.9), starts=8)
    a, b = maximize_bell(prob), maximize_bell(prob)
    assert a.value == b.value
    assert a.settings == b.settings


def test_fixed_amplitudes_are_respected():
    res = maximize_bell(
        OptimizationProblem("parity", "odd", amplitudes="fixed", alpha1=0.7, alpha2=1.1, starts=8)
    )
    assert (res.alpha1, res.alpha2) == (0.7, 1.1)
    assert 2.0 < res.value <= CIRELSON + 1e-9


def test_fixed_nbar_keeps_photon_number():
    res = maximize_bell(
        OptimizationProblem("onoff", "odd", amplitudes="fixed_nbar", nbar=2.24, starts=8)
    )
    assert mean_photon_number(math.hypot(res.alpha1, res.alpha2), Parity.ODD) == pytest.approx(2.24, abs=1e-9)
    assert res.alpha1 >= 0 and res.alpha2 >= 0


def test_extra_start_is_used():
    prob = OptimizationProblem("onoff", "odd", starts=1)
    good = maximize_bell(OptimizationProblem("onoff", "odd", starts=16))
    res = maximize_bell(prob, extra_starts=[(good.settings, good.alpha1, good.alpha2)])
    assert res.value >= good.value - 1e-9


def test_sweep_nbar_asymmetric_never_below_symmetric():
    template = OptimizationProblem("onoff", "odd", starts=8)
    points = sweep_nbar(template, [1.5, 2.24])
    for pt in points:
        assert pt.asymmetric.value >= pt.symmetric.value - 1e-9
        assert pt.gap >= -1e-9


def test_amplitude_grid_is_mode_symmetric():
    g = np.array([0.3, 0.8])
    grid = sweep_amplitude_grid("parity", "even", ChannelParams(), g, g, starts=4)
    assert grid.values.shape == (2, 2)
    assert abs(grid.values[0, 1] - grid.values[1, 0]) < 1e-6
    assert grid.value_at(0.8, 0.3) == grid.values[1, 0]


def test_ridge_line_prefers_upper_triangle_on_ties():
    g = np.array([0.0, 1.0])
    values = np.array([[0.0, 2.0], [2.0, 0.0]])
    ridge = ridge_line(g, g, values)
    ring = [r for r in ridge if abs(r[0] - 1.0) < 1e-12][0]
    assert ring[1:3] == (1.0, 0.0)


def test_amplitude_sign_flip_is_a_displacement_flip():
    # the optimizer folds negative amplitudes by flipping that mode's settings
    x = MeasurementSettings(0.2, -0.5j, 0.3 + 0.1j, -0.4).to_array()
    flipped = x.copy()
    flipped[4:] *= -1.0
    for kernel in (onoff_kernel, parity_kernel):
        a = chsh_from_kernel(kernel, 0.6, -0.9, 1, 0.9, 0.8, x)
        b = chsh_from_kernel(kernel, 0.6, 0.9, 1, 0.9, 0.8, flipped)
        assert a == pytest.approx(b, abs=1e-14)
