"""Closed-form displaced on-off and displaced parity correlations.

Both observables are evaluated on the lossy ECS mixture with displacement
folded into the measurement, ``O(xi) = D(xi) M D(xi)^dagger``.  Every
exponent below is nonpositive, so the kernels are overflow-free for any
amplitude and displacement.

The ``*_kernel`` functions broadcast over numpy arrays and are what the
optimizer calls; ``corr_onoff``/``corr_parity``/``bell_chsh`` are the scalar
front ends taking the typed parameter objects.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .states import ChannelParams, EcsParams, normalization_factor

__all__ = [
    "MeasurementKind",
    "MeasurementSettings",
    "onoff_kernel",
    "parity_kernel",
    "vacuum_probabilities",
    "corr_onoff",
    "corr_parity",
    "correlation",
    "bell_chsh",
    "chsh_from_kernel",
]


class MeasurementKind(str, enum.Enum):
    ONOFF = "onoff"
    PARITY = "parity"

    @classmethod
    def parse(cls, value) -> "MeasurementKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown measurement kind {value!r}") from None

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class MeasurementSettings:
    """Displacements for the two CHSH settings of each party."""

    xi1: complex
    xi1p: complex
    xi2: complex
    xi2p: complex

    def __post_init__(self):
        for name in ("xi1", "xi1p", "xi2", "xi2p"):
            value = complex(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)

    def to_array(self) -> np.ndarray:
        """``[re xi1, im xi1, re xi1', im xi1', re xi2, im xi2, re xi2', im xi2']``."""
        return np.array(
            [
                self.xi1.real, self.xi1.imag, self.xi1p.real, self.xi1p.imag,
                self.xi2.real, self.xi2.imag, self.xi2p.real, self.xi2p.imag,
            ]
        )

    @classmethod
    def from_array(cls, x) -> "MeasurementSettings":
        x = np.asarray(x, dtype=float)
        return cls(
            complex(x[0], x[1]), complex(x[2], x[3]),
            complex(x[4], x[5]), complex(x[6], x[7]),
        )

    def scaled(self, f1: float, f2: float) -> "MeasurementSettings":
        return MeasurementSettings(self.xi1 * f1, self.xi1p * f1, self.xi2 * f2, self.xi2p * f2)


def _state_scalars(a1, a2, sign, eta1, eta2):
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    a_sq = a1 * a1 + a2 * a2
    if sign > 0:
        n_sq = 1.0 / (2.0 + 2.0 * np.exp(-2.0 * a_sq))
    else:
        n_sq = 1.0 / (-2.0 * np.expm1(-2.0 * a_sq))
    u1 = np.sqrt(eta1) * a1
    u2 = np.sqrt(eta2) * a2
    damping = np.exp(-2.0 * ((1.0 - eta1) * a1 * a1 + (1.0 - eta2) * a2 * a2))
    return n_sq, u1, u2, damping


def vacuum_probabilities(a1, a2, sign, eta1, eta2, xr, xi, cr, ci):
    """Probabilities that the displaced detectors see vacuum.

    Returns ``(P1, P2, P12)``: vacuum on mode 1, on mode 2, and on both, for the
    lossy state displaced by ``-xi`` on mode 1 and ``-chi`` on mode 2.
    """
    n_sq, u1, u2, damping = _state_scalars(a1, a2, sign, eta1, eta2)
    x_sq = xr * xr + xi * xi
    c_sq = cr * cr + ci * ci
    g1m = np.exp(-(xr - u1) ** 2 - xi * xi)
    g1p = np.exp(-(xr + u1) ** 2 - xi * xi)
    g2m = np.exp(-(cr - u2) ** 2 - ci * ci)
    g2p = np.exp(-(cr + u2) ** 2 - ci * ci)
    coh = 2.0 * sign * damping
    p1 = n_sq * (g1m + g1p + coh * np.exp(-2.0 * u2 * u2 - u1 * u1 - x_sq) * np.cos(2.0 * u1 * xi))
    p2 = n_sq * (g2m + g2p + coh * np.exp(-2.0 * u1 * u1 - u2 * u2 - c_sq) * np.cos(2.0 * u2 * ci))
    p12 = n_sq * (
        g1m * g2m
        + g1p * g2p
        + coh * np.exp(-u1 * u1 - u2 * u2 - x_sq - c_sq) * np.cos(2.0 * (u1 * xi + u2 * ci))
    )
    return p1, p2, p12


def onoff_kernel(a1, a2, sign, eta1, eta2, xr, xi, cr, ci):
    """E_O for real amplitudes and displacements ``xi = xr + i xi``, ``chi = cr + i ci``."""
    p1, p2, p12 = vacuum_probabilities(a1, a2, sign, eta1, eta2, xr, xi, cr, ci)
    return 1.0 - 2.0 * p1 - 2.0 * p2 + 4.0 * p12


def parity_kernel(a1, a2, sign, eta1, eta2, xr, xi, cr, ci):
    """E_Pi, the product of displaced photon-number parities (scaled joint Wigner function)."""
    n_sq, u1, u2, damping = _state_scalars(a1, a2, sign, eta1, eta2)
    x_sq = xr * xr + xi * xi
    c_sq = cr * cr + ci * ci
    direct = np.exp(-2.0 * ((xr - u1) ** 2 + (cr - u2) ** 2 + xi * xi + ci * ci)) + np.exp(
        -2.0 * ((xr + u1) ** 2 + (cr + u2) ** 2 + xi * xi + ci * ci)
    )
    fringe = 2.0 * sign * damping * np.exp(-2.0 * (x_sq + c_sq)) * np.cos(4.0 * (u1 * xi + u2 * ci))
    return n_sq * (direct + fringe)


_KERNELS = {MeasurementKind.ONOFF: onoff_kernel, MeasurementKind.PARITY: parity_kernel}


def _evaluate(kind, p: EcsParams, c: ChannelParams, xi: complex, chi: complex) -> float:
    normalization_factor(p)  # raises DegenerateState before any arithmetic
    kernel = _KERNELS[MeasurementKind.parse(kind)]
    xi, chi = complex(xi), complex(chi)
    return float(
        kernel(p.alpha1, p.alpha2, p.parity.sign, c.eta1, c.eta2,
               xi.real, xi.imag, chi.real, chi.imag)
    )


def corr_onoff(p: EcsParams, c: ChannelParams, xi: complex, chi: complex) -> float:
    return _evaluate(MeasurementKind.ONOFF, p, c, xi, chi)


def corr_parity(p: EcsParams, c: ChannelParams, xi: complex, chi: complex) -> float:
    return _evaluate(MeasurementKind.PARITY, p, c, xi, chi)


def correlation(kind, p: EcsParams, c: ChannelParams, xi: complex, chi: complex) -> float:
    return _evaluate(kind, p, c, xi, chi)


def chsh_from_kernel(kernel, a1, a2, sign, eta1, eta2, x):
    """B = E(x1, x2) + E(x1', x2) + E(x1, x2') - E(x1', x2') over the last axis of ``x``.

    ``x`` has trailing length 8 in the :meth:`MeasurementSettings.to_array`
    layout; leading axes broadcast against the amplitude arrays.
    """
    x = np.asarray(x, dtype=float)
    s1r, s1i, s1pr, s1pi, s2r, s2i, s2pr, s2pi = np.moveaxis(x, -1, 0)

    def e(ar, ai, br, bi):
        return kernel(a1, a2, sign, eta1, eta2, ar, ai, br, bi)

    return (
        e(s1r, s1i, s2r, s2i)
        + e(s1pr, s1pi, s2r, s2i)
        + e(s1r, s1i, s2pr, s2pi)
        - e(s1pr, s1pi, s2pr, s2pi)
    )


def bell_chsh(kind, p: EcsParams, c: ChannelParams, s: MeasurementSettings) -> float:
    """Bell-CHSH combination for the given measurement kind and settings."""
    normalization_factor(p)
    kernel = _KERNELS[MeasurementKind.parse(kind)]
    return float(
        chsh_from_kernel(kernel, p.alpha1, p.alpha2, p.parity.sign, c.eta1, c.eta2, s.to_array())
    )
