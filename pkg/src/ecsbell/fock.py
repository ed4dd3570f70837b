"""Brute-force correlations in a truncated Fock space.

Used only for validation.  Each coherent dyadic of a state is realized as
number-basis vectors, the measurement operator is conjugated by explicit
displacement matrices, and the trace is taken term by term.  Photon loss is
applied with the beam-splitter Kraus operators rather than the analytic
dyadic map, so the loss model is checked as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln, xlogy

from .correlators import MeasurementKind
from .errors import DimensionTooSmall, NonHermitianResult
from .states import (
    ChannelParams,
    DyadicMixture,
    EcsParams,
    lossy_ecs_state,
)

__all__ = [
    "FockVector",
    "TAIL_TOLERANCE",
    "coherent_amplitudes",
    "displacement_matrix",
    "measurement_matrix",
    "loss_kraus_operators",
    "apply_loss",
    "oracle_dimension",
    "oracle_correlation",
    "realize_density_matrix",
    "fock_trace",
]

TAIL_TOLERANCE = 1e-9


@dataclass(frozen=True)
class FockVector:
    amplitudes: np.ndarray
    tail_mass: float

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


def _coherent_raw(alpha: complex, dim: int) -> np.ndarray:
    out = np.empty(dim, dtype=complex)
    out[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for k in range(1, dim):
        out[k] = out[k - 1] * alpha / math.sqrt(k)
    return out


def coherent_amplitudes(alpha: complex, dim: int) -> FockVector:
    """Truncated coherent state; raises if more than 1e-9 of its mass is cut."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    vec = _coherent_raw(complex(alpha), dim)
    tail = max(0.0, 1.0 - float(np.vdot(vec, vec).real))
    if tail > TAIL_TOLERANCE:
        raise DimensionTooSmall(
            f"dim={dim} drops {tail:.3g} of the mass of |{alpha}>"
        )
    return FockVector(vec, tail)


def _ladder(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def displacement_buffer(xi: complex) -> int:
    return 2 * math.ceil(4 * abs(xi)) + 8


@lru_cache(maxsize=256)
def _displacement_cached(xi: complex, dim: int) -> np.ndarray:
    big = dim + displacement_buffer(xi)
    a = _ladder(big)
    gen = xi * a.T - np.conj(xi) * a
    mat = expm(gen)[:dim, :dim]
    mat.setflags(write=False)
    return mat


def displacement_matrix(xi: complex, dim: int) -> np.ndarray:
    """D(xi) = exp(xi a^dagger - conj(xi) a), cropped to ``dim``.

    The exponential is taken in a larger space so the truncation edge sits
    outside the returned block.  Raises :class:`DimensionTooSmall` when the
    displaced vacuum already leaks past ``dim``.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    xi = complex(xi)
    mat = _displacement_cached(xi, dim)
    col = mat[:, 0]
    leak = 1.0 - float(np.vdot(col, col).real)
    if leak > TAIL_TOLERANCE:
        raise DimensionTooSmall(f"dim={dim} too small for displacement {xi}")
    return mat


def measurement_matrix(kind, dim: int) -> np.ndarray:
    """Diagonal +/-1 observable: on-off (-1 on vacuum only) or parity (-1)^n."""
    kind = MeasurementKind.parse(kind)
    if kind is MeasurementKind.ONOFF:
        diag = np.ones(dim)
        diag[0] = -1.0
    else:
        diag = np.where(np.arange(dim) % 2 == 0, 1.0, -1.0)
    return np.diag(diag)


@lru_cache(maxsize=64)
def _kraus_cached(eta: float, dim: int) -> tuple:
    # K_k |n> = sqrt(C(n, k) eta^(n-k) (1-eta)^k) |n-k>
    ops = []
    n = np.arange(dim)
    for k in range(dim if eta < 1.0 else 1):
        m = n[k:]
        log_w = (
            gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1)
            + xlogy(m - k, eta) + xlogy(k, 1.0 - eta)
        )
        kmat = np.zeros((dim, dim))
        kmat[m - k, m] = np.exp(0.5 * log_w)
        ops.append(kmat)
    return tuple(ops)


def loss_kraus_operators(eta: float, dim: int) -> list[np.ndarray]:
    """Kraus operators of a pure-loss channel with intensity transmissivity ``eta``."""
    return list(_kraus_cached(float(eta), int(dim)))


def apply_loss(rho: np.ndarray, eta: float) -> np.ndarray:
    """Single-mode loss channel acting on a number-basis operator."""
    dim = rho.shape[0]
    out = np.zeros_like(rho, dtype=complex)
    for k in loss_kraus_operators(eta, dim):
        out += k @ rho @ k.T
    return out


def _loss_adjoint(obs: np.ndarray, eta: float) -> np.ndarray:
    dim = obs.shape[0]
    out = np.zeros_like(obs, dtype=complex)
    for k in loss_kraus_operators(eta, dim):
        out += k.T @ obs @ k
    return out


def oracle_dimension(p: EcsParams, c: ChannelParams, displacements) -> int:
    """Truncation with Poisson tail below 1e-12 for the largest displaced amplitude."""
    amp = max(math.sqrt(c.eta1) * p.alpha1, math.sqrt(c.eta2) * p.alpha2, p.alpha1, p.alpha2)
    m = amp + max((abs(complex(d)) for d in displacements), default=0.0)
    return max(8, math.ceil(m * m + 10 * m + 15))


def _check_amplitudes(amps, dim):
    for amp in amps:
        coherent_amplitudes(amp, dim)


def _mode_expectation(obs, ket, bra, dim):
    ket_v = _coherent_raw(ket, dim)
    bra_v = _coherent_raw(bra, dim)
    return np.vdot(bra_v, obs @ ket_v)


def oracle_correlation(
    kind,
    p: EcsParams,
    c: ChannelParams,
    xi: complex,
    chi: complex,
    dim: int | None = None,
    order: str = "loss_first",
) -> float:
    """<M1(xi) (x) M2(chi)> evaluated by explicit trace in the number basis.

    ``order="loss_first"`` realizes the analytic lossy mixture and measures
    ``D(xi) M D(xi)^dagger``.  ``order="displace_first"`` starts from the
    lossless ECS, displaces each mode by ``-xi``/``-chi``, applies the loss
    channel through its Kraus operators, and measures ``M`` undisplaced; this
    is the inefficient-detector arrangement.
    """
    kind = MeasurementKind.parse(kind)
    xi, chi = complex(xi), complex(chi)
    if dim is None:
        dim = oracle_dimension(p, c, (xi, chi))
    meas = measurement_matrix(kind, dim)
    d1 = displacement_matrix(xi, dim)
    d2 = displacement_matrix(chi, dim)
    if order == "loss_first":
        state = lossy_ecs_state(p, c)
        obs1 = d1 @ meas @ d1.conj().T
        obs2 = d2 @ meas @ d2.conj().T
    elif order == "displace_first":
        state = lossy_ecs_state(p, ChannelParams.lossless())
        obs1 = d1 @ _loss_adjoint(meas, c.eta1) @ d1.conj().T
        obs2 = d2 @ _loss_adjoint(meas, c.eta2) @ d2.conj().T
    else:
        raise ValueError(f"unknown order {order!r}")
    for term in state:
        _check_amplitudes(
            (term.ket_amp1 - xi, term.bra_amp1 - xi, term.ket_amp2 - chi, term.bra_amp2 - chi), dim
        )
    total = 0j
    for term in state:
        total += (
            term.weight
            * _mode_expectation(obs1, term.ket_amp1, term.bra_amp1, dim)
            * _mode_expectation(obs2, term.ket_amp2, term.bra_amp2, dim)
        )
    if abs(total.imag) > 1e-8:
        raise NonHermitianResult(f"imaginary part {total.imag:.3g} in a real expectation value")
    return float(total.real)


def fock_trace(mixture: DyadicMixture, dim: int) -> complex:
    """Trace of the truncated realization, computed term by term."""
    total = 0j
    for term in mixture:
        total += (
            term.weight
            * np.vdot(_coherent_raw(term.bra_amp1, dim), _coherent_raw(term.ket_amp1, dim))
            * np.vdot(_coherent_raw(term.bra_amp2, dim), _coherent_raw(term.ket_amp2, dim))
        )
    return total


def realize_density_matrix(mixture: DyadicMixture, dim: int) -> np.ndarray:
    """Two-mode density matrix of shape ``(dim**2, dim**2)``; keep ``dim`` modest."""
    rho = np.zeros((dim * dim, dim * dim), dtype=complex)
    for term in mixture:
        ket = np.kron(_coherent_raw(term.ket_amp1, dim), _coherent_raw(term.ket_amp2, dim))
        bra = np.kron(_coherent_raw(term.bra_amp1, dim), _coherent_raw(term.bra_amp2, dim))
        rho += term.weight * np.outer(ket, bra.conj())
    return rho
