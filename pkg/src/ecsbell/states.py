"""Two-mode entangled coherent states and their photon-loss images.

An ECS is ``N (|a1>|a2> +/- |-a1>|-a2>)`` with real, nonnegative
amplitudes.  Sending each mode through a beam splitter of intensity
transmissivity ``eta`` maps every coherent dyadic ``|u><v|`` to
``exp[-(1-eta)(|u|^2 + |v|^2 - 2 u conj(v)) / 2] |sqrt(eta) u><sqrt(eta) v|``,
so the lossy state stays a four-term mixture of coherent dyadics.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from .errors import DegenerateState, OutOfRange

__all__ = [
    "Parity",
    "EcsParams",
    "ChannelParams",
    "CoherentDyadic",
    "DyadicMixture",
    "coherent_overlap",
    "normalization_factor",
    "mean_photon_number",
    "invert_mean_photon_number",
    "lossy_ecs_state",
    "strategy_channel",
]


class Parity(str, enum.Enum):
    """Relative sign of the two branches; even (+) or odd (-) ECS."""

    EVEN = "+"
    ODD = "-"

    @property
    def sign(self) -> int:
        return 1 if self is Parity.EVEN else -1

    @classmethod
    def parse(cls, value) -> "Parity":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("+", "even", "plus", "1", "+1"):
            return cls.EVEN
        if key in ("-", "odd", "minus", "-1"):
            return cls.ODD
        raise ValueError(f"unknown parity {value!r}")

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class EcsParams:
    alpha1: float
    alpha2: float
    parity: Parity = Parity.ODD

    def __post_init__(self):
        object.__setattr__(self, "parity", Parity.parse(self.parity))
        if not (self.alpha1 >= 0 and self.alpha2 >= 0):
            raise OutOfRange(
                f"amplitudes must be nonnegative, got ({self.alpha1}, {self.alpha2})"
            )
        if self.parity is Parity.ODD and self.alpha1 == 0 and self.alpha2 == 0:
            raise DegenerateState("odd ECS vanishes at zero amplitude")

    @property
    def alpha_total(self) -> float:
        return math.hypot(self.alpha1, self.alpha2)

    def swapped(self) -> "EcsParams":
        return EcsParams(self.alpha2, self.alpha1, self.parity)


@dataclass(frozen=True)
class ChannelParams:
    """Per-mode intensity transmissivities; ``eta = 1`` is lossless."""

    eta1: float = 1.0
    eta2: float = 1.0

    def __post_init__(self):
        for name in ("eta1", "eta2"):
            eta = getattr(self, name)
            if not 0.0 <= eta <= 1.0:
                raise OutOfRange(f"{name} must lie in [0, 1], got {eta}")

    @classmethod
    def lossless(cls) -> "ChannelParams":
        return cls(1.0, 1.0)

    def swapped(self) -> "ChannelParams":
        return ChannelParams(self.eta2, self.eta1)


def strategy_channel(strategy: str, r: float) -> ChannelParams:
    """Channel for a distribution strategy at normalized time ``r = 1 - t``.

    Strategy A loses on both modes for time tau, ``(t, t)``.  Strategy B keeps
    mode 1 at the source and sends mode 2 over the full distance, ``(1, t^2)``.
    """
    if not 0.0 <= r <= 1.0:
        raise OutOfRange(f"normalized time must lie in [0, 1], got {r}")
    t = 1.0 - r
    strategy = str(strategy).upper()
    if strategy == "A":
        return ChannelParams(t, t)
    if strategy == "B":
        return ChannelParams(1.0, t * t)
    raise ValueError(f"unknown strategy {strategy!r}; expected 'A' or 'B'")


def coherent_overlap(beta: complex, alpha: complex) -> complex:
    """<beta|alpha> for coherent states."""
    return cmath.exp(
        -0.5 * abs(alpha) ** 2 - 0.5 * abs(beta) ** 2 + beta.conjugate() * alpha
    )


@dataclass(frozen=True)
class CoherentDyadic:
    """``weight * |ket_amp1, ket_amp2><bra_amp1, bra_amp2|``."""

    ket_amp1: complex
    ket_amp2: complex
    bra_amp1: complex
    bra_amp2: complex
    weight: complex

    def trace(self) -> complex:
        return (
            self.weight
            * coherent_overlap(self.bra_amp1, self.ket_amp1)
            * coherent_overlap(self.bra_amp2, self.ket_amp2)
        )

    def adjoint(self) -> "CoherentDyadic":
        return CoherentDyadic(
            self.bra_amp1, self.bra_amp2, self.ket_amp1, self.ket_amp2,
            self.weight.conjugate(),
        )

    def swapped(self) -> "CoherentDyadic":
        return CoherentDyadic(
            self.ket_amp2, self.ket_amp1, self.bra_amp2, self.bra_amp1, self.weight
        )

    def isclose(self, other: "CoherentDyadic", tol: float = 1e-12) -> bool:
        pairs = zip(
            (self.ket_amp1, self.ket_amp2, self.bra_amp1, self.bra_amp2, self.weight),
            (other.ket_amp1, other.ket_amp2, other.bra_amp1, other.bra_amp2, other.weight),
        )
        return all(abs(a - b) <= tol for a, b in pairs)


@dataclass(frozen=True)
class DyadicMixture:
    terms: tuple[CoherentDyadic, ...]

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def trace(self) -> complex:
        return sum((term.trace() for term in self.terms), 0j)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        for term in self.terms:
            adj = term.adjoint()
            if not any(adj.isclose(other, tol) for other in self.terms):
                return False
        return True

    def swapped(self) -> "DyadicMixture":
        return DyadicMixture(tuple(term.swapped() for term in self.terms))

    def max_amplitude(self) -> float:
        return max(
            max(abs(t.ket_amp1), abs(t.ket_amp2), abs(t.bra_amp1), abs(t.bra_amp2))
            for t in self.terms
        )


def _norm_sq_denominator(alpha_sq_total: float, parity: Parity) -> float:
    # 2 +/- 2 exp(-2 A), written with expm1 so the odd branch keeps precision near A = 0
    if parity is Parity.EVEN:
        return 2.0 + 2.0 * math.exp(-2.0 * alpha_sq_total)
    return -2.0 * math.expm1(-2.0 * alpha_sq_total)


def normalization_factor(p: EcsParams) -> float:
    """N = [2 +/- 2 exp(-2 a1^2 - 2 a2^2)]^(-1/2)."""
    denom = _norm_sq_denominator(p.alpha1**2 + p.alpha2**2, p.parity)
    if denom <= 0.0:
        raise DegenerateState("odd ECS vanishes at zero amplitude")
    return denom**-0.5


def mean_photon_number(alpha_total: float, parity) -> float:
    """Mean total photon number of an ECS with ``alpha^2 = a1^2 + a2^2``.

    Even: ``x tanh x``; odd: ``x coth x`` with ``x = alpha^2``.  The odd branch
    returns its limit 1 at zero amplitude.
    """
    parity = Parity.parse(parity)
    if alpha_total < 0:
        raise OutOfRange(f"alpha_total must be nonnegative, got {alpha_total}")
    x = alpha_total * alpha_total
    if parity is Parity.EVEN:
        return x * math.tanh(x)
    if x == 0.0:
        return 1.0
    return x / math.tanh(x)


def invert_mean_photon_number(nbar: float, parity) -> float:
    """Amplitude ``alpha >= 0`` whose ECS has mean photon number ``nbar``."""
    parity = Parity.parse(parity)
    floor = 0.0 if parity is Parity.EVEN else 1.0
    if not nbar >= floor:
        raise OutOfRange(
            f"mean photon number {nbar} below the {parity.name.lower()} ECS minimum {floor}"
        )
    if nbar == floor:
        return 0.0
    lo, hi = 0.0, max(4.0, math.sqrt(nbar) + 2.0)
    while True:
        mid = 0.5 * (lo + hi)
        val = mean_photon_number(mid, parity)
        if abs(val - nbar) <= 1e-12 or hi - lo <= 4 * math.ulp(hi):
            return mid
        if val < nbar:
            lo = mid
        else:
            hi = mid


def lossy_ecs_state(p: EcsParams, c: ChannelParams) -> DyadicMixture:
    """ECS after independent beam-splitter loss on each mode.

    Returns the diagonal dyadics ``|+-s1 a1, +-s2 a2><same|`` with weight ``N^2``
    and the two cross dyadics with weight
    ``+/- N^2 exp(-2[(1-eta1) a1^2 + (1-eta2) a2^2])``, where ``s_i = sqrt(eta_i)``.
    """
    n_sq = normalization_factor(p) ** 2
    u1 = math.sqrt(c.eta1) * p.alpha1
    u2 = math.sqrt(c.eta2) * p.alpha2
    damping = math.exp(
        -2.0 * ((1.0 - c.eta1) * p.alpha1**2 + (1.0 - c.eta2) * p.alpha2**2)
    )
    diag = complex(n_sq)
    cross = complex(p.parity.sign * n_sq * damping)
    plus, minus = (complex(u1), complex(u2)), (complex(-u1), complex(-u2))
    return DyadicMixture(
        (
            CoherentDyadic(*plus, *plus, diag),
            CoherentDyadic(*plus, *minus, cross),
            CoherentDyadic(*minus, *plus, cross),
            CoherentDyadic(*minus, *minus, diag),
        )
    )
