"""Multi-start BFGS maximization of the Bell-CHSH function.

The search runs over the eight real displacement coordinates plus zero to
two amplitude coordinates, depending on the amplitude mode:

``fixed``                 amplitudes given
``symmetric_free``        a1 = a2 = bound * sin(u)
``asymmetric_free``       a1 = bound * sin(u1), a2 = bound * sin(u2)
``fixed_nbar``            a1 = a cos(theta), a2 = a sin(theta), a from the mean photon number
``fixed_nbar_symmetric``  a1 = a2 = a / sqrt(2)
``pinned_alpha1``         a1 given, a2 = bound * sin(u)

Amplitudes are allowed to go negative inside the search.  Flipping the sign
of one mode's amplitude is the same as flipping that mode's displacements,
so reported optima are folded back to nonnegative amplitudes.

Landscape notes: the purely real and purely imaginary displacement
subspaces are invariant under the gradient flow and hold narrow basins
(on-off optima are real, parity optima mostly imaginary), so a third of the
start set is seeded in each of them.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .correlators import (
    MeasurementKind,
    MeasurementSettings,
    chsh_from_kernel,
    onoff_kernel,
    parity_kernel,
)
from .errors import NoConvergence, OutOfRange
from .states import ChannelParams, EcsParams, Parity, invert_mean_photon_number

__all__ = [
    "AMPLITUDE_MODES",
    "CIRELSON",
    "OptimizationProblem",
    "OptResult",
    "maximize_bell",
    "numerical_gradient",
    "NbarPoint",
    "sweep_nbar",
    "AmplitudeGrid",
    "sweep_amplitude_grid",
]

AMPLITUDE_MODES = (
    "fixed",
    "symmetric_free",
    "asymmetric_free",
    "fixed_nbar",
    "fixed_nbar_symmetric",
    "pinned_alpha1",
)
CIRELSON = 2.0 * math.sqrt(2.0)
CONVERGED_GRADIENT = 1e-6
DISPLACEMENT_BOX = 2.0
SMALL_BOX = 0.5
SCREEN_SIZE = 4096
SCREEN_STEPS = 40
_KERNELS = {MeasurementKind.ONOFF: onoff_kernel, MeasurementKind.PARITY: parity_kernel}


@dataclass(frozen=True)
class OptimizationProblem:
    kind: MeasurementKind
    parity: Parity
    channel: ChannelParams = field(default_factory=ChannelParams.lossless)
    amplitudes: str = "asymmetric_free"
    alpha1: float | None = None
    alpha2: float | None = None
    nbar: float | None = None
    bound: float = 4.0
    starts: int = 64
    gtol: float = 1e-9
    maxiter: int = 500

    def __post_init__(self):
        object.__setattr__(self, "kind", MeasurementKind.parse(self.kind))
        object.__setattr__(self, "parity", Parity.parse(self.parity))
        if self.amplitudes not in AMPLITUDE_MODES:
            raise ValueError(f"unknown amplitude mode {self.amplitudes!r}")
        if not self.bound > 0:
            raise OutOfRange("amplitude bound must be positive")
        if self.starts < 1:
            raise OutOfRange("need at least one start")
        if self.amplitudes == "fixed":
            if self.alpha1 is None or self.alpha2 is None:
                raise ValueError("fixed amplitudes need alpha1 and alpha2")
            EcsParams(self.alpha1, self.alpha2, self.parity)
        if self.amplitudes == "pinned_alpha1" and (self.alpha1 is None or self.alpha1 < 0):
            raise ValueError("pinned_alpha1 needs a nonnegative alpha1")
        if self.amplitudes in ("fixed_nbar", "fixed_nbar_symmetric"):
            if self.nbar is None:
                raise ValueError(f"{self.amplitudes} needs nbar")
            floor = 0.0 if self.parity is Parity.EVEN else 1.0
            if not self.nbar > floor:
                raise OutOfRange(
                    f"nbar={self.nbar} outside the feasible range (> {floor}) for this parity"
                )

    @property
    def n_amplitude_coords(self) -> int:
        return {"symmetric_free": 1, "asymmetric_free": 2, "fixed_nbar": 1, "pinned_alpha1": 1}.get(
            self.amplitudes, 0
        )

    @property
    def alpha_total(self) -> float | None:
        if self.nbar is None:
            return None
        return invert_mean_photon_number(self.nbar, self.parity)


@dataclass(frozen=True)
class OptResult:
    value: float
    settings: MeasurementSettings
    alpha1: float
    alpha2: float
    starts_converged: int
    best_start_index: int
    gradient_norm: float
    sign: int = 1
    coords: np.ndarray | None = field(default=None, repr=False, compare=False)


class _Objective:
    """Vectorized signed CHSH value over optimizer coordinates."""

    def __init__(self, prob: OptimizationProblem):
        self.prob = prob
        self.kernel = _KERNELS[prob.kind]
        self.dim = 8 + prob.n_amplitude_coords
        self.alpha = prob.alpha_total

    def amplitudes(self, x):
        p = self.prob
        x = np.asarray(x, dtype=float)
        mode = p.amplitudes
        if mode == "fixed":
            return np.full(x.shape[:-1], p.alpha1), np.full(x.shape[:-1], p.alpha2)
        if mode == "fixed_nbar_symmetric":
            a = np.full(x.shape[:-1], self.alpha / math.sqrt(2.0))
            return a, a
        if mode == "symmetric_free":
            a = p.bound * np.sin(x[..., 8])
            return a, a
        if mode == "asymmetric_free":
            return p.bound * np.sin(x[..., 8]), p.bound * np.sin(x[..., 9])
        if mode == "fixed_nbar":
            return self.alpha * np.cos(x[..., 8]), self.alpha * np.sin(x[..., 8])
        return np.full(x.shape[:-1], p.alpha1), p.bound * np.sin(x[..., 8])

    def encode_amplitudes(self, a1: float, a2: float) -> list[float]:
        p = self.prob
        mode = p.amplitudes
        clip = lambda a: math.asin(max(-1.0, min(1.0, a / p.bound)))  # noqa: E731
        if mode == "symmetric_free":
            return [clip(0.5 * (a1 + a2))]
        if mode == "asymmetric_free":
            return [clip(a1), clip(a2)]
        if mode == "fixed_nbar":
            return [math.atan2(a2, a1)]
        if mode == "pinned_alpha1":
            return [clip(a2)]
        return []

    def bell(self, x):
        x = np.asarray(x, dtype=float)
        a1, a2 = self.amplitudes(x)
        ch = self.prob.channel
        return chsh_from_kernel(
            self.kernel, a1, a2, self.prob.parity.sign, ch.eta1, ch.eta2, x[..., :8]
        )


def numerical_gradient(func, x, step_scale: float = 1e-6):
    """Central-difference gradient of a batch-evaluable scalar function.

    ``func`` maps an ``(m, d)`` array to ``m`` values; the step along
    coordinate ``i`` is ``step_scale * max(1, |x_i|)``.  Returns ``(f(x), grad)``.
    """
    x = np.asarray(x, dtype=float)
    d = x.size
    h = step_scale * np.maximum(1.0, np.abs(x))
    pts = np.repeat(x[None, :], 2 * d + 1, axis=0)
    idx = np.arange(d)
    pts[1 + idx, idx] += h
    pts[1 + d + idx, idx] -= h
    vals = func(pts)
    return vals[0], (vals[1 : d + 1] - vals[d + 1 :]) / (2.0 * h)


def _candidate_points(obj: _Objective, count: int, skip: int = 0) -> np.ndarray:
    prob = obj.prob
    d = obj.dim
    # four extra Halton coordinates pick real or imaginary axes in mixed starts
    raw = qmc.Halton(d=d + 4, scramble=False).random(skip + count + 1)[skip + 1 :]
    hi_amp = min(prob.bound, 2.5)
    pts = np.empty((count, d))
    for k, u in enumerate(raw):
        x = pts[k]
        # alternate the full box with a small one; many optima sit at |xi| < 0.5
        box = DISPLACEMENT_BOX if (k // 4) % 2 == 0 else SMALL_BOX
        x[:8] = box * (2.0 * u[:8] - 1.0)
        subspace = k % 4
        if subspace == 0:
            x[1:8:2] = 0.0  # real displacements
        elif subspace == 1:
            x[0:8:2] = 0.0  # imaginary displacements
        elif subspace == 2:
            # each displacement on its own axis, e.g. xi1 imaginary and the rest real
            for j in range(4):
                x[2 * j + (1 if u[d + j] < 0.5 else 0)] = 0.0
        if d > 8:
            if prob.amplitudes == "fixed_nbar":
                x[8] = 0.5 * math.pi * u[8]
            else:
                for j in range(8, d):
                    x[j] = math.asin((0.05 + (hi_amp - 0.05) * u[j]) / prob.bound)
    return pts


def _batch_ascent(obj: _Objective, pool: np.ndarray, steps: int, rate: float = 0.05) -> np.ndarray:
    """A few Adam steps on every pool point at once, each toward larger |B|.

    Cheap next to BFGS, and it lets the screen rank basins rather than raw
    start values: near the classical bound most raw points score about 2.
    """
    if steps <= 0:
        return pool
    x = np.array(pool, dtype=float)
    n, d = x.shape
    h = 1e-6
    eye = h * np.eye(d)
    direction = np.sign(obj.bell(x))
    direction[direction == 0] = 1.0
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    b1, b2 = 0.9, 0.999
    for t in range(1, steps + 1):
        probe = np.concatenate([x[:, None, :] + eye, x[:, None, :] - eye], axis=1)
        vals = obj.bell(probe)
        grad = direction[:, None] * (vals[:, :d] - vals[:, d:]) / (2.0 * h)
        grad[~np.isfinite(grad)] = 0.0
        m = b1 * m + (1 - b1) * grad
        v = b2 * v + (1 - b2) * grad * grad
        x += rate * (m / (1 - b1**t)) / (np.sqrt(v / (1 - b2**t)) + 1e-12)
    return x


def _start_points(obj: _Objective, count: int) -> list[np.ndarray]:
    """Deterministic start set.

    Half the starts are the leading points of a Halton sequence; the other
    half are the best-scoring (by |B|) of a much larger Halton screen after a
    short batched ascent.
    """
    prob = obj.prob
    d = obj.dim
    n_plain = (count + 1) // 2
    starts = list(_candidate_points(obj, n_plain))
    n_screened = count - n_plain
    if n_screened:
        pool = _candidate_points(obj, min(SCREEN_SIZE, 128 * n_screened), skip=n_plain)
        pool = _batch_ascent(obj, pool, SCREEN_STEPS)
        score = np.abs(obj.bell(pool))
        score[~np.isfinite(score)] = -np.inf
        order = np.argsort(-score, kind="stable")
        starts += list(pool[order[:n_screened]])
    # mirrored patterns xi2 = +/- xi1, xi2' = +/- xi1' on each axis
    amp_mid = obj.encode_amplitudes(0.8, 0.8) if prob.amplitudes != "fixed_nbar" else [math.pi / 4]
    for axis in (0, 1):
        for mirror in (1.0, -1.0):
            x = np.zeros(d)
            x[axis + 0], x[axis + 2] = -0.25, 0.75
            x[axis + 4], x[axis + 6] = -0.25 * mirror, 0.75 * mirror
            x[8:] = amp_mid
            starts.append(x)
    return starts


def _ascend(obj: _Objective, x0: np.ndarray, sign: float, prob: OptimizationProblem):
    def fg(x):
        val, grad = numerical_gradient(obj.bell, x)
        return -sign * val, -sign * grad

    res = minimize(
        fg, x0, jac=True, method="BFGS", options={"gtol": prob.gtol, "maxiter": prob.maxiter}
    )
    val, grad = numerical_gradient(obj.bell, res.x)
    return res.x, float(sign * val), float(np.linalg.norm(grad))


def _fold(obj: _Objective, x: np.ndarray):
    a1, a2 = (float(v) for v in obj.amplitudes(x))
    disp = np.array(x[:8], dtype=float)
    if a1 < 0:
        a1 = -a1
        disp[0:4] *= -1.0
    if a2 < 0:
        a2 = -a2
        disp[4:8] *= -1.0
    return a1, a2, MeasurementSettings.from_array(disp)


def _extra_start(obj: _Objective, guess) -> np.ndarray:
    settings, a1, a2 = guess
    return np.concatenate([settings.to_array(), obj.encode_amplitudes(a1, a2)])


def maximize_bell(prob: OptimizationProblem, extra_starts=()) -> OptResult:
    """Largest |B| found by BFGS ascents from a deterministic start set.

    Each start is ascended on ``B`` and on ``-B``; ties go to the lowest
    start index.  ``extra_starts`` holds ``(settings, alpha1, alpha2)`` guesses
    (e.g. a neighboring sweep point) appended after the built-in starts.

    Raises :class:`NoConvergence` when no ascent reaches a gradient norm
    below 1e-6.
    """
    obj = _Objective(prob)
    starts = _start_points(obj, prob.starts)
    starts += [_extra_start(obj, g) for g in extra_starts]

    best = None
    converged = 0
    for index, x0 in enumerate(starts):
        start_ok = False
        for sign in (1.0, -1.0):
            x, value, gnorm = _ascend(obj, x0, sign, prob)
            ok = gnorm < CONVERGED_GRADIENT and np.isfinite(value)
            start_ok |= ok
            if ok and (best is None or value > best[0]):
                best = (value, x, gnorm, index, int(sign))
        converged += start_ok
    if best is None:
        raise NoConvergence(f"none of {len(starts)} starts converged")
    value, x, gnorm, index, sign = best
    a1, a2, settings = _fold(obj, x)
    return OptResult(
        value=value,
        settings=settings,
        alpha1=a1,
        alpha2=a2,
        starts_converged=converged,
        best_start_index=index,
        gradient_norm=gnorm,
        sign=sign,
        coords=np.array(x),
    )


def _guess(res: OptResult | None):
    if res is None:
        return ()
    return ((res.settings, res.alpha1, res.alpha2),)


@dataclass
class NbarPoint:
    nbar: float
    symmetric: OptResult | None = None
    asymmetric: OptResult | None = None
    errors: list = field(default_factory=list)

    @property
    def gap(self) -> float:
        if self.symmetric is None or self.asymmetric is None:
            return float("nan")
        return self.asymmetric.value - self.symmetric.value


def sweep_nbar(template: OptimizationProblem, nbar_grid, modes=("symmetric", "asymmetric")):
    """Optimized |B| at fixed mean photon number, symmetric vs asymmetric ECS.

    Each point also starts from the previous point's optimum.  Failures are
    recorded on the point and the sweep continues.
    """
    mode_map = {"symmetric": "fixed_nbar_symmetric", "asymmetric": "fixed_nbar"}
    rows = []
    previous = {m: None for m in modes}
    for nbar in nbar_grid:
        point = NbarPoint(float(nbar))
        for m in modes:
            prob = replace(template, amplitudes=mode_map[m], nbar=float(nbar))
            try:
                res = maximize_bell(prob, extra_starts=_guess(previous[m]))
            except (NoConvergence, OutOfRange, ValueError) as exc:
                point.errors.append(f"{m}: {exc}")
                continue
            # the symmetric optimum is always a feasible asymmetric point
            if m == "asymmetric" and point.symmetric is not None and point.symmetric.value > res.value:
                res = maximize_bell(prob, extra_starts=_guess(point.symmetric) + _guess(previous[m]))
            setattr(point, m, res)
            previous[m] = res
        rows.append(point)
    return rows


@dataclass
class AmplitudeGrid:
    alpha1_grid: np.ndarray
    alpha2_grid: np.ndarray
    values: np.ndarray  # values[i, j] at (alpha1_grid[i], alpha2_grid[j])
    results: list
    ridge: list  # (alpha_total, alpha1, alpha2, value) per ring

    def value_at(self, a1: float, a2: float) -> float:
        i = int(np.argmin(np.abs(self.alpha1_grid - a1)))
        j = int(np.argmin(np.abs(self.alpha2_grid - a2)))
        return float(self.values[i, j])


def _grid_row(args):
    template, a1, alpha2_grid = args
    row, prev = [], None
    for a2 in alpha2_grid:
        if template.parity is Parity.ODD and a1 == 0 and a2 == 0:
            row.append(None)
            continue
        prob = replace(template, amplitudes="fixed", alpha1=float(a1), alpha2=float(a2))
        try:
            res = maximize_bell(prob, extra_starts=_guess(prev))
        except NoConvergence:
            res = None
        row.append(res)
        prev = res if res is not None else prev
    return row


def ridge_line(alpha1_grid, alpha2_grid, values):
    """Per-ring argmax of a grid over rings of constant a1^2 + a2^2.

    Rings have the width of the coarser grid step.  Ties prefer the
    representative with a1 >= a2.
    """
    a1g = np.asarray(alpha1_grid, dtype=float)
    a2g = np.asarray(alpha2_grid, dtype=float)
    steps = [np.min(np.diff(g)) for g in (a1g, a2g) if g.size > 1]
    width = max(steps) if steps else 1.0
    A1, A2 = np.meshgrid(a1g, a2g, indexing="ij")
    radius = np.hypot(A1, A2)
    rings = np.floor(radius / width + 0.5).astype(int)
    ridge = []
    for ring in np.unique(rings):
        mask = (rings == ring) & np.isfinite(values)
        if not mask.any():
            continue
        cand = np.argwhere(mask)
        best = None
        for i, j in cand:
            key = (values[i, j], a1g[i] >= a2g[j], -i, -j)
            if best is None or key > best[0]:
                best = (key, i, j)
        _, i, j = best
        ridge.append((float(radius[i, j]), float(a1g[i]), float(a2g[j]), float(values[i, j])))
    return ridge


def sweep_amplitude_grid(
    kind, parity, channel: ChannelParams, alpha1_grid, alpha2_grid, starts: int = 64, workers: int = 1
) -> AmplitudeGrid:
    """Optimize the displacements at every (alpha1, alpha2) grid cell."""
    template = OptimizationProblem(kind, parity, channel, amplitudes="asymmetric_free", starts=starts)
    a1g = np.asarray(alpha1_grid, dtype=float)
    a2g = np.asarray(alpha2_grid, dtype=float)
    jobs = [(template, a1, a2g) for a1 in a1g]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_grid_row, jobs))
    else:
        rows = [_grid_row(job) for job in jobs]
    values = np.array([[np.nan if r is None else r.value for r in row] for row in rows])
    return AmplitudeGrid(a1g, a2g, values, rows, ridge_line(a1g, a2g, values))
