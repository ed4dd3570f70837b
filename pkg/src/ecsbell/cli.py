"""Command-line entry point: ``ecs-bell {optimize,sweep,figure,validate}``.

Options may also come from a ``--config`` file of ``key = value`` lines
(``#`` starts a comment); flags given on the command line win.  Exit codes:
0 success, 1 anchor or validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import dataset
from .correlators import MeasurementKind
from .errors import EcsBellError, UnknownScenario, UsageError
from .optimizer import OptimizationProblem, OptResult, maximize_bell
from .scenarios import (
    SCENARIOS,
    ScenarioSpec,
    oracle_suite,
    run_scenario,
)
from .states import ChannelParams, Parity, strategy_channel

COMMANDS = ("optimize", "sweep", "figure", "validate")
SWEEP_PARAMETERS = ("nbar", "r", "eta1", "eta2", "alpha1", "alpha2")
RESULT_COLUMNS = ["bell_max", "alpha1", "alpha2"] + dataset.SETTINGS_COLUMNS


@dataclass
class RunConfig:
    command: str
    id: str | None = None
    out: str | None = None
    workers: int = 1
    starts: int | None = None
    oracle_dim: int | None = None
    kind: str = "onoff"
    parity: str = "odd"
    eta1: float | None = None
    eta2: float | None = None
    strategy: str | None = None
    r: float | None = None
    nbar: float | None = None
    amplitudes: str = "asymmetric"
    alpha1: float | None = None
    alpha2: float | None = None
    points: int | None = None
    over: str | None = None
    grid: str | None = None
    gtol: float = 1e-9


_CONVERTERS = {
    "workers": int, "starts": int, "oracle_dim": int, "points": int,
    "eta1": float, "eta2": float, "r": float, "nbar": float,
    "alpha1": float, "alpha2": float, "gtol": float,
}
_CHOICES = {
    "kind": ("onoff", "parity"),
    "parity": ("even", "odd"),
    "strategy": ("A", "B"),
    "amplitudes": ("fixed", "symmetric", "asymmetric"),
    "over": SWEEP_PARAMETERS,
}
CONFIG_KEYS = tuple(f.name for f in fields(RunConfig) if f.name != "command")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ecs-bell", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="file of key = value lines")
    parser.add_argument("--id", help="scenario id for `figure`")
    parser.add_argument("--out", help="CSV output path")
    parser.add_argument("--workers", help="parallel worker processes (default $ECS_BELL_WORKERS or 1)")
    parser.add_argument("--starts", help="optimizer start count")
    parser.add_argument("--oracle-dim", dest="oracle_dim", help="Fock truncation for `validate`")
    parser.add_argument("--kind")
    parser.add_argument("--parity")
    parser.add_argument("--eta1")
    parser.add_argument("--eta2")
    parser.add_argument("--strategy")
    parser.add_argument("--r")
    parser.add_argument("--nbar")
    parser.add_argument("--amplitudes")
    parser.add_argument("--alpha1")
    parser.add_argument("--alpha2")
    parser.add_argument("--points", help="grid points per axis for `figure`")
    parser.add_argument("--over", help="swept parameter for `sweep`")
    parser.add_argument("--grid", help="lo,hi,n for `sweep`")
    parser.add_argument("--gtol", help="BFGS gradient tolerance")
    return parser


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; unknown keys raise :class:`UsageError`."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected `key = value`, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _convert(key: str, value):
    if value is None:
        return None
    conv = _CONVERTERS.get(key)
    if conv is not None:
        try:
            return conv(value)
        except ValueError:
            raise UsageError(f"--{key.replace('_', '-')}: invalid value {value!r}") from None
    value = str(value)
    choices = _CHOICES.get(key)
    if choices is not None:
        if key == "strategy":
            value = value.upper()
        elif key != "over":
            value = value.lower()
        if value not in choices:
            raise UsageError(f"--{key}: expected one of {', '.join(choices)}, got {value!r}")
    return value


def parse_config(argv=None, environ=None) -> RunConfig:
    """Merge defaults, ``ECS_BELL_WORKERS``, the config file and the flags, in that order."""
    environ = os.environ if environ is None else environ
    args = _build_parser().parse_args(argv)
    merged = {}
    if environ.get("ECS_BELL_WORKERS"):
        merged["workers"] = environ["ECS_BELL_WORKERS"]
    if args.config:
        merged.update(read_config_file(args.config))
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    cfg = RunConfig(args.command, **{k: _convert(k, v) for k, v in merged.items()})
    _check(cfg)
    return cfg


def _check(cfg: RunConfig) -> None:
    if cfg.workers < 1:
        raise UsageError("workers must be >= 1")
    if cfg.starts is not None and cfg.starts < 1:
        raise UsageError("starts must be >= 1")
    if cfg.points is not None and cfg.points < 1:
        raise UsageError("points must be >= 1")
    if cfg.oracle_dim is not None and cfg.oracle_dim < 8:
        raise UsageError("oracle-dim must be >= 8")
    if cfg.command == "figure" and not cfg.id:
        raise UsageError("figure requires --id")
    if cfg.strategy is not None and (cfg.eta1 is not None or cfg.eta2 is not None):
        raise UsageError("give either --strategy/--r or --eta1/--eta2, not both")
    if (cfg.strategy is None) != (cfg.r is None) and cfg.command == "optimize":
        raise UsageError("--strategy and --r go together")
    if cfg.command == "sweep" and (cfg.over is None or cfg.grid is None):
        raise UsageError("sweep requires --over and --grid lo,hi,n")
    if cfg.command == "sweep" and cfg.over == "r" and cfg.strategy is None:
        raise UsageError("sweeping r needs --strategy")
    if cfg.command == "sweep" and cfg.over in ("eta1", "eta2") and cfg.strategy is not None:
        raise UsageError("sweeping an efficiency excludes --strategy")


def _channel(cfg: RunConfig, r=None, eta1=None, eta2=None) -> ChannelParams:
    if cfg.strategy is not None:
        return strategy_channel(cfg.strategy, cfg.r if r is None else r)
    e1 = cfg.eta1 if eta1 is None else eta1
    e2 = cfg.eta2 if eta2 is None else eta2
    return ChannelParams(1.0 if e1 is None else e1, 1.0 if e2 is None else e2)


def build_problem(cfg: RunConfig, **override) -> OptimizationProblem:
    """Translate the amplitude flags into an optimizer amplitude mode."""
    values = {k: getattr(cfg, k) for k in ("nbar", "alpha1", "alpha2")}
    values.update({k: v for k, v in override.items() if k in values})
    nbar, a1, a2 = values["nbar"], values["alpha1"], values["alpha2"]
    channel = _channel(cfg, **{k: v for k, v in override.items() if k in ("r", "eta1", "eta2")})
    kw = dict(starts=cfg.starts or 64, gtol=cfg.gtol)
    if cfg.amplitudes == "fixed":
        if nbar is not None:
            raise UsageError("--amplitudes fixed takes --alpha1/--alpha2, not --nbar")
        if a1 is None or a2 is None:
            raise UsageError("--amplitudes fixed needs --alpha1 and --alpha2")
        mode, kw["alpha1"], kw["alpha2"] = "fixed", a1, a2
    elif cfg.amplitudes == "symmetric":
        mode = "symmetric_free" if nbar is None else "fixed_nbar_symmetric"
    else:
        if nbar is not None:
            mode = "fixed_nbar"
        elif a1 is not None:
            mode, kw["alpha1"] = "pinned_alpha1", a1
        else:
            mode = "asymmetric_free"
    if mode.startswith("fixed_nbar"):
        kw["nbar"] = nbar
    return OptimizationProblem(cfg.kind, cfg.parity, channel, amplitudes=mode, **kw)


def _result_row(res: OptResult) -> list:
    return [res.value, res.alpha1, res.alpha2] + dataset.settings_fields(res.settings)


def format_result(res: OptResult) -> str:
    s = res.settings
    lines = [
        f"bell_max        {res.value:.12g}",
        f"alpha1          {res.alpha1:.12g}",
        f"alpha2          {res.alpha2:.12g}",
    ]
    for name in ("xi1", "xi1p", "xi2", "xi2p"):
        z = getattr(s, name)
        lines.append(f"{name:<15} {z.real:.12g} {z.imag:+.12g}j")
    lines += [
        f"sign            {res.sign:+d}",
        f"gradient_norm   {res.gradient_norm:.3g}",
        f"starts          {res.starts_converged} converged, best from start {res.best_start_index}",
    ]
    return "\n".join(lines)


def _optimize(cfg: RunConfig, out) -> int:
    res = maximize_bell(build_problem(cfg))
    print(format_result(res), file=out)
    if cfg.out:
        dataset.write_csv(cfg.out, RESULT_COLUMNS, [_result_row(res)])
    return 0


def _parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, n = text.split(",")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise UsageError(f"--grid expects lo,hi,n; got {text!r}") from None
    if n < 1:
        raise UsageError("--grid needs n >= 1")
    return np.linspace(lo, hi, n)


def _sweep(cfg: RunConfig, out) -> int:
    grid = _parse_grid(cfg.grid)
    rows, prev = [], ()
    for value in grid:
        prob = build_problem(cfg, **{cfg.over: float(value)})
        res = maximize_bell(prob, extra_starts=prev)
        prev = ((res.settings, res.alpha1, res.alpha2),)
        rows.append([value] + _result_row(res))
        print(f"{cfg.over}={value:.6g}  bell_max={res.value:.6f}", file=out)
    if cfg.out:
        dataset.write_csv(cfg.out, [cfg.over] + RESULT_COLUMNS, dataset.sort_rows(rows, 1))
    else:
        out.write(dataset.to_csv([cfg.over] + RESULT_COLUMNS, rows))
    return 0


def _figure(cfg: RunConfig, out) -> int:
    if cfg.id not in SCENARIOS:
        raise UnknownScenario(cfg.id)
    path = cfg.out or f"{cfg.id}.csv"
    spec = ScenarioSpec(cfg.id, points=cfg.points, starts=cfg.starts, workers=cfg.workers, out=path)
    report = run_scenario(spec)
    print(report.describe(), file=out)
    print(f"wrote {path}", file=out)
    return 0 if report.passed else 1


def _validate(cfg: RunConfig, out) -> int:
    suite = oracle_suite(dim=cfg.oracle_dim)
    ok = suite["max_deviation"] < 1e-8 and suite["max_refinement_change"] < 1e-9
    print(
        f"oracle equivalence: {suite['points']} points, max closed-form vs oracle deviation "
        f"{suite['max_deviation']:.3g}, dimension refinement change {suite['max_refinement_change']:.3g}"
        f"  {'PASS' if ok else 'FAIL'}",
        file=out,
    )
    report = run_scenario(ScenarioSpec("appendixB", starts=cfg.starts, workers=cfg.workers, out=cfg.out))
    print(report.describe(), file=out)
    return 0 if ok and report.passed else 1


_HANDLERS = {"optimize": _optimize, "sweep": _sweep, "figure": _figure, "validate": _validate}


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        cfg = parse_config(argv)
        return _HANDLERS[cfg.command](cfg, out)
    except UnknownScenario as exc:
        known = ", ".join(SCENARIOS)
        print(f"ecs-bell: unknown scenario {exc.args[0]!r} (known: {known})", file=err)
        return 2
    except UsageError as exc:
        print(f"ecs-bell: {exc}", file=err)
        return 2
    except EcsBellError as exc:
        # domain errors from user-supplied numbers are usage problems
        if isinstance(exc, ValueError):
            print(f"ecs-bell: {exc}", file=err)
            return 2
        print(f"ecs-bell: {type(exc).__name__}: {exc}", file=err)
        return 1


if __name__ == "__main__":
    sys.exit(main())
