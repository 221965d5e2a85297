"""Command-line front end: threshold curves, witness decisions, sweeps.

Subcommands:

* ``qng threshold`` samples the Gaussian-attainable boundary for one
  criterion order and writes it (plus the small-error asymptote) to disk,
* ``qng witness`` tests one click pair or an ensemble parameter file,
* ``qng sweep`` maps detectability thresholds over parameter grids
  (eta, noise, loss, duration).

Outputs are CSV (``#``-prefixed metadata lines, header row, data rows) or
JSON (metadata object plus column arrays).  Runs are deterministic:
repeating a command with the same inputs and seed reproduces the output
byte for byte.  The environment variable QNG_THREADS bounds the sweep
worker count.

Exit status: 0 on success, 1 on computation failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from . import __version__
from .criteria import (
    asymptotic_success_bound,
    default_a_grid,
    threshold_curve,
    witness,
)
from .detector import DetectorConfig, load_detector_config
from .source import (
    EnsembleParams,
    load_ensemble_params,
    max_duration_analytic,
    max_measurement_duration,
    max_tolerated_loss,
    min_detectable_efficiency,
    min_efficiency_analytic,
    loss_tolerance_analytic,
    source_click_stats,
)

import numpy as np


class UsageError(Exception):
    """Bad arguments or unparseable input files (exit status 2)."""


@dataclass
class ResultTable:
    """Rectangular result set with reproducibility metadata."""

    columns: Tuple[str, ...]
    rows: List[tuple]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("rows must match the column count")

    def write(self, path, fmt: str) -> None:
        if fmt == "csv":
            self._write_csv(path)
        elif fmt == "json":
            self._write_json(path)
        else:
            raise UsageError(f"unknown format {fmt!r}")

    def _write_csv(self, path) -> None:
        lines = [f"# {key}: {_meta_str(value)}" for key, value in self.metadata.items()]
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_cell_str(x) for x in row))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def _write_json(self, path) -> None:
        payload = {
            "metadata": self.metadata,
            "columns": list(self.columns),
            "data": {
                name: [_jsonable(row[i]) for row in self.rows]
                for i, name in enumerate(self.columns)
            },
        }
        Path(path).write_text(
            json.dumps(payload, indent=2, sort_keys=False) + "\n", encoding="utf-8"
        )

    def render_csv(self) -> str:
        lines = [f"# {key}: {_meta_str(value)}" for key, value in self.metadata.items()]
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_cell_str(x) for x in row))
        return "\n".join(lines) + "\n"


def _cell_str(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(float(x))
    return str(x)


def _meta_str(x) -> str:
    if isinstance(x, (dict, list)):
        return json.dumps(x, sort_keys=False)
    return _cell_str(x) if isinstance(x, (bool, float)) else str(x)


def _jsonable(x):
    if isinstance(x, float):
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
    return x


def _worker_count() -> int:
    env = os.environ.get("QNG_THREADS")
    if env:
        try:
            count = int(env)
        except ValueError as exc:
            raise UsageError(f"QNG_THREADS must be an integer, got {env!r}") from exc
        if count < 1:
            raise UsageError(f"QNG_THREADS must be >= 1, got {count}")
        return count
    return min(4, os.cpu_count() or 1)


def _map_ordered(fn, items):
    """Evaluate fn over items with a worker pool, preserving input order."""
    workers = _worker_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _load_detector(path: Optional[str], order: int) -> Optional[DetectorConfig]:
    if path is None:
        return None
    try:
        config = load_detector_config(path)
    except FileNotFoundError as exc:
        raise UsageError(f"detector file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(
            f"detector file {path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    except ValueError as exc:
        raise UsageError(f"detector file {path}: {exc}") from exc
    if config.channels != order + 1:
        raise UsageError(
            f"order {order} needs {order + 1} channels, detector file has {config.channels}"
        )
    return config


def _load_ensemble(path: str) -> EnsembleParams:
    try:
        return load_ensemble_params(path)
    except FileNotFoundError as exc:
        raise UsageError(f"ensemble file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(
            f"ensemble file {path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    except ValueError as exc:
        raise UsageError(f"ensemble file {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# threshold
# ---------------------------------------------------------------------------

def _cmd_threshold(args) -> int:
    if args.points < 2:
        raise UsageError(f"--points must be >= 2, got {args.points}")
    if not (args.a_min < args.a_max < 0):
        raise UsageError(
            f"need a-min < a-max < 0, got a-min={args.a_min}, a-max={args.a_max}"
        )
    config = _load_detector(args.detector, args.order)
    grid = -np.geomspace(-args.a_min, -args.a_max, args.points)
    curve = threshold_curve(args.order, grid, config)

    meta = _base_metadata(args)
    meta["order"] = args.order
    meta["a_min"] = float(args.a_min)
    meta["a_max"] = float(args.a_max)
    meta["points"] = args.points
    if args.detector:
        meta["detector"] = args.detector

    table = ResultTable(
        columns=("a", "error", "success_bound", "amp", "angle", "min_var"),
        rows=[
            (p.a, p.error, p.success, p.state.amp, p.state.angle, p.state.min_var)
            for p in curve.points
        ],
        metadata=dict(meta, table="threshold_curve"),
    )
    asymptote = ResultTable(
        columns=("error", "success_asymptote"),
        rows=[
            (p.error, asymptotic_success_bound(args.order, max(p.error, 0.0)))
            for p in curve.points
        ],
        metadata=dict(meta, table="small_error_asymptote"),
    )
    out = Path(args.out)
    table.write(out, args.format)
    asymptote.write(out.with_suffix(f".asymptote{out.suffix}"), args.format)
    return 0


# ---------------------------------------------------------------------------
# witness
# ---------------------------------------------------------------------------

def _witness_mode(params: EnsembleParams) -> str:
    if params.window_length > 0 and math.isfinite(params.storage_time):
        return "escape"
    return "noisy"


def _cmd_witness(args) -> int:
    explicit = args.rn is not None or args.rnp1 is not None
    if explicit == bool(args.ensemble):
        raise UsageError("provide either --rn/--rnp1 or --ensemble, not both")
    config = _load_detector(args.detector, args.order)

    meta = _base_metadata(args)
    meta["order"] = args.order
    if explicit:
        if args.rn is None or args.rnp1 is None:
            raise UsageError("--rn and --rnp1 must be given together")
        stats = (args.rn, args.rnp1)
        meta["rn"] = float(args.rn)
        meta["rnp1"] = float(args.rnp1)
    else:
        params = _load_ensemble(args.ensemble)
        mode = _witness_mode(params)
        stats = source_click_stats(params, args.order, mode)
        meta["ensemble"] = args.ensemble
        meta["mode"] = mode
        meta["rn"] = stats.success
        meta["rnp1"] = stats.error

    try:
        result = witness(stats, args.order, config)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    table = ResultTable(
        columns=("witnessed", "margin", "best_a", "threshold_success"),
        rows=[(result.witnessed, result.margin, result.best_a, result.threshold_success)],
        metadata=dict(meta, table="witness"),
    )
    if args.out:
        table.write(Path(args.out), args.format)
    else:
        sys.stdout.write(table.render_csv())
    return 0


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

_SWEEP_VARS = {
    "eta": ("m", "n"),
    "noise": ("nbar", "m", "n"),
    "loss": ("nbar", "m", "n"),
    "duration": ("nbar", "m", "n"),
}


def _parse_grid(spec: str, allowed: Tuple[str, ...]) -> List[Tuple[str, List[float]]]:
    """Parse 'name=start:stop:count[,name=...]' into ordered value lists."""
    axes = []
    for chunk in spec.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise UsageError(f"grid axis {chunk!r} is not of the form name=start:stop:count")
        name, _, rng = chunk.partition("=")
        name = name.strip()
        if name not in allowed:
            raise UsageError(f"grid variable {name!r} not allowed here (use {allowed})")
        parts = rng.split(":")
        if len(parts) == 1:
            values = [float(parts[0])]
        elif len(parts) == 3:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise UsageError(f"grid axis {name}: count must be >= 1")
            if count > 1 and not start < stop:
                raise UsageError(f"grid axis {name}: need start < stop, got {rng!r}")
            values = list(np.linspace(start, stop, count))
        else:
            raise UsageError(f"grid axis {chunk!r} is not of the form name=start:stop:count")
        if name in ("m", "n"):
            values = [int(round(v)) for v in values]
        axes.append((name, values))
    if not axes:
        raise UsageError("grid specification is empty")
    names = [n for n, _ in axes]
    if len(set(names)) != len(names):
        raise UsageError(f"duplicate grid variable in {spec!r}")
    return axes


def _grid_rows(axes: List[Tuple[str, List[float]]]) -> List[dict]:
    rows = [{}]
    for name, values in axes:
        rows = [dict(r, **{name: v}) for r in rows for v in values]
    return rows


def _sweep_row(mode: str, base: EnsembleParams, point: dict) -> tuple:
    m = int(point.get("m", base.emitters))
    order = int(point.get("n", m))
    nbar = float(point.get("nbar", base.noise_mean))
    if mode == "eta":
        found = min_detectable_efficiency(m, order, nbar)
        analytic = min_efficiency_analytic(m, nbar) if order == m else math.nan
        return (m, order, nbar, _or_nan(found), analytic)
    if mode == "noise":
        found = min_detectable_efficiency(m, order, nbar)
        analytic = min_efficiency_analytic(m, nbar) if order == m else math.nan
        return (m, order, nbar, _or_nan(found), analytic)
    if mode == "loss":
        found = max_tolerated_loss(m, base.efficiency, nbar, order)
        if order == m:
            analytic = loss_tolerance_analytic(m, base.efficiency, nbar)
        else:
            analytic = math.nan
        return (m, order, nbar, _or_nan(found), analytic)
    if mode == "duration":
        tau = base.storage_time
        if not math.isfinite(tau):
            raise UsageError("duration sweep needs a finite tau_s in the ensemble file")
        found = max_measurement_duration(m, base.efficiency, nbar, tau, order)
        if order == m:
            try:
                analytic = max_duration_analytic(m, base.efficiency, nbar, tau).t_max
            except ValueError:
                analytic = math.nan
        else:
            analytic = math.nan
        return (m, order, nbar, _or_nan(found), analytic)
    raise UsageError(f"unknown sweep mode {mode!r}")


def _or_nan(value: Optional[float]) -> float:
    return math.nan if value is None else float(value)


_SWEEP_COLUMNS = {
    "eta": ("m", "n", "nbar", "eta_star", "eta_analytic"),
    "noise": ("m", "n", "nbar", "eta_star", "eta_analytic"),
    "loss": ("m", "n", "nbar", "loss_star", "loss_analytic"),
    "duration": ("m", "n", "nbar", "duration_star", "duration_analytic"),
}


def _cmd_sweep(args) -> int:
    base = _load_ensemble(args.ensemble)
    axes = _parse_grid(args.grid, _SWEEP_VARS[args.mode])
    points = _grid_rows(axes)

    rows = _map_ordered(lambda p: _sweep_row(args.mode, base, p), points)

    meta = _base_metadata(args)
    meta["mode"] = args.mode
    meta["ensemble"] = args.ensemble
    meta["ensemble_params"] = {
        "m": base.emitters,
        "eta": base.efficiency,
        "nbar": base.noise_mean,
        "T": base.loss,
        "tau_s": "inf" if math.isinf(base.storage_time) else base.storage_time,
        "t0": base.window_start,
        "tM": base.window_length,
    }
    meta["grid"] = args.grid
    table = ResultTable(
        columns=_SWEEP_COLUMNS[args.mode],
        rows=rows,
        metadata=dict(meta, table=f"sweep_{args.mode}"),
    )
    table.write(Path(args.out), args.format)
    return 0


# ---------------------------------------------------------------------------
# parser plumbing
# ---------------------------------------------------------------------------

def _base_metadata(args) -> dict:
    return {
        "tool": "qng",
        "version": __version__,
        "command": " ".join(args.argv),
        "seed": args.seed,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qng", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_thr = sub.add_parser("threshold", help="sample a Gaussian-attainable boundary")
    p_thr.add_argument("--order", type=int, required=True)
    p_thr.add_argument("--detector", help="detector configuration JSON file")
    p_thr.add_argument("--a-min", type=float, default=-1e7, dest="a_min")
    p_thr.add_argument("--a-max", type=float, default=-1e-3, dest="a_max")
    p_thr.add_argument("--points", type=int, default=200)
    p_thr.add_argument("--out", required=True)
    p_thr.add_argument("--format", choices=("csv", "json"), default="csv")
    p_thr.add_argument("--seed", type=int, default=0)
    p_thr.set_defaults(func=_cmd_threshold)

    p_wit = sub.add_parser("witness", help="test a click pair or an ensemble file")
    p_wit.add_argument("--rn", type=float, help="measured success probability R_n")
    p_wit.add_argument("--rnp1", type=float, help="measured error probability R_{n+1}")
    p_wit.add_argument("--ensemble", help="ensemble parameter JSON file")
    p_wit.add_argument("--order", type=int, required=True)
    p_wit.add_argument("--detector", help="detector configuration JSON file")
    p_wit.add_argument("--out")
    p_wit.add_argument("--format", choices=("csv", "json"), default="csv")
    p_wit.add_argument("--seed", type=int, default=0)
    p_wit.set_defaults(func=_cmd_witness)

    p_swp = sub.add_parser("sweep", help="map detectability thresholds over grids")
    p_swp.add_argument("mode", choices=("eta", "noise", "loss", "duration"))
    p_swp.add_argument("--ensemble", required=True)
    p_swp.add_argument("--grid", required=True, help="name=start:stop:count[,name=...]")
    p_swp.add_argument("--out", required=True)
    p_swp.add_argument("--format", choices=("csv", "json"), default="csv")
    p_swp.add_argument("--seed", type=int, default=0)
    p_swp.set_defaults(func=_cmd_sweep)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = ["qng"] + argv
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qng: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"qng: computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
