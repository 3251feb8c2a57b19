"""Command-line experiment runner.

Every subcommand reads one JSON run configuration, validates all of it
before computing anything, and writes its outputs plus ``manifest.json``
into ``--out`` once the computation has finished. Example configuration::

    {
      "map": {"kind": "PLManneville", "params": {"z": "3", "a": "1/2"}},
      "points": {"random": 5},
      "seed": 0,
      "orbit": {"n": 100, "error_exponent": 52},
      "info": {"schedule": [64, 2, 15], "estimator": "pairgrowth", "coding": "binary"},
      "sens": {"epsilon": "1/4", "schedule": [8, 2, 10]},
      "dim": {"orbit_length": 16384, "scales": ["1/8", "1/2", 7]},
      "report": {"slack": 0.15, "clocks": ["Linear"]}
    }

Schedules are ``[start, ratio, count]`` geometric triples. ``points`` is
either an explicit list (numbers, ``"p/q"`` strings, or pairs for 2D maps)
or ``{"random": count, "bits": b}``. Random points are drawn in list order
from ``numpy.random.default_rng(seed)`` with :func:`random_point`; the
default bit count is 64, or the longest horizon of the run plus 128 for the
Doubling map, whose orbits consume one bit per step.

Exit codes: 0 success, 2 configuration error, 3 precision error, 4 coding
error.
"""
from __future__ import annotations

import csv
import io
import json
import os
import platform
import re
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import metadata
from pathlib import Path
from typing import Any, Callable, Mapping

import click
import numpy as np

from . import complexity, dimension, report, sensitivity
from .catalog import DOUBLING, PL_MANNEVILLE, MapDescriptor, _check_domain, as_rational, random_point, trajectory
from .coding import binary_partition, quantized_orbit, symbolic_orbit
from .complexity import ScalingLaw
from .errors import ConfigError, WeakChaosError
from .infocontent import ESTIMATORS, info_curve

SECTIONS = ("map", "points", "seed", "orbit", "info", "sens", "dim", "report")


# ----------------------------------------------------------------------
# configuration


def _triple(value, name: str, integer: bool) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"{name} must be a [start, ratio, count] triple")
    start, ratio, count = value
    if isinstance(count, bool) or not isinstance(count, int) or count < 1:
        raise ConfigError(f"{name}: count must be a positive integer")
    if integer:
        if any(isinstance(v, bool) or not isinstance(v, int) for v in (start, ratio)):
            raise ConfigError(f"{name}: start and ratio must be integers")
        if start < 1 or ratio < 2:
            raise ConfigError(f"{name}: need start >= 1 and ratio >= 2")
        return tuple(start * ratio**i for i in range(count))
    s, r = as_rational(start), as_rational(ratio)
    if s <= 0 or not 0 < r < 1:
        raise ConfigError(f"{name}: need start > 0 and 0 < ratio < 1")
    return tuple(s * r**i for i in range(count))


def _section(raw: Mapping, name: str, allowed: tuple) -> dict:
    sec = raw.get(name, {})
    if not isinstance(sec, Mapping):
        raise ConfigError(f"'{name}' must be an object")
    unknown = set(sec) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {sorted(unknown)}")
    return dict(sec)


def _int(value, name: str, low: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < low:
        raise ConfigError(f"{name} must be an integer >= {low}")
    return value


_CLOCK = re.compile(r"^(Linear|Log|Power|LogPower)(?:\(([^)]+)\))?$")


def parse_clock(text: str) -> ScalingLaw:
    """``"Linear"``, ``"Log"``, ``"Power(0.5)"`` or ``"LogPower(2)"``."""
    m = _CLOCK.match(str(text).strip())
    if not m:
        raise ConfigError(f"unknown clock {text!r}")
    kind, arg = m.groups()
    if kind in ("Linear", "Log"):
        if arg is not None:
            raise ConfigError(f"clock {kind} takes no parameter")
        return ScalingLaw(kind)
    if arg is None:
        raise ConfigError(f"clock {kind} needs a parameter")
    try:
        return ScalingLaw(kind, float(arg))
    except ValueError as exc:
        raise ConfigError(f"bad clock parameter in {text!r}") from exc


@dataclass(frozen=True)
class RunConfig:
    """A validated run configuration; it fixes every output byte."""

    map: MapDescriptor
    points: tuple
    seed: int
    orbit_n: int = 100
    error_exponent: int = 52
    info_schedule: tuple = tuple(64 * 2**i for i in range(11))
    estimator: str = "pairgrowth"
    coding: Any = "binary"
    sens_epsilon: Fraction = Fraction(1, 4)
    sens_schedule: tuple = tuple(8 * 2**i for i in range(10))
    dim_orbit: int = 1 << 14
    dim_scales: tuple = tuple(Fraction(1, 8) / 2**i for i in range(7))
    local_orbit: int = 1 << 18
    local_scales: tuple = tuple(Fraction(1, 16) / 2**i for i in range(7))
    report_settings: report.ReportSettings = field(default_factory=report.ReportSettings)
    raw: Mapping = field(default_factory=dict)


def _parse_point(m: MapDescriptor, value):
    if m.dim == 2:
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise ConfigError(f"{m.kind} points are [x, y] pairs, got {value!r}")
        x = tuple(as_rational(c) for c in value)
    else:
        x = as_rational(value)
    _check_domain(m, x)
    return x


def _longest_horizon(cfg: RunConfig) -> int:
    s = cfg.report_settings
    return max(cfg.orbit_n, cfg.info_schedule[-1], cfg.dim_orbit, cfg.local_orbit,
               s.info_schedule[0] * s.info_schedule[1] ** (s.info_schedule[2] - 1))


def load_config(raw: Mapping, seed: int | None = None) -> RunConfig:
    """Validate a decoded JSON configuration completely."""
    if not isinstance(raw, Mapping):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(raw) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown configuration keys {sorted(unknown)}")
    if "map" not in raw:
        raise ConfigError("configuration needs a 'map' descriptor")
    m = MapDescriptor.from_dict(raw["map"])
    seed = raw.get("seed", 0) if seed is None else seed
    seed = _int(seed, "seed", 0)
    kw: dict = {}

    orbit = _section(raw, "orbit", ("n", "error_exponent"))
    kw["orbit_n"] = _int(orbit.get("n", 100), "orbit.n")
    kw["error_exponent"] = _int(orbit.get("error_exponent", 52), "orbit.error_exponent")

    info = _section(raw, "info", ("schedule", "estimator", "coding"))
    if "schedule" in info:
        kw["info_schedule"] = _triple(info["schedule"], "info.schedule", integer=True)
    est = info.get("estimator", "pairgrowth")
    if est not in ESTIMATORS:
        raise ConfigError(f"info.estimator must be one of {sorted(ESTIMATORS)}")
    kw["estimator"] = est
    coding = info.get("coding", "binary" if m.dim == 1 else {"epsilon": "1/2"})
    if coding == "binary":
        if m.dim != 1:
            raise ConfigError("binary coding needs a map on [0, 1]")
    elif isinstance(coding, Mapping) and set(coding) == {"epsilon"}:
        eps = as_rational(coding["epsilon"])
        if not 0 < eps <= 1:
            raise ConfigError("info.coding.epsilon must lie in (0, 1]")
        coding = eps
    else:
        raise ConfigError('info.coding must be "binary" or {"epsilon": value}')
    kw["coding"] = coding

    sens = _section(raw, "sens", ("epsilon", "schedule"))
    if "epsilon" in sens:
        kw["sens_epsilon"] = as_rational(sens["epsilon"])
        if kw["sens_epsilon"] <= 0:
            raise ConfigError("sens.epsilon must be positive")
    if "schedule" in sens:
        kw["sens_schedule"] = _triple(sens["schedule"], "sens.schedule", integer=True)

    dim = _section(raw, "dim", ("orbit_length", "scales", "local_orbit_length", "local_scales"))
    if "orbit_length" in dim:
        kw["dim_orbit"] = _int(dim["orbit_length"], "dim.orbit_length")
    if "local_orbit_length" in dim:
        kw["local_orbit"] = _int(dim["local_orbit_length"], "dim.local_orbit_length")
    if "scales" in dim:
        kw["dim_scales"] = _triple(dim["scales"], "dim.scales", integer=False)
    if "local_scales" in dim:
        kw["local_scales"] = _triple(dim["local_scales"], "dim.local_scales", integer=False)

    rep = _section(raw, "report", ("slack", "clocks", "radius_bounds"))
    settings = report.ReportSettings()
    if "slack" in rep:
        slack = rep["slack"]
        if isinstance(slack, bool) or not isinstance(slack, (int, float)) or not 0 <= slack < 1:
            raise ConfigError("report.slack must lie in [0, 1)")
        settings = replace(settings, slack=float(slack))
    if "clocks" in rep:
        if not isinstance(rep["clocks"], list) or not rep["clocks"]:
            raise ConfigError("report.clocks must be a non-empty list")
        settings = replace(settings, clocks=tuple(parse_clock(c) for c in rep["clocks"]))
    if "radius_bounds" in rep:
        _triple(rep["radius_bounds"], "report.radius_bounds", integer=True)
        settings = replace(settings, radius_schedule=tuple(rep["radius_bounds"]))
    kw["report_settings"] = settings

    cfg = RunConfig(map=m, points=(), seed=seed, raw=dict(raw), **kw)
    return replace(cfg, points=_points(raw.get("points", {"random": 1}), cfg))


def _points(entry, cfg: RunConfig) -> tuple:
    m = cfg.map
    if isinstance(entry, list):
        if not entry:
            raise ConfigError("points list is empty")
        return tuple(_parse_point(m, p) for p in entry)
    if isinstance(entry, Mapping):
        unknown = set(entry) - {"random", "bits"}
        if unknown or "random" not in entry:
            raise ConfigError('points must be a list or {"random": count, "bits": b}')
        count = _int(entry["random"], "points.random")
        default = _longest_horizon(cfg) + 128 if m.kind == DOUBLING else 64
        bits = _int(entry.get("bits", default), "points.bits")
        rng = np.random.default_rng(cfg.seed)
        return tuple(random_point(m, rng, bits=bits) for _ in range(count))
    raise ConfigError("points must be a list or an object")


def read_config(path: str, seed: int | None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return load_config(raw, seed)


# ----------------------------------------------------------------------
# output


def point_label(x) -> str:
    if isinstance(x, tuple):
        return "(" + ", ".join(repr(float(c)) for c in x) + ")"
    return repr(float(x))


def _point_record(x) -> dict:
    coords = x if isinstance(x, tuple) else (x,)
    return {
        "value": point_label(x),
        "denominator_bits": [c.denominator.bit_length() - 1 for c in coords],
    }


def _versions() -> dict:
    out = {"python": platform.python_version()}
    for dist in ("artifact", "numpy", "scipy", "scikit-learn", "click", "mpmath"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[dist] = None
    return out


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=report._jsonable) + "\n"


def write_outputs(out: Path, files: Mapping[str, str]) -> None:
    """Write every file through a temporary name and rename it into place."""
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        fd, tmp = tempfile.mkstemp(dir=out, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, out / name)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def _manifest(command: str, cfg: RunConfig, files: Mapping[str, str]) -> str:
    return _dump({
        "command": command,
        "config": cfg.raw,
        "seed": cfg.seed,
        "points": [_point_record(x) for x in cfg.points],
        "outputs": sorted(files),
        "versions": _versions(),
    })


def _map_points(fn: Callable, points: tuple, threads: int) -> list:
    if threads <= 1 or len(points) <= 1:
        return [fn(i, x) for i, x in enumerate(points)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(len(points)), points))


# ----------------------------------------------------------------------
# pipelines


def run_orbit(cfg: RunConfig, threads: int = 1) -> dict:
    def one(i, x):
        orbit = trajectory(cfg.map, x, cfg.orbit_n, cfg.error_exponent)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "point", "error_exponent"])
        m = "" if orbit.error_exponent is None else orbit.error_exponent
        for step, p in enumerate(orbit.points):
            w.writerow([step, point_label(tuple(p)) if cfg.map.dim == 2 else repr(float(p)), m])
        return {f"orbit_{i}.csv": buf.getvalue()}

    return _merge(_map_points(one, cfg.points, threads))


def _coded(cfg: RunConfig, x):
    orbit = trajectory(cfg.map, x, cfg.info_schedule[-1], cfg.error_exponent)
    if cfg.coding == "binary":
        a = cfg.map.params["a"] if cfg.map.kind == PL_MANNEVILLE else Fraction(1, 2)
        return symbolic_orbit(orbit, binary_partition(a))
    return quantized_orbit(orbit, cfg.coding)


def run_info(cfg: RunConfig, threads: int = 1) -> dict:
    def one(i, x):
        curve = info_curve(_coded(cfg, x), cfg.info_schedule, cfg.estimator)
        fit = complexity.fit_growth(curve)
        return {f"info_{i}.csv": curve.to_csv(), f"info_{i}.json": _dump(fit.to_dict())}

    return _merge(_map_points(one, cfg.points, threads))


def run_sens(cfg: RunConfig, threads: int = 1) -> dict:
    def one(i, x):
        curve = sensitivity.sensitivity_curve(cfg.map, x, cfg.sens_epsilon, cfg.sens_schedule)
        fits = {
            "inner": sensitivity.fit_sensitivity(curve, "inner").to_dict(),
            "outer": sensitivity.fit_sensitivity(curve, "outer").to_dict(),
        }
        return {f"sens_{i}.csv": curve.to_csv(), f"sens_{i}.json": _dump(fits)}

    return _merge(_map_points(one, cfg.points, threads))


def run_dim(cfg: RunConfig, threads: int = 1) -> dict:
    scales = [float(s) for s in cfg.dim_scales]
    local_scales = [float(s) for s in cfg.local_scales]

    def one(i, x):
        closure = dimension.orbit_closure_dimension(cfg.map, x, cfg.dim_orbit, scales, cfg.error_exponent)
        local = dimension.local_measure_dimension(cfg.map, x, cfg.local_orbit, local_scales, cfg.error_exponent)
        summary = {
            "closure": json.loads(closure.to_json()),
            "local": {"value": local.value, "lsq_slope": local.lsq_slope, "floored": local.floored},
        }
        return {f"dim_{i}.csv": closure.to_csv(), f"dim_{i}.json": _dump(summary)}

    return _merge(_map_points(one, cfg.points, threads))


def run_report(cfg: RunConfig, threads: int = 1) -> dict:
    reps = _map_points(lambda i, x: report.build_report(cfg.map, x, cfg.report_settings), cfg.points, threads)
    return {"report.json": report.report_json(reps) + "\n", "report.csv": report.report_csv(reps)}


def _merge(parts: list) -> dict:
    out: dict = {}
    for p in parts:
        out.update(p)
    return out


PIPELINES = {"orbit": run_orbit, "info": run_info, "sens": run_sens, "dim": run_dim, "report": run_report}


# ----------------------------------------------------------------------
# click wiring


def _execute(command: str, config: str, out: str, seed: int | None, threads: int) -> None:
    try:
        if threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = read_config(config, seed)
        files = PIPELINES[command](cfg, threads)
        files["manifest.json"] = _manifest(command, cfg, files)
        write_outputs(Path(out), files)
    except WeakChaosError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.exit_code)


def _options(fn):
    fn = click.option("--threads", type=int, default=1, show_default=True, help="Worker threads across points.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Overrides the configuration seed.")(fn)
    fn = click.option("--out", "out", type=click.Path(file_okay=False), required=True, help="Output directory.")(fn)
    fn = click.option("--config", "config", type=click.Path(dir_okay=False), required=True, help="JSON run configuration.")(fn)
    return fn


@click.group()
def main():
    """Orbit complexity, sensitivity and dimension experiments."""


def _make(command: str, doc: str):
    @_options
    def cmd(config, out, seed, threads):
        _execute(command, config, out, seed, threads)

    cmd.__doc__ = doc
    main.command(name=command)(cmd)


_make("orbit", "Write precision-tracked orbits as step,point,error_exponent.")
_make("info", "Write information curves and growth fits of coded orbits.")
_make("sens", "Write sensitivity radii curves and regime fits.")
_make("dim", "Write box-counting and local dimension estimates.")
_make("report", "Write inequality verdicts for every point.")


if __name__ == "__main__":
    main()
