"""Inequality verdicts linking orbit complexity, sensitivity and dimension.

For a point ``x`` and clock ``f`` three comparisons are made:

* upper: ``K <= d_upper * r * (1 + slack)`` (``+ 1`` under the log clock),
  with ``d_upper`` the box dimension of the whole domain,
* lower: ``K >= d_lower * R * (1 - slack)``, with ``d_lower`` the lower box
  dimension of the orbit closure of ``x``,
* measure: ``K >= d_mu * R * (1 - slack)``,

where ``K``, ``r`` and ``R`` are indicator values under ``f``. A verdict is
``indeterminate`` when a regime could not be classified or both sides are
infinite. A separate per-horizon table compares quantized-orbit
information with point complexity at the sensitivity radii.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import complexity, dimension, sensitivity
from .catalog import MapDescriptor, as_rational, trajectory
from .coding import quantized_orbit
from .complexity import GrowthFit, ScalingLaw
from .errors import CapabilityError, ConfigError, UsageError
from .infocontent import LZ78, PAIRGROWTH, compressed_bits, info_curve
from .sensitivity import SensitivityFit

PASS = "pass"
FAIL = "fail"
INDETERMINATE = "indeterminate"

C1 = 64
C2 = 64
ALLOWANCE = 0.15


@dataclass(frozen=True)
class Indicator:
    """An indicator value under one clock; ``value is None`` means unclassified."""

    value: float | None
    clock: ScalingLaw
    regime: str = ""


@dataclass(frozen=True)
class Verdict:
    inequality: str
    lhs: float | None
    rhs: float | None
    slack: float
    verdict: str
    margin: float | None
    comparison: str

    def to_dict(self) -> dict:
        return {k: _jsonable(v) for k, v in asdict(self).items()}


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    if isinstance(v, Fraction):
        return str(v)
    return v


def _unpack(value, f: ScalingLaw, name: str):
    if isinstance(value, Indicator):
        if value.clock != f:
            raise UsageError(f"{name} was evaluated under {value.clock.label}, not {f.label}")
        return value.value
    return None if value is None else float(value)


def _product(d: float, v: float) -> float:
    if d == 0 or v == 0:
        return 0.0
    return d * v


def _check_slack(slack: float):
    if not 0 <= slack < 1:
        raise ConfigError("slack must lie in [0, 1)")


def check_upper(K, d_upper: float, r, f: ScalingLaw = ScalingLaw.linear(), slack: float = 0.15) -> Verdict:
    """``K <= d * r * (1 + slack)``, plus one under the log clock."""
    _check_slack(slack)
    k, rv = _unpack(K, f, "K"), _unpack(r, f, "r")
    extra = 1.0 if f.kind == "Log" else 0.0
    text = f"K <= d*r*(1+slack){' + 1' if extra else ''}"
    if k is None or rv is None:
        return Verdict("upper", k, None, slack, INDETERMINATE, None, text)
    base = _product(d_upper, rv) + extra
    rhs = _product(d_upper, rv) * (1 + slack) + extra
    if math.isinf(k) and math.isinf(rhs):
        return Verdict("upper", k, rhs, slack, INDETERMINATE, None, text)
    verdict = PASS if k <= rhs else FAIL
    margin = base - k if math.isfinite(base - k) else None
    return Verdict("upper", k, rhs, slack, verdict, margin, text)


def check_lower(K, d: float, R, f: ScalingLaw = ScalingLaw.linear(), slack: float = 0.15, name: str = "lower") -> Verdict:
    """``K >= d * R * (1 - slack)``."""
    _check_slack(slack)
    k, rv = _unpack(K, f, "K"), _unpack(R, f, "R")
    text = "K >= d*R*(1-slack)"
    if k is None or rv is None:
        return Verdict(name, k, None, slack, INDETERMINATE, None, text)
    base = _product(d, rv)
    rhs = base * (1 - slack)
    if math.isinf(k) and math.isinf(rhs):
        return Verdict(name, k, rhs, slack, INDETERMINATE, None, text)
    verdict = PASS if k >= rhs else FAIL
    margin = k - base if math.isfinite(k - base) else None
    return Verdict(name, k, rhs, slack, verdict, margin, text)


# ----------------------------------------------------------------------
# indicators from fits


def complexity_indicator(fit: GrowthFit, curve, f: ScalingLaw, tail_fraction: float = 0.5) -> Indicator:
    return Indicator(complexity.indicator_under(fit, curve, f, tail_fraction), f, fit.regime)


def sensitivity_indicator(fit: SensitivityFit, f: ScalingLaw) -> Indicator:
    """``0`` below the clock, the fitted coefficient at it, ``inf`` above it."""
    order = fit.growth_order()
    if order is None:
        return Indicator(None, f, fit.regime)
    if fit.regime == sensitivity.NONE:
        return Indicator(0.0, f, fit.regime)
    clock = f.growth_order()
    if order < clock:
        value = 0.0
    elif order > clock:
        value = math.inf
    else:
        value = fit.coefficient
    return Indicator(value, f, fit.regime)


# ----------------------------------------------------------------------
# point complexity at sensitivity radii


def _geometric(start: int, ratio: int, count: int) -> tuple:
    return tuple(start * ratio**i for i in range(count))


@dataclass(frozen=True)
class RadiusBoundRow:
    n: int
    info_2eps: int
    point_bits_r: int
    log_n: float
    rhs_upper: float
    upper_verdict: str
    point_bits_R: int
    info_eps: int
    rhs_lower: float
    lower_verdict: str


def check_radius_bounds(
    map: MapDescriptor,
    x,
    n_schedule: Sequence[int],
    epsilon,
    estimator: str = PAIRGROWTH,
    c1: int = C1,
    c2: int = C2,
    allowance: float = ALLOWANCE,
) -> list:
    """Per-horizon comparison of orbit information and point complexity.

    Row ``n`` checks ``info(n, 2 eps) <= (1 + allowance) * (S(x, r(x, n, eps)) + log2 n) + c1``
    and ``S(x, R(x, n, 3 eps)) <= (1 + allowance) * info(n, eps) + c2``, where
    ``info`` is the compressed length of the quantized orbit prefix and ``S``
    the dyadic-enumeration point complexity on ``[0, 1]``.
    """
    if map.dim != 1 or map.bounds != (0, 1):
        raise CapabilityError("point complexity at sensitivity radii is available on [0, 1] only")
    eps = as_rational(epsilon)
    schedule = tuple(int(n) for n in n_schedule)
    orbit = trajectory(map, x, schedule[-1])
    fine = quantized_orbit(orbit, eps)
    coarse = quantized_orbit(orbit, 2 * eps)
    r_curve = sensitivity.sensitivity_curve(map, x, eps, schedule)
    R_curve = sensitivity.sensitivity_curve(map, x, 3 * eps, schedule)
    rows = []
    for i, n in enumerate(schedule):
        info2 = compressed_bits(coarse.prefix(n), estimator)
        info1 = compressed_bits(fine.prefix(n), estimator)
        s_r = dimension.dyadic_point_complexity(x, r_curve.r_values[i])
        s_R = dimension.dyadic_point_complexity(x, R_curve.R_values[i])
        lg = math.log2(n)
        rhs_u = (1 + allowance) * (s_r + lg) + c1
        rhs_l = (1 + allowance) * info1 + c2
        rows.append(RadiusBoundRow(
            n, info2, s_r, lg, rhs_u, PASS if info2 <= rhs_u else FAIL,
            s_R, info1, rhs_l, PASS if s_R <= rhs_l else FAIL,
        ))
    return rows


# ----------------------------------------------------------------------
# full point reports


@dataclass(frozen=True)
class ReportSettings:
    """Schedules and constants of a point report (all values are declared in the output)."""

    info_schedule: tuple = (1 << 8, 2, 15)
    tail_fraction: float = 0.25
    coding_epsilon: Fraction = Fraction(1, 2)
    estimator: str = LZ78
    sens_epsilon: Fraction = Fraction(1, 4)
    sens_schedule: tuple = (8, 2, 10)
    dim_orbit: int = 1 << 14
    dim_scales: tuple = (3, 7)
    local_orbit: int = 1 << 18
    local_scales: tuple = (4, 7)
    clocks: tuple = (ScalingLaw.linear(),)
    slack: float = 0.15
    radius_schedule: tuple | None = None
    radius_epsilon: Fraction = Fraction(1, 16)

    def to_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            if k == "clocks":
                out[k] = [c.label for c in self.clocks]
            elif isinstance(v, Fraction):
                out[k] = str(v)
            elif isinstance(v, tuple):
                out[k] = list(v)
            else:
                out[k] = v
        return out


def _dyadic_scales(octaves: tuple) -> list:
    first, count = octaves
    return [2.0 ** -(first + i) for i in range(count)]


@dataclass(frozen=True)
class PointReport:
    map: MapDescriptor
    x: object
    complexity_fit: GrowthFit
    complexity_indicators: tuple
    r_fit: SensitivityFit
    R_fit: SensitivityFit
    d_upper: float
    d_lower: float
    d_closure_upper: float
    d_mu: float
    verdicts: tuple
    radius_bounds: tuple = ()
    settings: ReportSettings = field(default_factory=ReportSettings)

    @property
    def x_label(self) -> str:
        x = self.x
        if isinstance(x, tuple):
            return "(" + ", ".join(repr(float(c)) for c in x) + ")"
        return repr(float(x))

    @property
    def fail_count(self) -> int:
        rows = [v.verdict for v in self.verdicts]
        rows += [r.upper_verdict for r in self.radius_bounds] + [r.lower_verdict for r in self.radius_bounds]
        return rows.count(FAIL)

    def to_dict(self) -> dict:
        return {
            "map": self.map.to_dict(),
            "x": self.x_label,
            "complexity": {
                "fit": self.complexity_fit.to_dict(),
                "indicators": {i.clock.label: _jsonable(i.value) for i in self.complexity_indicators},
            },
            "r": self.r_fit.to_dict(),
            "R": self.R_fit.to_dict(),
            "d_upper": self.d_upper,
            "d_lower": self.d_lower,
            "d_closure_upper": self.d_closure_upper,
            "d_mu": self.d_mu,
            "verdicts": [dict(v.to_dict(), clock=clock) for v, clock in self._verdict_clocks()],
            "radius_bounds": [asdict(r) for r in self.radius_bounds],
            "settings": self.settings.to_dict(),
        }

    def _verdict_clocks(self):
        per = len(self.verdicts) // max(1, len(self.settings.clocks))
        for i, v in enumerate(self.verdicts):
            yield v, self.settings.clocks[i // per].label if per else ""

    def csv_rows(self) -> list:
        rows = []
        for v, clock in self._verdict_clocks():
            rows.append([self.map.label, self.x_label, f"{v.inequality}[{clock}]",
                         _jsonable(v.lhs), _jsonable(v.rhs), v.slack, v.verdict])
        for r in self.radius_bounds:
            rows.append([self.map.label, self.x_label, f"radius_upper[n={r.n}]", r.info_2eps, r.rhs_upper, ALLOWANCE, r.upper_verdict])
            rows.append([self.map.label, self.x_label, f"radius_lower[n={r.n}]", r.point_bits_R, r.rhs_lower, ALLOWANCE, r.lower_verdict])
        return rows


def report_csv(reports: Sequence[PointReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["map", "x", "inequality", "lhs", "rhs", "slack", "verdict"])
    for rep in reports:
        w.writerows(rep.csv_rows())
    return buf.getvalue()


def report_json(reports: Sequence[PointReport]) -> str:
    return json.dumps({"reports": [r.to_dict() for r in reports]}, indent=2, sort_keys=True)


def build_report(map: MapDescriptor, x, settings: ReportSettings = ReportSettings()) -> PointReport:
    """Estimate every ingredient at ``x`` and evaluate all verdicts."""
    schedule = _geometric(*settings.info_schedule)
    orbit = trajectory(map, x, schedule[-1])
    symbols = quantized_orbit(orbit, settings.coding_epsilon)
    curve = info_curve(symbols, schedule, settings.estimator)
    k_fit = complexity.fit_growth(curve)
    k_ind = tuple(complexity_indicator(k_fit, curve, f, settings.tail_fraction) for f in settings.clocks)

    sens = sensitivity.sensitivity_curve(map, x, settings.sens_epsilon, _geometric(*settings.sens_schedule))
    r_fit = sensitivity.fit_sensitivity(sens, "inner")
    R_fit = sensitivity.fit_sensitivity(sens, "outer")

    domain = dimension.domain_dimension(map, _dyadic_scales(settings.dim_scales))
    closure = dimension.orbit_closure_dimension(map, x, settings.dim_orbit, _dyadic_scales(settings.dim_scales))
    local = dimension.local_measure_dimension(map, x, settings.local_orbit, _dyadic_scales(settings.local_scales))

    verdicts = []
    for f, k in zip(settings.clocks, k_ind):
        r = sensitivity_indicator(r_fit, f)
        R = sensitivity_indicator(R_fit, f)
        verdicts.append(check_upper(k, domain.upper, r, f, settings.slack))
        verdicts.append(check_lower(k, closure.lower, R, f, settings.slack))
        verdicts.append(check_lower(k, local.value, R, f, settings.slack, name="measure"))
    bound_rows = ()
    if settings.radius_schedule is not None:
        bound_rows = tuple(check_radius_bounds(map, x, _geometric(*settings.radius_schedule), settings.radius_epsilon))
    return PointReport(
        map, x, k_fit, k_ind, r_fit, R_fit, domain.upper, closure.lower, closure.upper, local.value,
        tuple(verdicts), bound_rows, settings,
    )
