"""Growth-law fits of information curves and orbit-complexity indicators.

An information curve ``n -> I(n)`` is fitted three ways (linear in ``n``,
power law via log-log regression, linear in ``log2 n``). The winning law
decides how the curve compares with a scaling clock ``f``: the indicator
``limsup I(n)/f(n)`` is ``0`` for slower growth, the tail maximum of
``I/f`` for matching growth and ``inf`` for faster growth.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from .catalog import MapDescriptor, as_rational, trajectory
from .coding import quantized_orbit
from .errors import ConfigError, SampleSizeError
from .infocontent import PAIRGROWTH, InfoCurve, geometric_schedule, info_curve

LINEAR = "Linear"
POWER = "Power"
LOGARITHMIC = "Logarithmic"
INDETERMINATE = "Indeterminate"
REGIMES = (LINEAR, POWER, LOGARITHMIC, INDETERMINATE)

MARGIN = 0.8
LINEAR_EXPONENT_FLOOR = 0.9
DIVERGENCE_PER_DECADE = 1.1


# ----------------------------------------------------------------------
# scaling laws


@dataclass(frozen=True)
class ScalingLaw:
    """A clock ``f(n)``: ``Linear`` (n), ``Power`` (n**alpha), ``Log`` (log2 n)
    or ``LogPower`` ((log2 n)**beta)."""

    kind: str
    parameter: float = 1.0

    def __post_init__(self):
        if self.kind not in ("Linear", "Power", "Log", "LogPower"):
            raise ConfigError(f"unknown scaling law {self.kind!r}")
        if self.kind == "Power" and not 0 < self.parameter <= 1:
            raise ConfigError("Power scaling needs an exponent in (0, 1]")
        if self.kind == "LogPower" and self.parameter <= 0:
            raise ConfigError("LogPower scaling needs a positive exponent")

    @classmethod
    def linear(cls) -> "ScalingLaw":
        return cls("Linear")

    @classmethod
    def power(cls, alpha: float) -> "ScalingLaw":
        return cls("Power", float(alpha))

    @classmethod
    def log(cls) -> "ScalingLaw":
        return cls("Log")

    @classmethod
    def log_power(cls, beta: float) -> "ScalingLaw":
        return cls("LogPower", float(beta))

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        if self.kind == "Linear":
            return n
        if self.kind == "Power":
            return n**self.parameter
        lg = np.log2(np.maximum(n, 2.0))
        return lg if self.kind == "Log" else lg**self.parameter

    @property
    def label(self) -> str:
        if self.kind in ("Linear", "Log"):
            return self.kind
        return f"{self.kind}({self.parameter:g})"

    def growth_order(self) -> tuple:
        """Sortable order of growth: polynomial exponent, then log exponent."""
        if self.kind == "Linear":
            return (1.0, 0.0)
        if self.kind == "Power":
            return (self.parameter, 0.0)
        return (0.0, 1.0 if self.kind == "Log" else self.parameter)


# ----------------------------------------------------------------------
# growth fits


@dataclass(frozen=True)
class GrowthFit:
    exponent: float
    rate: float
    log_coefficient: float
    residual: float
    regime: str
    residuals: dict = field(default_factory=dict)

    def growth_order(self) -> tuple | None:
        """Order of growth of the fitted regime, comparable with ``ScalingLaw.growth_order``."""
        if self.regime == LINEAR:
            return (1.0, 0.0)
        if self.regime == POWER:
            return (self.exponent, 0.0)
        if self.regime == LOGARITHMIC:
            return (0.0, 1.0)
        return None

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "exponent": self.exponent,
            "rate": self.rate,
            "log_coefficient": self.log_coefficient,
            "residual": self.residual,
        }


def _lstsq(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def _log_residual(bits: np.ndarray, predicted: np.ndarray) -> float:
    floor = 1e-9 * max(1.0, float(bits.max()))
    diff = np.log2(np.maximum(predicted, floor)) - np.log2(np.maximum(bits, floor))
    return float(np.sqrt(np.mean(diff**2)))


def _pick(residuals: dict, margin: float) -> str:
    ranked = sorted(residuals.items(), key=lambda kv: kv[1])
    (best, r0), (_, r1) = ranked[0], ranked[1]
    return best if r0 <= margin * r1 else INDETERMINATE


def fit_growth_arrays(n: Sequence[float], bits: Sequence[float], margin: float = MARGIN) -> GrowthFit:
    """Fit ``bits`` against ``n``; see :func:`fit_growth`."""
    n = np.asarray(n, dtype=float)
    bits = np.asarray(bits, dtype=float)
    if n.size < 6 or n.size != bits.size:
        raise SampleSizeError(f"growth fit needs at least 6 schedule points (got {n.size})")
    if n.min() <= 0 or n.max() / n.min() < 100:
        raise SampleSizeError("growth fit needs a schedule spanning at least 2 decades")
    lg = np.log2(n)
    if np.ptp(bits) == 0:
        return GrowthFit(0.0, 0.0, 0.0, 0.0, LOGARITHMIC, {LOGARITHMIC: 0.0})
    rate, b_lin = _lstsq(n, bits)
    alpha, c_pow = _lstsq(lg, np.log2(np.maximum(bits, 1.0)))
    log_coef, b_log = _lstsq(lg, bits)
    residuals = {
        LINEAR: _log_residual(bits, rate * n + b_lin),
        POWER: _log_residual(bits, 2.0 ** (alpha * lg + c_pow)),
        LOGARITHMIC: _log_residual(bits, log_coef * lg + b_log),
    }
    # a power law with an exponent near one is linear growth
    candidates = dict(residuals)
    if alpha >= LINEAR_EXPONENT_FLOOR:
        candidates[LINEAR] = min(candidates.pop(POWER), candidates[LINEAR])
    regime = _pick(candidates, margin)
    if regime == LINEAR and alpha < LINEAR_EXPONENT_FLOOR:
        regime = INDETERMINATE
    exponent = float(np.clip(alpha, 0.0, 1.5))
    best = residuals[regime] if regime in residuals else min(residuals.values())
    if regime == LINEAR:
        best = candidates[LINEAR]
    return GrowthFit(exponent, rate, log_coef, best, regime, residuals)


def fit_growth(curve: InfoCurve) -> GrowthFit:
    """Classify an information curve as Linear, Power, Logarithmic or Indeterminate.

    Each law is fitted by least squares in its own coordinates and scored
    by the RMS of ``log2(predicted / observed)``. A law wins only when its
    score is at most ``0.8`` times the runner-up's.
    """
    return fit_growth_arrays(curve.schedule, curve.values)


def k_indicator(curve: InfoCurve, f: ScalingLaw, tail_fraction: float = 0.5) -> float:
    """Finite-``n`` proxy for ``limsup I(n) / f(n)``.

    Returns the maximum ratio over the last ``tail_fraction`` of the
    schedule, or ``inf`` when the ratio increases at every tail step and by
    more than 10% per decade overall.
    """
    if not 0 < tail_fraction <= 1:
        raise ConfigError("tail_fraction must lie in (0, 1]")
    n = np.asarray(curve.schedule, dtype=float)
    ratios = np.asarray(curve.values, dtype=float) / f(n)
    start = min(len(n) - 1, int(math.floor(len(n) * (1 - tail_fraction))))
    tail_n, tail = n[start:], ratios[start:]
    if len(tail) >= 2 and np.all(np.diff(tail) > 0) and tail[0] > 0:
        decades = math.log10(tail_n[-1] / tail_n[0])
        if tail[-1] / tail[0] > DIVERGENCE_PER_DECADE**decades:
            return math.inf
    return float(tail.max())


def indicator_under(fit: GrowthFit, curve: InfoCurve, f: ScalingLaw, tail_fraction: float = 0.5) -> float | None:
    """Indicator value under clock ``f`` given the fitted regime.

    ``0`` if the regime grows slower than ``f``, the tail ratio if it
    matches, ``inf`` if faster, ``None`` when the regime is Indeterminate.
    """
    order = fit.growth_order()
    if order is None:
        return None
    clock = f.growth_order()
    if fit.regime == POWER and f.kind == "Power" and abs(fit.exponent - f.parameter) < 0.1:
        # fitted exponents are only known to within the estimator slack
        return k_indicator(curve, f, tail_fraction)
    if order < clock:
        return 0.0
    if order > clock:
        return math.inf
    return k_indicator(curve, f, tail_fraction)


class GrowthLawRegressor(RegressorMixin, BaseEstimator):
    """Estimator wrapper around :func:`fit_growth_arrays`.

    ``X`` is a column of sequence lengths, ``y`` the matching bit counts.
    ``predict`` evaluates the winning law (the power law when the regime is
    Indeterminate).
    """

    def __init__(self, margin=MARGIN):
        self.margin = margin

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_samples=6)
        n = X[:, 0]
        fit = fit_growth_arrays(n, y, self.margin)
        lg = np.log2(n)
        self.fit_ = fit
        self.regime_ = fit.regime
        self.exponent_ = fit.exponent
        self.rate_ = fit.rate
        self.residual_ = fit.residual
        self._coef = {
            LINEAR: np.polyfit(n, y, 1),
            POWER: np.polyfit(lg, np.log2(np.maximum(y, 1.0)), 1),
            LOGARITHMIC: np.polyfit(lg, y, 1),
        }
        return self

    def predict(self, X):
        check_is_fitted(self, "fit_")
        n = np.asarray(X, dtype=float).reshape(len(X), -1)[:, 0]
        if self.regime_ == LINEAR:
            return np.polyval(self._coef[LINEAR], n)
        if self.regime_ == LOGARITHMIC:
            return np.polyval(self._coef[LOGARITHMIC], np.log2(n))
        return 2.0 ** np.polyval(self._coef[POWER], np.log2(n))


# ----------------------------------------------------------------------
# per-epsilon profiles


@dataclass(frozen=True)
class ProfileRow:
    epsilon: object
    curve: InfoCurve
    fit: GrowthFit


@dataclass(frozen=True)
class ComplexityProfile:
    rows: tuple
    estimator_id: str

    @property
    def sup_exponent(self) -> float:
        return max(r.fit.exponent for r in self.rows)

    @property
    def sup_rate(self) -> float:
        return max(r.fit.rate for r in self.rows)

    @property
    def monotone(self) -> bool:
        """True when the fitted rate does not increase as epsilon grows."""
        ordered = sorted(self.rows, key=lambda r: as_rational(r.epsilon))
        rates = [r.fit.rate for r in ordered]
        return all(b <= a + 1e-12 for a, b in zip(rates, rates[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epsilon", "n", "bits", "estimator", "regime", "exponent", "rate", "residual"])
        for row in self.rows:
            for n, b in zip(row.curve.schedule, row.curve.values):
                w.writerow([
                    str(as_rational(row.epsilon)), n, b, row.curve.estimator_id,
                    row.fit.regime, repr(row.fit.exponent), repr(row.fit.rate), repr(row.fit.residual),
                ])
        return buf.getvalue()


def orbit_complexity_profile(
    map: MapDescriptor,
    x0,
    epsilons: Sequence,
    n_max: int,
    estimator: str = PAIRGROWTH,
    schedule: Sequence[int] | None = None,
    error_exponent: int = 52,
    threads: int = 1,
) -> ComplexityProfile:
    """Fit the information growth of ``epsilon``-quantized orbits of ``x0``.

    One orbit of length ``n_max`` is computed and quantized at every
    ``epsilon``; rows are independent and may run on ``threads`` workers.
    """
    eps = [as_rational(e) for e in epsilons]
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("epsilon list must be strictly decreasing")
    schedule = tuple(schedule) if schedule is not None else geometric_schedule(n_max)
    orbit = trajectory(map, x0, n_max, error_exponent)

    def row(e) -> ProfileRow:
        seq = quantized_orbit(orbit, e)
        curve = info_curve(seq, schedule, estimator)
        return ProfileRow(e, curve, fit_growth(curve))

    rows = _ordered_map(row, eps, threads)
    return ComplexityProfile(tuple(rows), estimator)


def _ordered_map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
