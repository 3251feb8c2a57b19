"""Radii of dynamical balls and sensitivity-regime fits.

``B(n, x, eps)`` is the set of points whose first ``n`` images stay within
``eps`` of the images of ``x``. The inner radius ``r`` is the largest
centred ball inside it and the outer radius ``R`` the smallest centred ball
containing it. Both are located by geometric scans and bisection along rays:
two rays in 1D, an 8-direction star in 2D.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from .catalog import (
    DOUBLING,
    IDENTITY,
    PL_MANNEVILLE,
    ROTATION,
    SKEW_SHIFT,
    MapDescriptor,
    _check_domain,
    _wrap2,
    as_rational,
    iterate,
    modulus,
)
from .complexity import MARGIN
from .errors import ConfigError, PrecisionError, SampleSizeError

NONE = "None"
POWER_LAW = "PowerLaw"
STRETCHED_EXP = "StretchedExp"
EXPONENTIAL = "Exponential"
INDETERMINATE = "Indeterminate"

BISECTION_DEPTH = 40
RELATIVE_TOLERANCE = Fraction(1, 1 << 10)
SCAN_DEPTH = 60
GRID_POINTS = 64
STRETCH_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))

_RAYS_1D = ((1,), (-1,))
_RAYS_2D = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))


# ----------------------------------------------------------------------
# orbit probes


def _exact_stepper(m: MapDescriptor):
    if m.kind == IDENTITY:
        return lambda y: y
    if m.kind == ROTATION:
        t = m.params["t"]

        def rotate(y):
            y = y + t
            return y - 1 if y >= 1 else y

        return rotate
    if m.kind == DOUBLING:

        def double(y):
            y = 2 * y
            return y - math.floor(y)

        return double
    if m.kind == SKEW_SHIFT:
        return lambda p: (_wrap2(p[0] + p[1]), p[1])
    raise ConfigError(f"no exact stepper for {m.label}")


class _MannevilleState:
    """Exact PLManneville (z = 2) orbit in branch coordinates.

    A point of branch ``k >= 1`` is ``a (k + theta) / (k (k + 1))`` and
    moves to branch ``k - 1`` keeping ``theta``; only the re-injection from
    ``[a, 1]`` needs rational arithmetic.
    """

    def __init__(self, a: Fraction):
        self.a = a
        self.af = float(a)

    def decompose(self, x: Fraction):
        a = self.a
        if x == 0:
            return -1, Fraction(0)
        if x >= a:
            return 0, (x - a) / (1 - a)
        q = a / x
        k = -(-q.numerator // q.denominator) - 1
        lo, hi = a / (k + 1), a / k
        return k, (x - lo) / (hi - lo)

    def value(self, k: int, theta: Fraction) -> Fraction:
        if k < 0:
            return Fraction(0)
        if k == 0:
            return self.a + theta * (1 - self.a)
        return self.a * (k + theta) / (k * (k + 1))

    def value_float(self, k: int, theta: float) -> float:
        if k < 0:
            return 0.0
        if k == 0:
            return self.af + theta * (1.0 - self.af)
        return self.af * (k + theta) / (k * (k + 1.0))


class _Probe:
    """Answers ``stays_close`` queries for a fixed base point ``x``.

    Exact-capable maps are iterated in rational arithmetic. Other maps use
    precision-tracked orbits whose rounding error is charged against
    ``eps`` before comparing.
    """

    def __init__(self, m: MapDescriptor, x, epsilon, n_max: int):
        self.map = m
        self.eps = as_rational(epsilon)
        if self.eps <= 0:
            raise ConfigError("epsilon must be positive")
        self.n_max = n_max
        self.exact = m.exact_capable
        self.x = tuple(as_rational(c) for c in x) if m.dim == 2 else as_rational(x)
        _check_domain(m, self.x)
        self.pl = _MannevilleState(m.params["a"]) if m.kind == PL_MANNEVILLE and self.exact else None
        if self.exact:
            # radii can shrink by the map's expansion at every step
            self.depth = SCAN_DEPTH + n_max * modulus(m).shift
            self.floor = self.eps / (1 << self.depth)
            step = _exact_stepper(m) if self.pl is None else None
            self.scaled = self.pl is None and self._setup_scaled()
            if self.scaled:
                pts = None
            elif self.pl is None:
                pts = [self.x]
                for _ in range(n_max):
                    pts.append(step(pts[-1]))
                self._step = step
            else:
                pts = [self.x]
                k, th = self.pl.decompose(self.x)
                for _ in range(n_max):
                    k, th = self._pl_advance(k, th)
                    pts.append(self.pl.value(k, th))
            self.x_orbit = pts
            if pts is not None:
                self.x_float = np.array([[float(c) for c in p] if m.dim == 2 else float(p) for p in pts])
        else:
            self.scaled = False
            self.error_exponent = max(24, math.ceil(math.log2(8 / self.eps)) + 24)
            orbit = iterate(m, self.x, max(n_max, 1), self.error_exponent)
            self.x_float = orbit.points
            self.slack = 2.0 * orbit.error_bound
            self.floor = Fraction(4, 1 << self.error_exponent)

    def _setup_scaled(self) -> bool:
        """Switch to integers scaled by ``2**B`` when every input is dyadic.

        Doubling orbits of generic points carry one random bit per step, so
        their starting points have huge power-of-two denominators; integer
        arithmetic avoids the gcd work of rational arithmetic there.
        """
        coords = self.x if self.map.dim == 2 else (self.x,)
        values = list(coords) + [self.eps]
        if self.map.kind == ROTATION:
            values.append(self.map.params["t"])
        bits = [_dyadic_bits(v) for v in values]
        if any(b is None for b in bits):
            return False
        if self.map.kind == DOUBLING:
            # bits of x below the probe's resolution shift out of every
            # comparison within n_max steps; dropping them only moves x by
            # far less than the smallest radius the search can report
            keep = bits[1] + self.depth + BISECTION_DEPTH + 64
            if bits[0] > keep:
                self.x = Fraction(math.floor(self.x * (1 << keep)), 1 << keep)
                coords = (self.x,)
                bits[0] = keep
        B = max(bits) + self.depth + BISECTION_DEPTH + 16
        self.B = B
        one = 1 << B
        self.E = _scaled(self.eps, B)
        kind = self.map.kind
        if kind == IDENTITY:
            step = lambda y: y  # noqa: E731
        elif kind == ROTATION:
            t = _scaled(self.map.params["t"], B)

            def step(y):
                y += t
                return y - one if y >= one else y

        elif kind == DOUBLING:
            mask = one - 1

            def step(y):
                return (y << 1) & mask

        else:

            def step(p):
                w = p[0] + p[1]
                if w >= one:
                    w -= 2 * one
                elif w < -one:
                    w += 2 * one
                return (w, p[1])

        self._int_step = step
        start = tuple(_scaled(c, B) for c in coords) if self.map.dim == 2 else _scaled(self.x, B)
        orbit = [start]
        for _ in range(self.n_max):
            orbit.append(step(orbit[-1]))
        self.X = orbit
        return True

    def _int_distance(self, y, x):
        if self.map.dim == 2:
            return max(abs(y[0] - x[0]), abs(y[1] - x[1]))
        d = abs(y - x)
        if self.map.kind == ROTATION:
            d = min(d, (1 << self.B) - d)
        return d

    def stays_along(self, ray, rho: Fraction, n: int) -> bool:
        """``stays`` for the point at distance ``rho`` from ``x`` along ``ray``."""
        if not self.scaled:
            return self.stays(self.along(ray, rho), n)
        if n > self.n_max:
            raise ConfigError(f"horizon {n} beyond the probe's {self.n_max}")
        off = _scaled(rho, self.B)
        if off is None:
            return self.stays(self.along(ray, rho), n)
        x0 = self.X[0]
        y = (x0[0] + ray[0] * off, x0[1] + ray[1] * off) if self.map.dim == 2 else x0 + ray[0] * off
        return self._stays_scaled(y, n)

    def _stays_scaled(self, y, n: int) -> bool:
        step, E, X = self._int_step, self.E, self.X
        for i in range(n + 1):
            if i:
                y = step(y)
            if self._int_distance(y, X[i]) > E:
                return False
        return True

    def _pl_advance(self, k, theta):
        if k < 0:
            return k, theta
        if k >= 1:
            return k - 1, theta
        return self.pl.decompose(theta)

    def _distance(self, y, i: int):
        return self.map.distance(y, self.x_orbit[i])

    def stays(self, y, n: int) -> bool:
        if n > self.n_max:
            raise ConfigError(f"horizon {n} beyond the probe's {self.n_max}")
        if not self.exact:
            return self._stays_tracked(y, n)
        eps = self.eps
        if self.pl is not None:
            return self._stays_pl(y, n)
        if self.scaled:
            y_scaled = tuple(_scaled(c, self.B) for c in y) if self.map.dim == 2 else _scaled(y, self.B)
            if y_scaled is not None and (self.map.dim == 1 or None not in y_scaled):
                return self._stays_scaled(y_scaled, n)
            raise ConfigError("point is not representable on the dyadic working grid")
        step = self._step
        for i in range(n + 1):
            if i:
                y = step(y)
            if self._distance(y, i) > eps:
                return False
        return True

    def _stays_pl(self, y: Fraction, n: int) -> bool:
        pl, eps, epsf = self.pl, self.eps, float(self.eps)
        band = 1e-12 * max(epsf, 1e-300) + 1e-300
        xf = self.x_float
        k, th = pl.decompose(y)
        thf = float(th)
        for i in range(n + 1):
            if i:
                if k == 0:
                    k, th = pl.decompose(th)
                    thf = float(th)
                elif k > 0:
                    k -= 1
            d = abs(pl.value_float(k, thf) - xf[i])
            if d > epsf + band:
                return False
            if d >= epsf - band and abs(pl.value(k, th) - self.x_orbit[i]) > eps:
                return False
        return True

    def _stays_tracked(self, y, n: int) -> bool:
        try:
            orbit = iterate(self.map, y, max(n, 1), self.error_exponent)
        except PrecisionError:
            # an orbit that cannot be certified is treated as escaping,
            # which keeps inner radii conservative
            return False
        diff = np.abs(orbit.points[: n + 1] - self.x_float[: n + 1])
        if self.map.kind == ROTATION:
            diff = np.minimum(diff, 1.0 - diff)
        if diff.ndim == 2:
            diff = diff.max(axis=1)
        return bool(np.all(diff + self.slack <= float(self.eps)))

    # geometry of rays

    def rays(self):
        return _RAYS_2D if self.map.dim == 2 else _RAYS_1D

    def along(self, ray, rho: Fraction):
        if self.map.dim == 2:
            return (self.x[0] + rho * ray[0], self.x[1] + rho * ray[1])
        return self.x + rho * ray[0]

    def reach(self, ray) -> Fraction:
        """Largest ``rho`` keeping ``x + rho * ray`` inside the domain."""
        lo, hi = self.map.bounds
        coords = self.x if self.map.dim == 2 else (self.x,)
        limits = []
        for c, d in zip(coords, ray):
            if d > 0:
                limits.append((hi - c) / d)
            elif d < 0:
                limits.append((c - lo) / -d)
        reach = min(limits)
        # keep radii on a coarse dyadic grid: points with huge denominators
        # would otherwise drag every later comparison through big gcds
        bits = self.eps.denominator.bit_length() + getattr(self, "depth", SCAN_DEPTH) + BISECTION_DEPTH + 8
        if reach.denominator.bit_length() > bits:
            reach = Fraction((reach.numerator << bits) // reach.denominator, 1 << bits)
        return reach


def _dyadic_bits(q: Fraction):
    den = q.denominator
    return den.bit_length() - 1 if den & (den - 1) == 0 else None


def _scaled(q: Fraction, bits: int):
    """``q * 2**bits`` as an int, or ``None`` if that is not an integer."""
    b = _dyadic_bits(q)
    if b is None or b > bits:
        return None
    return q.numerator << (bits - b)


def stays_close(map: MapDescriptor, x, y, n: int, epsilon) -> bool:
    """True iff the first ``n`` images of ``y`` stay within ``epsilon`` of those of ``x``."""
    if n < 0:
        raise ConfigError("n must be nonnegative")
    probe = _Probe(map, x, epsilon, n)
    y = tuple(as_rational(c) for c in y) if map.dim == 2 else as_rational(y)
    _check_domain(map, y)
    return probe.stays(y, n)


# ----------------------------------------------------------------------
# radii


@dataclass(frozen=True)
class RadiusEstimate:
    value: Fraction
    floored: bool = False

    def __float__(self):
        return float(self.value)


def _bisect(pred, lo: Fraction, hi: Fraction) -> Fraction:
    """Shrink ``[lo, hi]`` with ``pred(lo)`` true and ``pred(hi)`` false."""
    for _ in range(BISECTION_DEPTH):
        if hi - lo <= lo * RELATIVE_TOLERANCE:
            break
        mid = (lo + hi) / 2
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _ray_inner(probe: _Probe, ray, n: int, cap: Fraction | None = None):
    """Radius along one ray; ``None`` when the whole in-domain segment stays."""
    reach = probe.reach(ray)
    if reach == 0:
        return None, False

    def pred(rho):
        return probe.stays_along(ray, rho, n)

    top = min(probe.eps, reach)
    if cap is not None:
        top = min(top, cap)
    if pred(top):
        return (None if top == reach else top), False
    j = _first_staying_octave(lambda j: pred(top / (1 << j)), (top / probe.floor).__floor__().bit_length())
    if j is None:
        return probe.floor, True
    lo = top / (1 << j)
    return _bisect(pred, lo, 2 * lo), False


def _first_staying_octave(stays_at, limit: int):
    """Smallest ``j`` in ``1..limit`` with ``stays_at(j)``, by galloping then binary search.

    Relies on staying being monotone in ``j`` (smaller radii stay).
    """
    fail, j = 0, 1
    while True:
        j = min(j, limit)
        if stays_at(j):
            break
        if j == limit:
            return None
        fail, j = j, 2 * j
    ok = j
    while ok - fail > 1:
        mid = (ok + fail) // 2
        if stays_at(mid):
            ok = mid
        else:
            fail = mid
    return ok


def _inner(probe: _Probe, n: int, cap: Fraction | None = None):
    radii = []
    floored = False
    for ray in probe.rays():
        rho, flag = _ray_inner(probe, ray, n, cap)
        floored |= flag
        if rho is not None:
            radii.append(rho)
    value = min(radii) if radii else min(probe.eps, cap) if cap is not None else probe.eps
    return value, floored, radii


def inner_radius(map: MapDescriptor, x, n: int, epsilon) -> RadiusEstimate:
    """Largest radius whose tested ball stays within ``epsilon`` for ``n`` steps.

    Per ray, a geometric scan over ``epsilon / 2**j`` (galloping in ``j``)
    finds the first staying radius, then bisection refines it to relative tolerance ``2**-10``.
    The minimum over rays is returned; it is a lower bound whenever escape
    is monotone along each ray (exact for monotone-branch 1D maps).
    """
    probe = _Probe(map, x, epsilon, n)
    value, floored, _ = _inner(probe, n)
    return RadiusEstimate(value, floored)


def _ray_outer(probe: _Probe, ray, n: int, start: Fraction) -> Fraction:
    reach = probe.reach(ray)
    if reach == 0:
        return Fraction(0)

    def pred(rho):
        return probe.stays_along(ray, rho, n)

    grid = [reach * i / GRID_POINTS for i in range(1, GRID_POINTS + 1)]
    doublings = []
    rho = start
    while 0 < rho < reach:
        doublings.append(rho)
        rho *= 2
    # every grid point is tested; along the doubling ladder the staying
    # points form a prefix under monotone escape, so binary search suffices
    staying = [c for c in grid if pred(c)]
    lo, hi = 0, len(doublings)
    while lo < hi:
        mid = (lo + hi) // 2
        if pred(doublings[mid]):
            lo = mid + 1
        else:
            hi = mid
    if lo:
        staying.append(doublings[lo - 1])
    ordered = sorted(set(grid) | set(doublings))
    best = max(staying, default=Fraction(0))
    if best == 0:
        best = start if start > 0 and pred(start) else Fraction(0)
    above = [c for c in ordered if c > best]
    if not above or best == 0:
        return best
    return _bisect(pred, best, above[0])


def _outer(probe: _Probe, n: int, inner_value: Fraction) -> Fraction:
    return max(_ray_outer(probe, ray, n, inner_value) for ray in probe.rays())


def outer_radius(map: MapDescriptor, x, n: int, epsilon) -> RadiusEstimate:
    """Distance of the farthest staying point found along the ray star.

    Candidates are the inner radius doubled repeatedly plus a 64-point
    linear grid up to the domain edge; the farthest staying candidate is
    refined by bisection towards the next candidate outward.
    """
    probe = _Probe(map, x, epsilon, n)
    inner_value, floored, _ = _inner(probe, n)
    return RadiusEstimate(max(_outer(probe, n, inner_value), inner_value), floored)


# ----------------------------------------------------------------------
# curves and fits


def neglog2(q: Fraction) -> float:
    q = as_rational(q)
    return math.log2(q.denominator) - math.log2(q.numerator)


@dataclass(frozen=True)
class SensitivityCurve:
    x: object
    epsilon: Fraction
    schedule: tuple
    r_values: tuple
    R_values: tuple
    floored: tuple = ()
    metadata: dict = field(default_factory=dict)

    @property
    def neglog_r(self) -> np.ndarray:
        return np.array([neglog2(v) for v in self.r_values])

    @property
    def neglog_R(self) -> np.ndarray:
        return np.array([neglog2(v) for v in self.R_values])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "r", "R", "neglog_r", "neglog_R"])
        for n, r, big, nr, nbig in zip(self.schedule, self.r_values, self.R_values, self.neglog_r, self.neglog_R):
            w.writerow([n, str(r), str(big), repr(float(nr)), repr(float(nbig))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, x=None, epsilon=None) -> "SensitivityCurve":
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls(
            x,
            as_rational(epsilon) if epsilon is not None else None,
            tuple(int(r["n"]) for r in rows),
            tuple(Fraction(r["r"]) for r in rows),
            tuple(Fraction(r["R"]) for r in rows),
        )


def sensitivity_curve(map: MapDescriptor, x, epsilon, schedule: Sequence[int]) -> SensitivityCurve:
    """Inner and outer radii at every horizon of an increasing ``schedule``.

    Radii are made nonincreasing along the schedule by a running minimum;
    this keeps every reported ``r`` a valid lower bound because the
    staying sets are nested in ``n``.
    """
    schedule = tuple(int(n) for n in schedule)
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])) or schedule[0] < 0:
        raise ConfigError("schedule must be a strictly increasing list of nonnegative horizons")
    probe = _Probe(map, x, epsilon, schedule[-1])
    r_vals, big_vals, flags = [], [], []
    prev_r = prev_big = None
    for n in schedule:
        r, floored, _ = _inner(probe, n, prev_r)
        big = max(_outer(probe, n, r), r)
        if prev_big is not None:
            big = min(big, prev_big)
        prev_r, prev_big = r, big
        r_vals.append(r)
        big_vals.append(big)
        flags.append(floored)
    meta = {"rays": len(probe.rays()), "exact": probe.exact}
    if map.dim == 2:
        meta["ray_star_heuristic"] = True
    x_stored = probe.x
    return SensitivityCurve(x_stored, probe.eps, schedule, tuple(r_vals), tuple(big_vals), tuple(flags), meta)


@dataclass(frozen=True)
class SensitivityFit:
    regime: str
    coefficient: float
    residual: float
    beta: float | None = None
    epsilon: Fraction | None = None
    residuals: dict = field(default_factory=dict)

    def growth_order(self) -> tuple | None:
        """Order of growth of ``-log r``; comparable with ``ScalingLaw.growth_order``."""
        if self.regime == NONE:
            return (0.0, 0.0)
        if self.regime == POWER_LAW:
            return (0.0, 1.0)
        if self.regime == STRETCHED_EXP:
            return (self.beta, 0.0)
        if self.regime == EXPONENTIAL:
            return (1.0, 0.0)
        return None

    def to_dict(self) -> dict:
        out = {
            "regime": self.regime,
            "coefficient": self.coefficient,
            "residual": self.residual,
            "epsilon": None if self.epsilon is None else str(self.epsilon),
        }
        if self.beta is not None:
            out["beta"] = self.beta
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _linear_fit(clock: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    coef, intercept = np.polyfit(clock, y, 1)
    resid = y - (coef * clock + intercept)
    return float(coef), float(np.sqrt(np.mean(resid**2)))


def fit_neglog(n: Sequence[float], neglog: Sequence[float], margin: float = MARGIN) -> SensitivityFit:
    """Classify ``-log2 radius`` against ``n``, ``n**beta`` and ``log2 n``."""
    n = np.asarray(n, dtype=float)
    y = np.asarray(neglog, dtype=float)
    if n.size < 6 or n.size != y.size:
        raise SampleSizeError(f"sensitivity fit needs at least 6 schedule points (got {n.size})")
    if np.ptp(y) < 1.0:
        return SensitivityFit(NONE, 0.0, float(np.std(y)), residuals={NONE: float(np.std(y))})
    if n.min() <= 0:
        raise ConfigError("sensitivity fit needs positive horizons")
    exp_coef, exp_res = _linear_fit(n, y)
    pow_coef, pow_res = _linear_fit(np.log2(n), y)
    stretched = [(b, *_linear_fit(n**b, y)) for b in STRETCH_GRID]
    beta, str_coef, str_res = min(stretched, key=lambda t: t[2])
    families = {
        EXPONENTIAL: (exp_res, exp_coef, None),
        POWER_LAW: (pow_res, pow_coef, None),
        STRETCHED_EXP: (str_res, str_coef, beta),
    }
    ranked = sorted(families.items(), key=lambda kv: kv[1][0])
    (best, (r0, coef, b)), (_, (r1, _, _)) = ranked[0], ranked[1]
    residuals = {k: v[0] for k, v in families.items()}
    if r0 <= margin * r1:
        return SensitivityFit(best, coef, r0, b, residuals=residuals)
    return SensitivityFit(INDETERMINATE, coef, r0, b, residuals=residuals)


def fit_sensitivity(curve: SensitivityCurve, which: str = "inner") -> SensitivityFit:
    """Regime and indicator coefficient of the inner (``r``) or outer (``R``) radii.

    Horizons ``n = 0`` are dropped since no clock is defined there.
    """
    if which not in ("inner", "outer"):
        raise ConfigError("which must be 'inner' or 'outer'")
    y = curve.neglog_r if which == "inner" else curve.neglog_R
    n = np.asarray(curve.schedule, dtype=float)
    keep = n > 0
    fit = fit_neglog(n[keep], y[keep])
    return SensitivityFit(fit.regime, fit.coefficient, fit.residual, fit.beta, curve.epsilon, fit.residuals)


def sup_over_epsilon(map: MapDescriptor, x, epsilons: Sequence, schedule: Sequence[int], which: str = "inner") -> SensitivityFit:
    """Fit at each ``epsilon`` and keep the largest coefficient among non-None regimes."""
    fits = [fit_sensitivity(sensitivity_curve(map, x, e, schedule), which) for e in epsilons]
    informative = [f for f in fits if f.regime != NONE] or fits
    return max(informative, key=lambda f: f.coefficient)


class SensitivityRegressor(RegressorMixin, BaseEstimator):
    """Estimator wrapper: ``X`` holds horizons, ``y`` the ``-log2`` radii."""

    def __init__(self, margin=MARGIN):
        self.margin = margin

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_samples=6)
        n = X[:, 0]
        fit = fit_neglog(n, y, self.margin)
        self.fit_ = fit
        self.regime_ = fit.regime
        self.coefficient_ = fit.coefficient
        clock = self._clock(n)
        self._coef = np.polyfit(clock, y, 1) if fit.regime != NONE else np.array([0.0, float(np.mean(y))])
        return self

    def _clock(self, n):
        fit = self.fit_
        if fit.regime == POWER_LAW:
            return np.log2(n)
        if fit.regime in (STRETCHED_EXP, INDETERMINATE) and fit.beta is not None:
            return n**fit.beta
        return n

    def predict(self, X):
        check_is_fitted(self, "fit_")
        n = np.asarray(X, dtype=float).reshape(len(X), -1)[:, 0]
        return np.polyval(self._coef, self._clock(n))
