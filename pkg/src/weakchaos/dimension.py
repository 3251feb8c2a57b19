"""Greedy nets, box-counting and local measure dimensions, point complexity.

Nets are built by a single scan in input order: a point becomes a center
iff it is at least ``eps`` from every earlier center. Distances are
absolute differences in 1D and the max-coordinate metric in 2D.
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
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .catalog import MapDescriptor, as_rational, trajectory
from .errors import ConfigError, CoverageError, ScaleError, SampleSizeError

COVER_FACTOR = 3
MIN_SCALE_SPAN = 64


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ConfigError("points must be a nonempty array of 1D or 2D coordinates")
    return pts


# ----------------------------------------------------------------------
# greedy nets


@dataclass(frozen=True, eq=False)
class NetIndex:
    epsilon: float
    centers: np.ndarray
    indices: np.ndarray

    @property
    def count(self) -> int:
        return len(self.indices)

    def check(self, points) -> None:
        """Assert pairwise separation ``>= eps`` and ``3 eps`` coverage of ``points``."""
        pts = _as_points(points)
        c = _as_points(self.centers)
        tree = cKDTree(c)
        if len(c) > 1:
            gap, _ = tree.query(c, k=2, p=np.inf)
            if np.any(gap[:, 1] < self.epsilon):
                raise AssertionError(f"centers closer than eps={self.epsilon:g}")
        reach, _ = tree.query(pts, p=np.inf)
        if np.any(reach >= COVER_FACTOR * self.epsilon):
            raise AssertionError("a point lies 3*eps or farther from every center")


def greedy_net(points, epsilon: float) -> NetIndex:
    """Scan ``points`` in order, keeping those at distance ``>= epsilon`` from all kept ones."""
    eps = float(epsilon)
    if eps <= 0:
        raise ConfigError("epsilon must be positive")
    pts = _as_points(points)
    cells: dict = {}
    kept: list[int] = []
    if pts.shape[1] == 1:
        for i, v in enumerate(pts[:, 0].tolist()):
            key = math.floor(v / eps)
            if any(abs(c - v) < eps for k in (key - 1, key, key + 1) for c in cells.get(k, ())):
                continue
            cells.setdefault(key, []).append(v)
            kept.append(i)
    else:
        offsets = [(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1)]
        for i, (u, v) in enumerate(pts.tolist()):
            ku, kv = math.floor(u / eps), math.floor(v / eps)
            if any(
                max(abs(cu - u), abs(cv - v)) < eps
                for du, dv in offsets
                for cu, cv in cells.get((ku + du, kv + dv), ())
            ):
                continue
            cells.setdefault((ku, kv), []).append((u, v))
            kept.append(i)
    centers = pts[kept]
    return NetIndex(eps, centers if np.ndim(points) > 1 else centers[:, 0], np.asarray(kept, dtype=np.int64))


# ----------------------------------------------------------------------
# box dimension


@dataclass(frozen=True)
class DimensionEstimate:
    upper: float
    lower: float
    lsq_slope: float
    scales: tuple
    counts: tuple
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epsilon", "count"])
        for e, c in zip(self.scales, self.counts):
            w.writerow([repr(float(e)), c])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"upper": self.upper, "lower": self.lower, "lsq_slope": self.lsq_slope}, sort_keys=True)


def _check_scales(scales) -> np.ndarray:
    s = np.asarray([float(e) for e in scales])
    if s.size < 5:
        raise SampleSizeError(f"need at least 5 scales (got {s.size})")
    if np.any(s <= 0) or np.any(np.diff(s) >= 0):
        raise ConfigError("scales must be positive and strictly decreasing")
    if s[0] / s[-1] < MIN_SCALE_SPAN:
        raise SampleSizeError(f"scales must span a factor of at least {MIN_SCALE_SPAN}")
    return s


def slope_summary(scales: np.ndarray, values: np.ndarray, ambient: float) -> tuple[float, float, float]:
    """(max, min) consecutive slopes of ``log values`` vs ``-log scale`` over the
    finest half of the scales, and the least-squares slope over all scales."""
    x = -np.log2(scales)
    y = np.log2(values)
    half = max(2, math.ceil(len(x) / 2))
    xs, ys = x[-half:], y[-half:]
    slopes = np.diff(ys) / np.diff(xs)
    lsq = float(np.polyfit(x, y, 1)[0])
    hi = float(np.clip(slopes.max(), 0.0, ambient + 0.2))
    lo = float(np.clip(slopes.min(), 0.0, ambient + 0.2))
    return hi, lo, lsq


def box_dimension(points, scales: Sequence[float], resolution: float = 0.0) -> DimensionEstimate:
    """Upper, lower and least-squares box-counting slopes from greedy-net counts.

    ``resolution`` is the positional accuracy of the points; scales finer
    than four times it are rejected.
    """
    s = _check_scales(scales)
    if resolution and s[-1] < 4 * resolution:
        raise ScaleError(f"scale {s[-1]:g} is below four times the point resolution {resolution:g}")
    pts = _as_points(points)
    counts = np.array([greedy_net(pts, e).count for e in s], dtype=float)
    upper, lower, lsq = slope_summary(s, counts, pts.shape[1])
    return DimensionEstimate(upper, lower, lsq, tuple(float(e) for e in s), tuple(int(c) for c in counts))


class BoxCountingDimension(BaseEstimator):
    """Estimator wrapper: ``fit(X)`` counts greedy nets of the rows of ``X``."""

    def __init__(self, scales=(2.0**-2, 2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6, 2.0**-7, 2.0**-8), resolution=0.0):
        self.scales = scales
        self.resolution = resolution

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=False)
        est = box_dimension(X, self.scales, self.resolution)
        self.estimate_ = est
        self.upper_, self.lower_, self.lsq_slope_ = est.upper, est.lower, est.lsq_slope
        self.counts_ = np.asarray(est.counts)
        return self

    def transform(self, X):
        check_is_fitted(self, "estimate_")
        return np.array([[self.upper_, self.lower_, self.lsq_slope_]])


def orbit_closure_dimension(map: MapDescriptor, x0, n: int, scales: Sequence[float], error_exponent: int = 52) -> DimensionEstimate:
    """Box dimension of a finite orbit segment of ``x0``."""
    orbit = trajectory(map, x0, n, error_exponent)
    est = box_dimension(orbit.points, scales, orbit.error_bound)
    return DimensionEstimate(est.upper, est.lower, est.lsq_slope, est.scales, est.counts, {"orbit_length": n})


def domain_dimension(map: MapDescriptor, scales: Sequence[float]) -> DimensionEstimate:
    """Box dimension of the map's whole domain, sampled on a regular grid.

    The grid spacing equals the finest scale, so every net count is that of
    the domain itself rather than of a random sample of it.
    """
    s = _check_scales(scales)
    lo, hi = (float(b) for b in map.bounds)
    steps = math.ceil((hi - lo) / s[-1])
    axis = np.linspace(lo, hi, steps + 1)
    if map.dim == 2:
        pts = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    else:
        pts = axis
    est = box_dimension(pts, s)
    return DimensionEstimate(est.upper, est.lower, est.lsq_slope, est.scales, est.counts, {"grid_points": len(pts)})


# ----------------------------------------------------------------------
# local measure dimension


@dataclass(frozen=True)
class LocalDimensionEstimate:
    value: float
    lsq_slope: float
    scales: tuple
    masses: tuple
    floored: bool


def local_measure_dimension(map: MapDescriptor, x, n_orbit: int, scales: Sequence[float], error_exponent: int = 52) -> LocalDimensionEstimate:
    """Lower local dimension of the empirical orbit measure of ``x`` at ``x``.

    The mass of ``B(x, eps)`` is the fraction of the first ``n_orbit + 1``
    orbit points strictly within ``eps`` of ``x``; empty balls are floored
    at ``1 / n_orbit`` and flagged.
    """
    s = _check_scales(scales)
    orbit = trajectory(map, x, n_orbit, error_exponent)
    pts = orbit.points if orbit.points.ndim == 2 else orbit.points[:, None]
    base = pts[0]
    dist = np.max(np.abs(pts - base), axis=1)
    if map.kind == "Rotation":
        dist = np.minimum(dist, 1.0 - dist)
    total = len(pts)
    hits = np.array([np.count_nonzero(dist < e) for e in s], dtype=float)
    floored = bool(np.any(hits == 0))
    masses = np.maximum(hits, 1.0) / total
    # slope of log mass against log eps equals the slope of log(1/mass) against -log eps
    upper, lower, lsq = slope_summary(s, 1.0 / masses, pts.shape[1])
    return LocalDimensionEstimate(lower, lsq, tuple(float(e) for e in s), tuple(float(m) for m in masses), floored)


# ----------------------------------------------------------------------
# point complexity


def scale_bits(epsilon) -> int:
    """Bits needed to state the scale: ``ceil(log2 log2(1/eps))``, at least 0."""
    eps = as_rational(epsilon)
    if eps >= Fraction(1, 2):
        return 0
    lg = math.log2(eps.denominator) - math.log2(eps.numerator)
    return max(0, math.ceil(math.log2(lg) - 1e-12))


def index_bits(index: int) -> int:
    """``ceil(log2(1 + index))`` for a 0-based enumeration index."""
    return index.bit_length() if index > 0 else 0


@dataclass(frozen=True)
class PointComplexityCurve:
    scales: tuple
    bits: tuple
    indices: tuple

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epsilon", "bits"])
        for e, b in zip(self.scales, self.bits):
            w.writerow([repr(float(e)), b])
        return buf.getvalue()


def point_complexity_curve(points, x, scales: Sequence[float]) -> PointComplexityCurve:
    """Description length of ``x`` at each scale via its greedy-net index.

    ``bits(eps)`` is the bit length of the 0-based index of the first net
    center within ``3 eps`` of ``x`` plus the bits stating ``eps``.
    """
    pts = _as_points(points)
    target = np.atleast_1d(np.asarray(x, dtype=float))
    bits, indices = [], []
    for e in scales:
        net = greedy_net(pts, float(e))
        centers = net.centers if net.centers.ndim == 2 else net.centers[:, None]
        close = np.flatnonzero(np.max(np.abs(centers - target), axis=1) < COVER_FACTOR * float(e))
        if close.size == 0:
            raise CoverageError(f"x={x!r} is not within 3*eps of any center at eps={float(e):g}")
        idx = int(close[0])
        indices.append(idx)
        bits.append(index_bits(idx) + scale_bits(as_rational(float(e)) if not isinstance(e, Fraction) else e))
    return PointComplexityCurve(tuple(scales), tuple(bits), tuple(indices))


def dyadic_index(x, epsilon) -> int:
    """Net index of ``x`` for the level-ordered dyadic enumeration of ``[0, 1]``.

    The enumeration lists ``0, 1`` then, for level ``l >= 1``, the odd
    multiples ``(2i + 1) / 2**l`` at indices ``2**(l-1) + 1 + i``. Its
    greedy net at ``eps`` is the grid of spacing ``2**-L`` with
    ``L = floor(log2(1/eps))``; the returned index is that of the first
    grid point strictly within ``3 eps`` of ``x``.
    """
    x, eps = as_rational(x), as_rational(epsilon)
    if not 0 <= x <= 1:
        raise CoverageError(f"x={x} outside [0, 1]")
    if eps <= 0:
        raise ConfigError("epsilon must be positive")
    reach = COVER_FACTOR * eps
    for idx, p in ((0, Fraction(0)), (1, Fraction(1))):
        if abs(p - x) < reach:
            return idx
    level_cap = max(0, (eps.denominator // eps.numerator).bit_length() - 1)
    for level in range(1, level_cap + 1):
        den = 1 << level
        # smallest odd numerator strictly above x - reach
        v = (x - reach) * den
        lo = max(v.numerator // v.denominator + 1, 1)
        if lo % 2 == 0:
            lo += 1
        if lo < den and abs(Fraction(lo, den) - x) < reach:
            return (1 << (level - 1)) + 1 + (lo - 1) // 2
    raise CoverageError(f"x={x} not covered at eps={eps}")


def dyadic_point_complexity(x, epsilon) -> int:
    """Point-complexity bits of ``x`` in ``[0, 1]`` under the dyadic enumeration."""
    return index_bits(dyadic_index(x, epsilon)) + scale_bits(epsilon)
