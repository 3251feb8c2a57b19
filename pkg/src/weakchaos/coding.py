"""Symbolic coding of orbits: cover/partition coding and epsilon-grid quantization."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .catalog import Orbit, as_rational
from .errors import CodingError, ConfigError, PrecisionError


@dataclass(frozen=True, eq=False)
class SymbolSequence:
    """A finite string over ``{0, ..., alphabet_size - 1}``."""

    symbols: np.ndarray
    alphabet_size: int
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        sym = np.asarray(self.symbols, dtype=np.int64).ravel()
        if self.alphabet_size < 1:
            raise ConfigError("alphabet_size must be >= 1")
        if sym.size and (sym.min() < 0 or sym.max() >= self.alphabet_size):
            raise ConfigError("symbol outside the alphabet")
        object.__setattr__(self, "symbols", sym)

    def __len__(self):
        return int(self.symbols.size)

    def __eq__(self, other):
        return (
            isinstance(other, SymbolSequence)
            and self.alphabet_size == other.alphabet_size
            and np.array_equal(self.symbols, other.symbols)
        )

    def prefix(self, n: int) -> "SymbolSequence":
        return SymbolSequence(self.symbols[:n], self.alphabet_size, self.provenance)

    def to_text(self) -> str:
        """Digits when the alphabet fits in 0-9, comma-separated integers otherwise."""
        if self.alphabet_size <= 10:
            return "".join(map(str, self.symbols.tolist()))
        return ",".join(map(str, self.symbols.tolist()))

    def __str__(self):
        return self.to_text()

    @classmethod
    def from_text(cls, text: str, alphabet_size: int | None = None) -> "SymbolSequence":
        text = text.strip()
        if not text:
            symbols = np.zeros(0, dtype=np.int64)
        elif "," in text or (alphabet_size is not None and alphabet_size > 10):
            try:
                symbols = np.array([int(tok) for tok in text.split(",")], dtype=np.int64)
            except ValueError as exc:
                raise ConfigError(f"malformed symbol string: {exc}") from exc
        else:
            if not text.isdigit():
                raise ConfigError("symbol string must contain only digits or commas")
            symbols = np.frombuffer(text.encode("ascii"), dtype=np.uint8).astype(np.int64) - 48
        if alphabet_size is None:
            alphabet_size = int(symbols.max()) + 1 if symbols.size else 1
            alphabet_size = max(alphabet_size, 2)
        return cls(symbols, alphabet_size)


# ----------------------------------------------------------------------
# covers and partitions


def _default_bounds(dim):
    return (Fraction(-1), Fraction(1)) if dim == 2 else (Fraction(0), Fraction(1))


@dataclass(frozen=True)
class Cover:
    """An ordered finite family of open balls ``(center, radius)``."""

    elements: tuple
    dim: int = 1
    bounds: tuple = (Fraction(0), Fraction(1))

    @property
    def alphabet_size(self) -> int:
        return len(self.elements)

    @property
    def min_radius(self):
        return min(r for _, r in self.elements)

    def _centers(self):
        c = np.array([np.asarray(center, dtype=float) for center, _ in self.elements], dtype=float)
        return c.reshape(len(self.elements), self.dim)

    def covers_domain(self) -> bool:
        """Check the union contains a grid of step ``min_radius / 4`` over the domain."""
        lo, hi = float(self.bounds[0]), float(self.bounds[1])
        step = float(self.min_radius) / 4
        axis = np.arange(lo, hi + step / 2, step)
        axis[-1] = min(axis[-1], hi)
        grid = axis[:, None] if self.dim == 1 else np.stack(np.meshgrid(axis, axis), -1).reshape(-1, 2)
        centers = self._centers()
        radii = np.array([float(r) for _, r in self.elements])
        covered = np.zeros(len(grid), dtype=bool)
        for c, r in zip(centers, radii):
            covered |= np.max(np.abs(grid - c), axis=1) < r
        return bool(covered.all())

    def code(self, points: np.ndarray, error: float) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(len(points), self.dim)
        out = np.full(len(pts), -1, dtype=np.int64)
        for i, (c, r) in reversed(list(enumerate(zip(self._centers(), (float(r) for _, r in self.elements))))):
            inside = np.max(np.abs(pts - c), axis=1) < r - error
            out[inside] = i
        missing = np.flatnonzero(out < 0)
        if missing.size:
            raise CodingError(f"orbit step {int(missing[0])} lies in no cover element (error budget {error:g})")
        return out

    def to_json(self) -> str:
        def enc(v):
            return [str(as_rational(c)) for c in v] if self.dim == 2 else str(as_rational(v))

        return json.dumps([[enc(c), str(as_rational(r))] for c, r in self.elements])

    @classmethod
    def from_json(cls, text: str, dim: int = 1) -> "Cover":
        raw = json.loads(text)
        elems = []
        for center, radius in raw:
            c = tuple(as_rational(v) for v in center) if dim == 2 else as_rational(center)
            elems.append((c, as_rational(radius)))
        return cls(tuple(elems), dim, _default_bounds(dim))


@dataclass(frozen=True)
class Partition:
    """Half-open 1D cells ``[b_i, b_{i+1})`` over ``[lo, hi]``; the last cell is closed."""

    breakpoints: tuple

    def __post_init__(self):
        b = tuple(as_rational(v) for v in self.breakpoints)
        if len(b) < 2 or any(u >= v for u, v in zip(b, b[1:])):
            raise ConfigError("partition breakpoints must be strictly increasing (at least two)")
        object.__setattr__(self, "breakpoints", b)

    @property
    def alphabet_size(self) -> int:
        return len(self.breakpoints) - 1

    def code(self, points: np.ndarray, error: float = 0.0) -> np.ndarray:
        pts = np.asarray(points, dtype=float).ravel()
        inner = np.array([float(b) for b in self.breakpoints[1:-1]])
        lo, hi = float(self.breakpoints[0]), float(self.breakpoints[-1])
        if pts.size and (pts.min() < lo - error or pts.max() > hi + error):
            raise CodingError("orbit leaves the partitioned interval")
        return np.searchsorted(inner, pts, side="right").astype(np.int64)


def binary_partition(a=Fraction(1, 2)) -> Partition:
    return Partition((0, a, 1))


def symbolic_orbit(orbit: Orbit, cover) -> SymbolSequence:
    """Code each orbit point by the lowest-index cover element containing it.

    Ball membership is a strict interior test with the orbit error budget
    subtracted from the radius; partition cells are half-open.
    """
    symbols = cover.code(orbit.points, orbit.error_bound)
    return SymbolSequence(symbols, cover.alphabet_size, {"coding": "cover", "elements": cover.alphabet_size})


def grid_shape(epsilon, bounds=(0, 1)) -> int:
    lo, hi = as_rational(bounds[0]), as_rational(bounds[1])
    eps = as_rational(epsilon)
    return max(1, math.ceil((hi - lo) / eps))


def quantized_orbit(orbit: Orbit, epsilon, bounds=None) -> SymbolSequence:
    """Index of the side-``epsilon`` grid cell holding each orbit point.

    Cells are ``[lo + i*eps, lo + (i+1)*eps)`` with the top edge folded into
    the last cell. In 2D the two cell indices are paired row-major
    (``i_first * cells + i_second``).
    """
    eps = as_rational(epsilon)
    if eps <= 0:
        raise ConfigError("epsilon must be positive")
    m = orbit.error_exponent
    if m is not None and eps <= Fraction(4, 2**m):
        raise PrecisionError(f"epsilon={float(eps):g} is below the precision floor 2^-{m - 2}")
    if bounds is None:
        bounds = orbit.map.bounds if orbit.map is not None else _default_bounds(orbit.dim)
    lo = as_rational(bounds[0])
    cells = grid_shape(eps, bounds)
    idx = _cell_indices(orbit, eps, lo, m)
    idx = np.clip(idx, 0, cells - 1)
    if orbit.dim == 2:
        symbols = idx[:, 0] * cells + idx[:, 1]
        alphabet = cells * cells
    else:
        symbols, alphabet = idx, cells
    return SymbolSequence(symbols, alphabet, {"coding": "grid", "epsilon": str(eps)})


def _cell_indices(orbit: Orbit, eps: Fraction, lo: Fraction, m):
    dyadic = eps.numerator == 1 and eps.denominator & (eps.denominator - 1) == 0
    if m is not None and orbit.numerators is not None and dyadic:
        j = eps.denominator.bit_length() - 1
        if j <= m and lo.denominator == 1:
            nums = np.asarray(orbit.numerators)
            offset = int(lo) << m
            if nums.dtype == object:
                return np.array([(int(v) - offset) >> (m - j) for v in nums.ravel()], dtype=np.int64).reshape(nums.shape)
            return (nums.astype(np.int64) - offset) >> (m - j)
    return np.floor((orbit.points - float(lo)) / float(eps)).astype(np.int64)


def refine(cover: Cover, epsilon) -> Cover:
    """Uniform cover of the domain by balls of radius ``epsilon`` at spacing ``epsilon``."""
    eps = as_rational(epsilon)
    if eps <= 0:
        raise ConfigError("epsilon must be positive")
    lo, hi = cover.bounds
    count = math.ceil((hi - lo) / eps) + 1
    axis = [min(lo + i * eps, hi) for i in range(count)]
    if cover.dim == 1:
        elems = tuple((c, eps) for c in axis)
    else:
        elems = tuple(((u, v), eps) for u in axis for v in axis)
    return Cover(elems, cover.dim, cover.bounds)


def uniform_cover(epsilon, dim=1) -> Cover:
    return refine(Cover((), dim, _default_bounds(dim)), epsilon)


# ----------------------------------------------------------------------
# estimator-style wrapper


class GridQuantizer(TransformerMixin, BaseEstimator):
    """Transform points (one per row) into side-``epsilon`` cell symbols.

    ``fit`` records the grid geometry; ``transform`` returns an integer
    array of symbols, row-major paired in 2D.
    """

    def __init__(self, epsilon=0.25, lower=0.0, upper=1.0):
        self.epsilon = epsilon
        self.lower = lower
        self.upper = upper

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=False)
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        self.n_features_in_ = 1 if X.ndim == 1 else X.shape[1]
        self.cells_ = grid_shape(self.epsilon, (self.lower, self.upper))
        self.alphabet_size_ = self.cells_**self.n_features_in_
        return self

    def transform(self, X):
        check_is_fitted(self, "cells_")
        X = check_array(X, ensure_2d=False)
        orbit = Orbit.from_points(X)
        seq = quantized_orbit(orbit, self.epsilon, (self.lower, self.upper))
        return seq.symbols
