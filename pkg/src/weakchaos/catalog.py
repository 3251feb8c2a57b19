"""Example dynamical systems and constructive iteration.

Three iteration paths are provided:

* :func:`iterate` runs fixed-point dyadic arithmetic with a per-step error
  ledger and returns points guaranteed within ``2**-m`` of the true orbit.
* :func:`iterate_exact` uses :class:`fractions.Fraction` for the maps that
  are rational-affine and serves as the oracle for :func:`iterate`.
* :func:`iterate_float` is a double-precision pseudo-orbit for long
  statistical runs where the precision budget of :func:`iterate` is
  exhausted. It carries no error guarantee (``error_exponent is None``).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Mapping, Sequence

import gmpy2
import mpmath
import numpy as np

from .errors import CapabilityError, ConfigError, DomainError, PrecisionError, ResourceError

IDENTITY = "Identity"
ROTATION = "Rotation"
DOUBLING = "Doubling"
PL_MANNEVILLE = "PLManneville"
SMOOTH_MANNEVILLE = "SmoothManneville"
SKEW_SHIFT = "SkewShift2D"

KINDS = (IDENTITY, ROTATION, DOUBLING, PL_MANNEVILLE, SMOOTH_MANNEVILLE, SKEW_SHIFT)

#: Golden-mean rotation number truncated to 60 dyadic bits.
GOLDEN_T = Fraction((math.isqrt(5 << 120) - (1 << 60)) >> 1, 1 << 60)

#: PLManneville branches beyond this index are not resolved by float evaluation.
DEFAULT_K_MAX = 10**7

#: Hard cap on the working precision of :func:`iterate`, in bits.
DEFAULT_MAX_BITS = 1 << 19

#: Initial margin, in bits, of the working precision over the target in :func:`iterate`.
ADAPTIVE_GUARD = 64

#: Longest Manneville orbit that :func:`trajectory` tracks; longer ones use floats.
TRACKED_MAX_STEPS = 1 << 16


def as_rational(value: Any) -> Fraction:
    """Parse ints, floats (exact binary value) and strings such as ``"1/3"``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ConfigError(f"not a number: {value!r}")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ConfigError(f"not a finite number: {value!r}")
        return Fraction(float(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"cannot parse number {value!r}") from exc
    raise ConfigError(f"not a number: {value!r}")


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


_DEFAULTS = {
    IDENTITY: {},
    ROTATION: {"t": GOLDEN_T},
    DOUBLING: {},
    PL_MANNEVILLE: {"z": Fraction(2), "a": Fraction(1, 2)},
    SMOOTH_MANNEVILLE: {"z": Fraction(2)},
    SKEW_SHIFT: {},
}


@dataclass(frozen=True)
class MapDescriptor:
    """A closed description of one dynamical system.

    Parameters are stored as exact rationals. JSON form::

        {"kind": "PLManneville", "params": {"z": "2", "a": "1/2"}}

    Parameter names: ``Rotation.t``, ``PLManneville.z``, ``PLManneville.a``,
    ``SmoothManneville.z``; the other kinds take none.
    """

    kind: str
    params: Mapping[str, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown map kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        allowed = _DEFAULTS[self.kind]
        unknown = set(self.params) - set(allowed)
        if unknown:
            raise ConfigError(f"{self.kind} does not take parameters {sorted(unknown)}")
        merged = dict(allowed)
        merged.update({k: as_rational(v) for k, v in self.params.items()})
        object.__setattr__(self, "params", merged)
        self._validate()

    def _validate(self):
        p = self.params
        if self.kind == ROTATION and not 0 < p["t"] < 1:
            raise ConfigError("Rotation requires 0 < t < 1")
        if self.kind in (PL_MANNEVILLE, SMOOTH_MANNEVILLE) and p["z"] < 2:
            raise ConfigError(f"{self.kind} requires z ≥ 2 (got z={float(p['z'])})")
        if self.kind == PL_MANNEVILLE and not 0 < p["a"] < 1:
            raise ConfigError("PLManneville requires 0 < a < 1")

    def __hash__(self):
        return hash((self.kind, tuple(sorted(self.params.items()))))

    # constructors -----------------------------------------------------
    @classmethod
    def identity(cls):
        return cls(IDENTITY)

    @classmethod
    def rotation(cls, t=GOLDEN_T):
        return cls(ROTATION, {"t": t})

    @classmethod
    def doubling(cls):
        return cls(DOUBLING)

    @classmethod
    def pl_manneville(cls, z=2, a=Fraction(1, 2)):
        return cls(PL_MANNEVILLE, {"z": z, "a": a})

    @classmethod
    def smooth_manneville(cls, z=2):
        return cls(SMOOTH_MANNEVILLE, {"z": z})

    @classmethod
    def skew_shift(cls):
        return cls(SKEW_SHIFT)

    # geometry ---------------------------------------------------------
    @property
    def dim(self) -> int:
        return 2 if self.kind == SKEW_SHIFT else 1

    @property
    def bounds(self) -> tuple[Fraction, Fraction]:
        """Per-coordinate domain bounds ``(lo, hi)``."""
        return (Fraction(-1), Fraction(1)) if self.kind == SKEW_SHIFT else (Fraction(0), Fraction(1))

    @property
    def diameter(self) -> Fraction:
        lo, hi = self.bounds
        return hi - lo

    @property
    def label(self) -> str:
        args = ",".join(f"{k}={_fmt(v)}" for k, v in sorted(self.params.items()))
        return f"{self.kind}({args})" if args else self.kind

    # serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": {k: _fmt(v) for k, v in sorted(self.params.items())}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping) -> "MapDescriptor":
        if not isinstance(data, Mapping) or "kind" not in data:
            raise ConfigError("map descriptor must be an object with a 'kind' field")
        params = data.get("params") or {}
        if not isinstance(params, Mapping):
            raise ConfigError("map 'params' must be an object")
        return cls(str(data["kind"]), dict(params))

    @classmethod
    def from_json(cls, text: str) -> "MapDescriptor":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid map JSON: {exc}") from exc
        return cls.from_dict(data)

    # helpers used across modules --------------------------------------
    def contains(self, x) -> bool:
        lo, hi = self.bounds
        coords = _coords(x, self.dim)
        return all(lo <= c <= hi for c in coords)

    def distance(self, x, y):
        """Absolute distance in 1D (arc length on the circle for Rotation),
        max-coordinate distance in 2D."""
        if self.dim == 1:
            d = abs(x - y)
            return min(d, 1 - d) if self.kind == ROTATION else d
        return max(abs(x[0] - y[0]), abs(x[1] - y[1]))

    @property
    def exact_capable(self) -> bool:
        if self.kind in (IDENTITY, ROTATION, DOUBLING, SKEW_SHIFT):
            return True
        return self.kind == PL_MANNEVILLE and self.params["z"] == 2


def _coords(x, dim):
    if dim == 1:
        if isinstance(x, (tuple, list, np.ndarray)):
            raise DomainError(f"expected a scalar point, got {x!r}")
        return (x,)
    if len(x) != 2:
        raise DomainError(f"expected a 2D point, got {x!r}")
    return tuple(x)


def _check_domain(m: MapDescriptor, x):
    try:
        ok = m.contains(x)
    except TypeError as exc:
        raise DomainError(f"invalid point {x!r}") from exc
    if not ok:
        lo, hi = m.bounds
        raise DomainError(f"point {x!r} outside the domain [{lo}, {hi}]^{m.dim} of {m.kind}")


# ----------------------------------------------------------------------
# PLManneville breakpoints


def _exponent(m: MapDescriptor) -> float:
    return 1.0 / (float(m.params["z"]) - 1.0)


def breakpoint(m: MapDescriptor, k: int):
    """Breakpoint ``xi_k = a / (k+1)**(1/(z-1))`` with the convention ``xi_{-1} = 1``.

    Exact (a Fraction) when ``z == 2``, a float otherwise.
    """
    a = m.params["a"]
    if k < -1:
        raise ValueError("breakpoint index must be >= -1")
    if k == -1:
        return Fraction(1)
    if m.params["z"] == 2:
        return a / (k + 1)
    return float(a) * (k + 1) ** -_exponent(m)


def branch_index(m: MapDescriptor, x, k_max: int | None = DEFAULT_K_MAX):
    """Index ``k`` of the PLManneville branch ``[xi_k, xi_{k-1})`` holding ``x``.

    ``0`` means ``[a, 1]``; ``None`` means the fixed point ``x == 0``.
    """
    a = m.params["a"]
    if x >= a:
        return 0
    if x == 0:
        return None
    if isinstance(x, Fraction) and m.params["z"] == 2:
        q = a / x
        k = -(-q.numerator // q.denominator) - 1
    else:
        xf = float(x)
        ratio = (float(a) / xf) ** (float(m.params["z"]) - 1.0)
        if ratio > 2.0**62:
            k = int(ratio)
        else:
            k = max(1, math.ceil(ratio) - 1)
        while breakpoint(m, k) > x:
            k += 1
        while k > 1 and breakpoint(m, k - 1) <= x:
            k -= 1
    if k_max is not None and k > k_max:
        raise PrecisionError(
            f"x={float(x):.3e} lies below xi_{k_max}; branch truncation depth exceeded"
        )
    return k


def _branch_geometry(m: MapDescriptor, k: int):
    """Return (left, right, image_left, image_right) of branch ``k``."""
    if k == 0:
        return m.params["a"], Fraction(1), Fraction(0), Fraction(1)
    xi = lambda j: breakpoint(m, j)  # noqa: E731
    return xi(k), xi(k - 1), xi(k - 1), xi(k - 2)


def branch_slope(m: MapDescriptor, k: int) -> float:
    lo, hi, ilo, ihi = _branch_geometry(m, k)
    return float((ihi - ilo) / (hi - lo)) if isinstance(lo, Fraction) else (ihi - ilo) / (hi - lo)


# ----------------------------------------------------------------------
# single-step evaluation


def evaluate(m: MapDescriptor, x, k_max: int | None = DEFAULT_K_MAX):
    """Apply the map once.

    Rational input yields an exact :class:`Fraction` for rational-affine
    maps; anything else is evaluated in double precision.
    """
    _check_domain(m, x)
    kind = m.kind
    if kind == IDENTITY:
        return x
    if kind == ROTATION:
        t = m.params["t"] if isinstance(x, Fraction) else float(m.params["t"])
        y = x + t
        return y - 1 if y >= 1 else y
    if kind == DOUBLING:
        y = 2 * x
        return y - math.floor(y)
    if kind == SKEW_SHIFT:
        x0, y0 = x
        return (_wrap2(x0 + y0), _wrap2(y0))
    if kind == SMOOTH_MANNEVILLE:
        xf = float(x)
        y = xf + xf ** float(m.params["z"])
        return y - math.floor(y)
    # PLManneville
    exact = isinstance(x, Fraction) and m.params["z"] == 2
    if not exact:
        x = float(x)
    k = branch_index(m, x, None if exact else k_max)
    if k is None:
        return x
    lo, hi, ilo, ihi = _branch_geometry(m, k)
    if not exact:
        lo, hi, ilo, ihi = float(lo), float(hi), float(ilo), float(ihi)
    y = ilo + (ihi - ilo) * (x - lo) / (hi - lo)
    if not exact:
        y = min(max(y, 0.0), 1.0)
    return y


def _wrap2(v):
    """Reduce modulo 2 into [-1, 1)."""
    return v - 2 * math.floor((v + 1) / 2)


def iterate_exact(m: MapDescriptor, x0, n: int) -> list:
    """Bit-exact orbit ``(x0, T x0, ..., T^n x0)`` in rational arithmetic."""
    if not m.exact_capable:
        raise CapabilityError(f"{m.label} has no exact rational arithmetic")
    if n < 0:
        raise ConfigError("n must be nonnegative")
    x = tuple(as_rational(c) for c in x0) if m.dim == 2 else as_rational(x0)
    _check_domain(m, x)
    out = [x]
    for _ in range(n):
        x = evaluate(m, x, k_max=None)
        out.append(x)
    return out


# ----------------------------------------------------------------------
# modulus of continuity


@dataclass(frozen=True)
class Modulus:
    """``d(x, y) < 2**-(n + shift)`` implies ``d(Tx, Ty) < 2**-n`` on each branch."""

    shift: int
    lipschitz: float


@lru_cache(maxsize=64)
def _pl_max_slope(m: MapDescriptor, k_max: int) -> float:
    best = max(branch_slope(m, 0), branch_slope(m, 1))
    if m.params["z"] == 2:
        # slope (k+1)/(k-1) decreases in k; k = 2 is the steepest
        return max(best, branch_slope(m, 2)) if k_max >= 2 else best
    p = _exponent(m)
    a = float(m.params["a"])
    chunk = 1 << 20
    for start in range(2, k_max + 1, chunk):
        k = np.arange(start, min(k_max, start + chunk - 1) + 1, dtype=np.float64)
        xi_k = a * (k + 1) ** -p
        xi_k1 = a * k**-p
        xi_k2 = np.where(k >= 2, a * np.maximum(k - 1, 1) ** -p, 1.0)
        best = max(best, float(np.max((xi_k2 - xi_k1) / (xi_k1 - xi_k))))
    return best


def modulus(m: MapDescriptor, k_max: int = DEFAULT_K_MAX) -> Modulus:
    """Shift bound from the steepest branch slope of the map."""
    kind = m.kind
    if kind in (IDENTITY, ROTATION):
        lip = 1.0
    elif kind in (DOUBLING, SKEW_SHIFT):
        lip = 2.0
    elif kind == SMOOTH_MANNEVILLE:
        lip = 1.0 + float(m.params["z"])
    else:
        lip = _pl_max_slope(m, k_max)
    return Modulus(shift=max(0, math.ceil(math.log2(lip) - 1e-12)), lipschitz=lip)


# ----------------------------------------------------------------------
# orbits


@dataclass(frozen=True, eq=False)
class Orbit:
    """A finite trajectory with a per-point error guarantee.

    ``numerators[i] / 2**error_exponent`` is within ``2**-error_exponent``
    of the true ``T^i(start)``. Float pseudo-orbits have
    ``error_exponent is None`` and ``numerators is None``.
    """

    points: np.ndarray
    error_exponent: int | None
    start: Any
    length: int
    map: MapDescriptor | None = None
    numerators: np.ndarray | None = None

    def __post_init__(self):
        if len(self.points) != self.length + 1:
            raise ValueError("orbit must hold length + 1 points")

    @classmethod
    def from_points(cls, points, error_exponent=None, map=None) -> "Orbit":
        pts = np.asarray(points, dtype=np.float64)
        numerators = None
        if error_exponent is not None:
            scale = 2**error_exponent
            numerators = np.array(
                [_round_fraction(as_rational(float(v)) * scale) for v in pts.ravel()],
                dtype=object,
            ).reshape(pts.shape)
        start = pts[0] if pts.ndim == 1 else tuple(pts[0])
        return cls(pts, error_exponent, start, len(pts) - 1, map, numerators)

    @property
    def dim(self) -> int:
        return 1 if self.points.ndim == 1 else self.points.shape[1]

    @property
    def error_bound(self) -> float:
        return 0.0 if self.error_exponent is None else 2.0**-self.error_exponent

    def exact_points(self) -> list:
        """Stored points as Fractions (dyadic with denominator ``2**m``)."""
        if self.numerators is None:
            return [as_rational(float(p)) if self.dim == 1 else tuple(map(Fraction, p)) for p in self.points]
        den = 1 << self.error_exponent
        if self.dim == 1:
            return [Fraction(int(v), den) for v in self.numerators]
        return [tuple(Fraction(int(c), den) for c in row) for row in self.numerators]


def _round_fraction(q: Fraction) -> int:
    return (2 * q.numerator + q.denominator) // (2 * q.denominator)


# ---- fixed-point stepping ---------------------------------------------


class _FixedPoint:
    """One map in fixed point: values are integers ``X`` standing for ``X / 2**P``.

    ``step`` returns the image and an updated error bound, both in ulps.
    Branch choices that the error bound cannot certify raise PrecisionError.
    """

    def __init__(self, m: MapDescriptor, prec: int):
        self.m = m
        self.P = prec
        self.one = 1 << prec
        self._cache: dict[int, tuple] = {}
        if m.kind == ROTATION:
            self.t, self.t_err = self.fix(m.params["t"])
        if m.kind == PL_MANNEVILLE:
            self.zint = m.params["z"] == 2
            mpmath.mp.prec = max(53, prec + 16)

    def fix(self, q) -> tuple[int, int]:
        """Floor of ``q * 2**P`` and whether the rounding was inexact (0 or 1)."""
        q = as_rational(q)
        num = q.numerator << self.P
        v, r = divmod(num, q.denominator)
        return v, int(r != 0)

    def _xi_fixed(self, k: int) -> tuple[int, int]:
        hit = self._cache.get(k)
        if hit is not None:
            return hit
        if k == 0:
            val = self.fix(self.m.params["a"])
        elif k == -1:
            val = (self.one, 0)
        elif self.zint:
            val = self.fix(self.m.params["a"] / (k + 1))
        else:
            a = self.m.params["a"]
            xi = mpmath.mpf(a.numerator) / a.denominator * mpmath.power(k + 1, -mpmath.mpf(1) / (mpmath.mpf(self.m.params["z"].numerator) / self.m.params["z"].denominator - 1))
            v = int(mpmath.floor(xi * self.one))
            val = (v, 1)
        if len(self._cache) < 1 << 16:
            self._cache[k] = val
        return val

    def step(self, X, E):
        kind = self.m.kind
        one = self.one
        if kind == IDENTITY:
            return X, E
        if kind == ROTATION:
            Y = X + self.t
            E2 = E + self.t_err
            if E2 and abs(Y - one) <= E2:
                raise PrecisionError("rotation wrap point not resolved at this precision")
            return (Y - one if Y >= one else Y), E2
        if kind == DOUBLING:
            Y = X << 1
            E2 = E << 1
            while Y >= one:
                Y -= one
            if E2 and (Y <= E2 or one - Y <= E2):
                raise PrecisionError("doubling discontinuity not resolved at this precision")
            return Y, E2
        if kind == SKEW_SHIFT:
            (x, y), (ex, ey) = X, E
            s = x + y
            es = ex + ey
            if es and (abs(s - one) <= es or abs(s + one) <= es):
                raise PrecisionError("skew-shift wrap not resolved at this precision")
            if ey and (abs(y - one) <= ey or abs(y + one) <= ey):
                raise PrecisionError("skew-shift wrap not resolved at this precision")
            return (self._wrap(s), self._wrap(y)), (es, ey)
        if kind == SMOOTH_MANNEVILLE:
            return self._smooth_step(X, E)
        return self._pl_step(X, E)

    def _wrap(self, v):
        two = self.one << 1
        return (v + self.one) % two - self.one

    def _smooth_step(self, X, E):
        z = self.m.params["z"]
        P, one = self.P, self.one
        if z.denominator == 1:
            zi = int(z)
            Y = X + ((X**zi) >> (P * (zi - 1)))
            rounding = 1
        else:
            mpmath.mp.prec = max(53, P + 16)
            xv = mpmath.mpf(X) / one
            Y = X + int(mpmath.floor(mpmath.power(xv, mpmath.mpf(z.numerator) / z.denominator) * one))
            rounding = 2
        grow = 1 + z
        E2 = _inflate(E * grow.numerator, grow.denominator) + rounding
        r = Y % one
        if r <= E2 or one - r <= E2:
            raise PrecisionError("smooth Manneville wrap not resolved at this precision")
        return r, E2

    def _pl_step(self, X, E):
        if X == 0 and E == 0:
            return 0, 0
        if X <= E:
            raise PrecisionError("point too close to the PLManneville fixed point 0")
        k = branch_index(self.m, X / self.one, None)
        while True:
            lo, elo = self._xi_fixed(k)
            hi, ehi = self._xi_fixed(k - 1)
            if X < lo:
                k += 1
            elif k > 0 and X >= hi:
                k -= 1
            else:
                break
        if X - E < lo + elo or (k > 0 and X + E >= hi):
            raise PrecisionError(f"PLManneville branch {k} not certified at this precision")
        if k == 0:
            hi, ehi = self.one, 0
            ilo, eilo, ihi, eihi = 0, 0, self.one, 0
        else:
            ilo, eilo = hi, ehi
            ihi, eihi = self._xi_fixed(k - 2)
        num = (ihi - ilo) * (X - lo)
        den = hi - lo
        q, rem = _divmod(num, den)
        Y = ilo + q
        eta = max(elo, ehi, eilo, eihi)
        if E == 0 and eta == 0:
            E2 = 0 if rem == 0 else 1
        else:
            E2 = _inflate((ihi - ilo + 2 * eta) * (E + 3 * eta), max(den - 2 * eta, 1)) + 3 * eta + 1
        return min(max(Y, 0), self.one), E2


def _divmod(num: int, den: int) -> tuple[int, int]:
    # CPython long division is quadratic; GMP wins by far at working precision
    if num.bit_length() < 4096:
        return divmod(num, den)
    q, r = gmpy2.f_divmod(gmpy2.mpz(num), gmpy2.mpz(den))
    return int(q), int(r)


def _inflate(num: int, den: int) -> int:
    """``ceil(num / den)`` widened by a relative ``2**-29`` in integer arithmetic."""
    q = -(-num // den)
    return q + (q >> 29) + 1


def required_precision(m: MapDescriptor, n: int, error_exponent: int) -> int:
    """Working precision ``m + n*shift`` plus guard bits for rounding."""
    shift = modulus(m).shift
    guard = math.ceil(math.log2(7 * (n + 1))) + 5
    return error_exponent + 1 + n * shift + guard


def iterate(m: MapDescriptor, x0, n: int, error_exponent: int, max_bits: int = DEFAULT_MAX_BITS) -> Orbit:
    """Precision-tracked orbit of length ``n`` with error below ``2**-error_exponent``.

    The working precision starts at ``ADAPTIVE_GUARD`` bits above the
    target and doubles that margin whenever the error ledger overflows,
    up to the worst-case bound of :func:`required_precision`. Intermittent
    maps expand far less than their steepest branch, so most orbits are
    certified long before the bound is reached.

    Raises
    ------
    ResourceError
        If the working precision would exceed ``max_bits``.
    PrecisionError
        If a branch choice cannot be certified (orbit too close to a
        discontinuity for the error budget).
    """
    if n < 1 or error_exponent < 1:
        raise ConfigError("iterate requires n >= 1 and m >= 1")
    x = tuple(as_rational(c) for c in x0) if m.dim == 2 else as_rational(x0)
    _check_domain(m, x)
    if m.kind == DOUBLING and error_exponent <= 60 and x.denominator & (x.denominator - 1) == 0:
        # bit shifting is exact, so no working precision is needed
        return _dyadic_doubling(m, x, n, error_exponent)
    worst = required_precision(m, n, error_exponent)
    # the doubling map expands at its modulus everywhere, so retries would only add cost
    prec = worst if m.kind == DOUBLING else min(worst, error_exponent + ADAPTIVE_GUARD)
    while True:
        if prec > max_bits:
            raise ResourceError(
                f"{m.label}: n={n}, m={error_exponent} needs {prec} working bits (cap {max_bits})"
            )
        try:
            return _iterate_at(m, x, n, error_exponent, prec)
        except PrecisionError:
            if prec >= worst:
                raise
            prec = min(worst, error_exponent + 2 * (prec - error_exponent))


def _iterate_at(m: MapDescriptor, x, n: int, error_exponent: int, prec: int) -> Orbit:
    fp = _FixedPoint(m, prec)
    drop = prec - error_exponent
    half = 1 << (drop - 1)
    budget = 1 << (drop - 1)
    if m.dim == 2:
        (X0, e0), (Y0, f0) = fp.fix(x[0]), fp.fix(x[1])
        X, E = (X0, Y0), (e0, f0)
    else:
        X, E = fp.fix(x)
    out = []
    for i in range(n + 1):
        if i:
            X, E = fp.step(X, E)
        err = max(E) if m.dim == 2 else E
        if err >= budget:
            raise PrecisionError(f"error ledger exceeded the budget at step {i}")
        if m.dim == 2:
            out.append(((X[0] + half) >> drop, (X[1] + half) >> drop))
        else:
            out.append((X + half) >> drop)
    dtype = np.int64 if error_exponent <= 61 else object
    numerators = np.array(out, dtype=dtype)
    points = numerators.astype(np.float64) / 2.0**error_exponent
    return Orbit(points, error_exponent, x, n, m, numerators)


def _dyadic_doubling(m: MapDescriptor, x: Fraction, n: int, error_exponent: int) -> Orbit:
    # exact shift of the binary expansion; each point is an (m+1)-bit window
    b = x.denominator.bit_length() - 1
    frac = x.numerator % x.denominator if x < 1 else 0
    width = b + n + error_exponent + 1
    raw = (frac << (width - b)).to_bytes((width + 7) // 8, "big")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[-width:].astype(np.int64)
    win = np.lib.stride_tricks.sliding_window_view(bits, error_exponent + 1)[: n + 1]
    weights = np.left_shift(np.int64(1), np.arange(error_exponent - 1, -1, -1, dtype=np.int64))
    numerators = win[:, :error_exponent] @ weights + win[:, error_exponent]
    if x == 1:
        numerators[0] = 1 << error_exponent
    points = numerators.astype(np.float64) / 2.0**error_exponent
    return Orbit(points, error_exponent, x, n, m, numerators)


# ---- float pseudo-orbits ----------------------------------------------


def _pl_float_orbit(m: MapDescriptor, x0: float, n: int) -> np.ndarray:
    a = float(m.params["a"])
    p = _exponent(m)
    z1 = float(m.params["z"]) - 1.0

    def xi(j):
        return 1.0 if j < 0 else a * (j + 1) ** -p

    def decompose(x):
        # state (k, theta): x = xi_k + theta * (xi_{k-1} - xi_k)
        if x >= a:
            return 0, (x - a) / (1.0 - a)
        if x <= 0.0:
            return -1, 0.0
        ratio = (a / x) ** z1
        if ratio < 1e15:
            k = max(1, math.ceil(ratio) - 1)
            while xi(k) > x:
                k += 1
            while k > 1 and xi(k - 1) <= x:
                k -= 1
        else:
            k = int(ratio)
        lo, hi = xi(k), xi(k - 1)
        theta = (x - lo) / (hi - lo) if hi > lo else 0.0
        return k, min(max(theta, 0.0), math.nextafter(1.0, 0.0))

    out = np.empty(n + 1)
    out[0] = x0
    k, theta = decompose(x0)
    for i in range(1, n + 1):
        if k < 0:
            out[i:] = 0.0
            break
        if k == 0:
            x = theta
            k, theta = decompose(x)
        else:
            k -= 1
            if k == 0:
                x = a + theta * (1.0 - a)
            else:
                lo = xi(k)
                x = lo + theta * (xi(k - 1) - lo)
        out[i] = x
    return out


def iterate_float(m: MapDescriptor, x0, n: int) -> Orbit:
    """Double-precision pseudo-orbit with no error guarantee.

    PLManneville points are carried as (branch index, relative position)
    so laminar phases near 0 are resolved without loss.
    """
    if n < 0:
        raise ConfigError("n must be nonnegative")
    _check_domain(m, x0 if m.dim == 1 else tuple(x0))
    if m.kind == PL_MANNEVILLE:
        pts = _pl_float_orbit(m, float(x0), n)
    else:
        x = float(x0) if m.dim == 1 else tuple(float(c) for c in x0)
        rows = [x]
        for _ in range(n):
            x = evaluate(m, x)
            rows.append(x)
        pts = np.asarray(rows, dtype=np.float64)
    start = float(x0) if m.dim == 1 else tuple(float(c) for c in x0)
    return Orbit(pts, None, start, n, m, None)


def trajectory(m: MapDescriptor, x0, n: int, error_exponent: int = 52, max_bits: int = DEFAULT_MAX_BITS) -> Orbit:
    """Precision-tracked orbit when affordable, else a float pseudo-orbit.

    The fallback is only taken for maps whose float iteration does not
    collapse (not Doubling or SkewShift2D), and always for Manneville
    orbits longer than ``TRACKED_MAX_STEPS``.
    """
    if m.kind in (PL_MANNEVILLE, SMOOTH_MANNEVILLE) and n > TRACKED_MAX_STEPS:
        # laminar phases near 0 force repeated restarts at ever higher
        # precision, each costing a full pass over the orbit
        return iterate_float(m, x0, n)
    try:
        return iterate(m, x0, n, error_exponent, max_bits=max_bits)
    except ResourceError:
        if m.kind in (DOUBLING, SKEW_SHIFT):
            raise
        return iterate_float(m, x0, n)


def dyadic(num: int, bits: int) -> Fraction:
    """``num / 2**bits`` in lowest terms.

    Stripping trailing zero bits reduces the fraction exactly; the builtin
    gcd is quadratic and takes tens of seconds on multi-megabit inputs.
    """
    if num == 0:
        return Fraction(0)
    tz = min((num & -num).bit_length() - 1, bits)
    q = Fraction.__new__(Fraction)
    q._numerator, q._denominator = num >> tz, 1 << (bits - tz)
    return q


def random_point(m: MapDescriptor, rng: np.random.Generator, bits: int = 64):
    """A uniformly random dyadic point of the domain with ``bits`` random bits."""
    lo, hi = m.bounds

    def draw():
        nbytes = (bits + 7) // 8
        v = int.from_bytes(rng.bytes(nbytes), "little") >> (8 * nbytes - bits)
        return lo + (hi - lo) * dyadic(v, bits)

    if m.dim == 2:
        return (draw(), draw())
    return draw()
