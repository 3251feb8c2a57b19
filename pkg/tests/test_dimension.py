import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from weakchaos.catalog import MapDescriptor, random_point
from weakchaos.dimension import (
    BoxCountingDimension,
    box_dimension,
    dyadic_index,
    dyadic_point_complexity,
    greedy_net,
    local_measure_dimension,
    orbit_closure_dimension,
    point_complexity_curve,
    scale_bits,
)
from weakchaos.errors import ConfigError, CoverageError, SampleSizeError, ScaleError

F = Fraction
DYADIC = [2.0**-k for k in range(2, 9)]
ORBIT_SCALES = [2.0**-k for k in range(3, 10)]
LOCAL_SCALES = [2.0**-k for k in range(4, 11)]
TERNARY = [3.0**-k for k in range(2, 8)]


def cantor_left_endpoints(depth):
    """Left endpoints of the level-``depth`` middle-thirds intervals, in lexicographic order."""
    pts = [0.0]
    for k in range(1, depth + 1):
        pts = [p for q in pts for p in (q, q + 2 / 3**k)]
    return np.array(pts)


def interval_cover_count(points, radius):
    """Oracle: fewest closed intervals of the given radius covering a 1D set (sweep from the left)."""
    count, right = 0, -math.inf
    for p in np.sort(points):
        if p > right:
            count += 1
            right = p + 2 * radius
    return count


@pytest.mark.parametrize(
    "eps, centers",
    [(0.4, [0.0, 0.5, 1.0]), (0.6, [0.0, 1.0])],
)
def test_greedy_net_examples(eps, centers):
    net = greedy_net([0.0, 0.5, 1.0], eps)
    assert net.centers.tolist() == centers
    assert net.count == len(centers)


def test_single_point_net():
    assert greedy_net([0.3], 0.1).count == 1


def test_greedy_net_rejects_nonpositive_epsilon():
    with pytest.raises(ConfigError):
        greedy_net([0.0, 1.0], 0)


def test_two_dimensional_net_uses_max_norm():
    net = greedy_net([[0.0, 0.0], [0.3, 0.05], [0.05, 0.3], [0.3, 0.3]], 0.25)
    assert net.indices.tolist() == [0, 1, 2, 3]
    assert greedy_net([[0.0, 0.0], [0.2, 0.2]], 0.25).count == 1


@settings(max_examples=40, deadline=None)
@given(
    pts=st.lists(st.floats(0, 1), min_size=1, max_size=300),
    eps=st.floats(1e-3, 0.5),
)
def test_net_is_separated_and_covers(pts, eps):
    net = greedy_net(pts, eps)
    net.check(pts)
    assert net.count >= interval_cover_count(np.array(pts), 4 * eps)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), eps=st.floats(1e-2, 0.5))
def test_two_dimensional_net_is_valid(seed, eps):
    pts = np.random.default_rng(seed).uniform(-1, 1, (400, 2))
    greedy_net(pts, eps).check(pts)


def test_equispaced_box_dimension():
    pts = np.linspace(0, 1, 4097)
    est = box_dimension(pts, DYADIC)
    assert est.lsq_slope == pytest.approx(1.0, abs=0.05)
    assert est.lower <= est.upper
    assert list(est.counts) == [int(1 / e) + 1 for e in DYADIC]


def test_finite_set_has_dimension_zero():
    est = box_dimension([0.0, 0.25, 0.5, 0.75, 1.0], [2.0**-k for k in range(3, 10)])
    assert set(est.counts) == {5}
    assert est.upper == est.lower == 0


def test_cantor_box_dimension():
    est = box_dimension(cantor_left_endpoints(8), TERNARY)
    assert est.lsq_slope == pytest.approx(math.log(2) / math.log(3), abs=0.05)
    assert list(est.counts) == [2**k for k in range(2, 8)]


@pytest.mark.parametrize(
    "scales, error",
    [
        ([0.5, 0.25, 0.125, 0.0625], SampleSizeError),
        ([0.5, 0.4, 0.3, 0.2, 0.1], SampleSizeError),
        ([0.5, 0.25, 0.125, 0.25, 0.01], ConfigError),
    ],
)
def test_scale_validation(scales, error):
    with pytest.raises(error):
        box_dimension(np.linspace(0, 1, 100), scales)


def test_scale_below_resolution():
    with pytest.raises(ScaleError):
        box_dimension(np.linspace(0, 1, 100), DYADIC, resolution=2.0**-9)


def test_perturbation_by_vanishing_amounts_barely_moves_estimate():
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 1, 4096)
    j = np.arange(1, pts.size + 1, dtype=float)
    moved = pts + rng.uniform(-1, 1, pts.size) * 2.0**-np.minimum(j, 1000)
    a, b = box_dimension(pts, DYADIC), box_dimension(moved, DYADIC)
    assert abs(a.lsq_slope - b.lsq_slope) <= 0.05


@pytest.mark.parametrize(
    "points",
    [np.linspace(0, 1, 4097), cantor_left_endpoints(10)],
    ids=["interval", "cantor"],
)
def test_scale_halving_stability(points):
    a = box_dimension(points, DYADIC).lsq_slope
    b = box_dimension(points, [e / 2 for e in DYADIC]).lsq_slope
    assert abs(a - b) <= 0.1


def test_rotation_orbit_closure_dimension():
    est = orbit_closure_dimension(MapDescriptor.rotation(), F(0), 2**14, ORBIT_SCALES)
    assert est.lsq_slope == pytest.approx(1.0, abs=0.1)


def test_periodic_orbit_closure_dimension():
    est = orbit_closure_dimension(MapDescriptor.pl_manneville(2, F(1, 2)), F(1, 3), 100, DYADIC)
    assert set(est.counts) == {2}
    assert est.lsq_slope == pytest.approx(0.0, abs=1e-12)


def test_doubling_orbit_closure_dimension():
    m = MapDescriptor.doubling()
    x = random_point(m, np.random.default_rng(0), bits=2**16)
    est = orbit_closure_dimension(m, x, 2**14, ORBIT_SCALES)
    assert est.lsq_slope == pytest.approx(1.0, abs=0.1)


def test_doubling_local_dimension():
    m = MapDescriptor.doubling()
    x = random_point(m, np.random.default_rng(0), bits=2**18 + 64)
    est = local_measure_dimension(m, x, 2**18, LOCAL_SCALES)
    assert est.lsq_slope == pytest.approx(1.0, abs=0.1)
    assert not est.floored
    # mass of a ball of radius eps under Lebesgue measure is 2 eps
    assert est.masses[0] == pytest.approx(2 * LOCAL_SCALES[0], rel=0.1)


def test_identity_fixed_point_local_dimension():
    est = local_measure_dimension(MapDescriptor.identity(), F(1, 3), 1024, LOCAL_SCALES)
    assert set(est.masses) == {1.0}
    assert est.value == 0


def test_rotation_local_dimension():
    m = MapDescriptor.rotation()
    x = random_point(m, np.random.default_rng(1))
    est = local_measure_dimension(m, x, 2**18, LOCAL_SCALES)
    assert est.lsq_slope == pytest.approx(1.0, abs=0.1)


def test_first_point_costs_only_the_scale():
    pts = np.linspace(0, 1, 4097)
    scales = [2.0**-k for k in (2, 4, 6, 8)]
    curve = point_complexity_curve(pts, 0.0, scales)
    assert curve.indices == (0, 0, 0, 0)
    assert list(curve.bits) == [math.ceil(math.log2(k)) for k in (2, 4, 6, 8)]


def test_midpoint_complexity_bound():
    curve = point_complexity_curve(np.linspace(0, 1, 4097), 0.5, [2.0**-6])
    assert curve.bits[0] <= 1.2 * 6 + math.log2(6) + 4


def test_uncovered_point_raises():
    with pytest.raises(CoverageError):
        point_complexity_curve([0.0, 0.1], 0.9, [0.01])


@pytest.mark.parametrize(
    "points, d_upper",
    [(np.linspace(0, 1, 4097), 1.0), (cantor_left_endpoints(10), math.log(2) / math.log(3))],
    ids=["interval", "cantor"],
)
def test_point_complexity_respects_dimension_bound(points, d_upper):
    scales = [2.0**-k for k in range(3, 10)]
    rng = np.random.default_rng(4)
    for x in points[rng.integers(0, len(points), 20)]:
        curve = point_complexity_curve(points, x, scales)
        for e, b in zip(scales, curve.bits):
            assert b <= -(d_upper + 0.25) * math.log2(e) + 16


def test_cantor_complexity_slope_at_far_endpoint():
    pts = cantor_left_endpoints(8)
    curve = point_complexity_curve(pts, pts[-1], TERNARY)
    slope = np.polyfit(-np.log2(TERNARY), curve.bits, 1)[0]
    assert 0.55 <= slope <= 1.0


@pytest.mark.xfail(strict=True, reason="the first enumerated point has index 0, so only the scale bits grow")
def test_cantor_complexity_slope_at_origin():
    curve = point_complexity_curve(cantor_left_endpoints(8), 0.0, TERNARY)
    slope = np.polyfit(-np.log2(TERNARY), curve.bits, 1)[0]
    assert slope == pytest.approx(0.63, abs=0.08)


def test_scale_bits():
    assert scale_bits(F(1, 2)) == 0
    assert scale_bits(F(1, 4)) == 1
    assert scale_bits(F(1, 256)) == 3
    assert scale_bits(F(1, 257)) == 4


def net_index_oracle(x, eps):
    """Oracle: enumerate 0, 1, then odd multiples of 2**-l level by level; return
    the index of the first center of the greedy net within 3 eps of x."""
    pts = [F(0), F(1)]
    level = 1
    while 2**level <= 4 / eps:
        pts += [F(2 * i + 1, 2**level) for i in range(2 ** (level - 1))]
        level += 1
    kept = []
    for i, p in enumerate(pts):
        if all(abs(p - q) >= eps for _, q in kept):
            kept.append((i, p))
    for i, (_, p) in enumerate(kept):
        if abs(p - x) < 3 * eps:
            return i
    raise AssertionError("uncovered")


@pytest.mark.parametrize("x", [F(0), F(1), F(1, 3), F(5, 7), F(1, 2), F(999, 1000)])
@pytest.mark.parametrize("k", [1, 2, 4, 6, 9])
def test_dyadic_index_matches_greedy_enumeration(x, k):
    eps = F(1, 2**k)
    assert dyadic_index(x, eps) == net_index_oracle(x, eps)


def test_dyadic_point_complexity_grows_linearly_for_generic_points():
    x = F(int(np.random.default_rng(0).integers(1, 2**62)), 2**62)
    bits = [dyadic_point_complexity(x, F(1, 2**k)) - scale_bits(F(1, 2**k)) for k in range(4, 40)]
    slope = np.polyfit(range(4, 40), bits, 1)[0]
    assert slope == pytest.approx(1.0, abs=0.05)


def test_dyadic_index_rejects_outside_points():
    with pytest.raises(CoverageError):
        dyadic_index(F(3, 2), F(1, 8))


def test_serialization():
    est = box_dimension(np.linspace(0, 1, 4097), DYADIC)
    assert est.to_csv().splitlines()[0] == "epsilon,count"
    assert set(json.loads(est.to_json())) == {"upper", "lower", "lsq_slope"}
    curve = point_complexity_curve(np.linspace(0, 1, 65), 0.5, [0.25, 0.125])
    assert curve.to_csv().splitlines()[0] == "epsilon,bits"


def test_box_counting_estimator():
    est = BoxCountingDimension(scales=tuple(DYADIC))
    assert clone(est).get_params()["scales"] == tuple(DYADIC)
    est.fit(np.linspace(0, 1, 4097))
    assert est.lsq_slope_ == pytest.approx(1.0, abs=0.05)
    assert est.transform(None).shape == (1, 3)
