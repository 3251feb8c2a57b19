import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakchaos.coding import SymbolSequence
from weakchaos.errors import ConfigError, SampleSizeError
from weakchaos.infocontent import (
    LZ78,
    PAIRGROWTH,
    InfoCurve,
    block_entropy,
    compressed_bits,
    geometric_schedule,
    info_curve,
    lz78_bits,
    lz78_decode,
    lz78_encode,
    pairgrowth_bits,
    pairgrowth_decode,
    pairgrowth_encode,
)

SEEDS = range(20)


def census_entropy(s, k):
    """Oracle: Shannon entropy of overlapping k-blocks per symbol."""
    blocks = Counter(tuple(s[i:i + k]) for i in range(len(s) - k + 1))
    total = sum(blocks.values())
    return -sum(c / total * math.log2(c / total) for c in blocks.values()) / k


def lz78_phrases_by_hand(s):
    """Oracle: textbook incremental parsing."""
    seen, phrase, count = set(), (), 0
    for c in s:
        phrase = phrase + (c,)
        if phrase not in seen:
            seen.add(phrase)
            count += 1
            phrase = ()
    return count + (1 if phrase else 0)


def test_lz78_constant_fifteen():
    assert lz78_bits(SymbolSequence([0] * 15, 2)).phrase_count == 5


@pytest.mark.parametrize("bits_fn", [lz78_bits, pairgrowth_bits])
def test_single_symbol(bits_fn):
    r = bits_fn(SymbolSequence([0], 2))
    assert r.phrase_count == 1
    assert r.bits > 0


@pytest.mark.parametrize("bits_fn", [lz78_bits, pairgrowth_bits])
def test_empty_string_costs_nothing(bits_fn):
    assert bits_fn(SymbolSequence([], 2)).bits == 0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=300))
def test_lz78_phrase_count_matches_textbook_parse(s):
    assert lz78_bits(SymbolSequence(s, 4)).phrase_count == lz78_phrases_by_hand(s)


@pytest.mark.parametrize("estimator, low, high", [(LZ78, 0.9, 1.3), (PAIRGROWTH, 0.9, 1.4)])
def test_fair_coin_rate(estimator, low, high):
    n = 2**16
    for seed in SEEDS:
        s = np.random.default_rng(seed).integers(0, 2, n)
        rate = compressed_bits(SymbolSequence(s, 2), estimator) / n
        assert low <= rate <= high


def test_pairgrowth_constant_1024():
    assert pairgrowth_bits(SymbolSequence([0] * 1024, 2)).phrase_count <= 12


def test_pairgrowth_phrase_bound_exhaustive_small():
    for n in range(1, 4097):
        assert pairgrowth_bits([0] * n).phrase_count <= math.log2(n) + 2


@pytest.mark.slow
@pytest.mark.parametrize("k", range(12, 21))
def test_pairgrowth_phrase_bound_near_powers_of_two(k):
    for n in (2**k - 1, 2**k, 2**k + 1):
        if n <= 2**20:
            assert pairgrowth_bits([0] * n).phrase_count <= math.log2(n) + 2


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=4097, max_value=2**20))
def test_pairgrowth_phrase_bound_sampled(n):
    assert pairgrowth_bits([0] * n).phrase_count <= math.log2(n) + 2


corpora = st.integers(2, 16).flatmap(
    lambda a: st.tuples(st.just(a), st.lists(st.integers(0, a - 1), max_size=2000))
)


@settings(max_examples=60, deadline=None)
@given(corpora)
def test_lossless_random(case):
    alphabet, s = case
    seq = SymbolSequence(s, alphabet)
    assert lz78_decode(lz78_encode(seq).tokens) == s
    assert pairgrowth_decode(pairgrowth_encode(seq).tokens, alphabet) == s


@pytest.mark.parametrize(
    "s, alphabet",
    [
        ([0] * 10_000, 2),
        ([0, 1] * 5_000, 2),
        ([i % 16 for i in range(10_000)], 16),
        ([0] * 5_000 + [1] * 5_000, 2),
        ([int(c) for c in bin(3**6000)[2:10_002]], 2),
        ([(i * i) % 7 for i in range(10_000)], 7),
    ],
)
def test_lossless_adversarial(s, alphabet):
    seq = SymbolSequence(s, alphabet)
    assert lz78_decode(lz78_encode(seq).tokens) == s
    assert pairgrowth_decode(pairgrowth_encode(seq).tokens, alphabet) == s


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=200, max_size=3000), st.sampled_from([LZ78, PAIRGROWTH]))
def test_information_is_monotone_in_prefix_length(s, estimator):
    schedule = sorted({len(s) // 8, len(s) // 4, len(s) // 2, len(s)})
    curve = info_curve(SymbolSequence(s, 3), schedule, estimator)
    assert all(a <= b for a, b in zip(curve.values, curve.values[1:]))


@settings(max_examples=20, deadline=None)
@given(
    st.lists(st.integers(0, 1), min_size=1, max_size=3000),
    st.lists(st.integers(0, 1), min_size=1, max_size=3000),
    st.sampled_from([LZ78, PAIRGROWTH]),
)
def test_subadditivity(s, t, estimator):
    whole = compressed_bits(SymbolSequence(s + t, 2), estimator)
    parts = compressed_bits(SymbolSequence(s, 2), estimator) + compressed_bits(SymbolSequence(t, 2), estimator)
    assert whole <= parts + 64


@pytest.mark.parametrize("estimator", [LZ78, PAIRGROWTH])
def test_incompressibility_floor(estimator):
    n = 2**16
    for seed in SEEDS:
        s = np.random.default_rng(1000 + seed).integers(0, 2, n)
        assert compressed_bits(SymbolSequence(s, 2), estimator) >= 0.9 * n


def test_block_entropy_alternating_matches_census():
    s = [0, 1] * 5000
    assert block_entropy(SymbolSequence(s, 2), 4) == pytest.approx(census_entropy(s, 4), abs=1e-12)
    assert block_entropy(SymbolSequence(s, 2), 4) == pytest.approx(0.25, abs=1e-6)


@pytest.mark.parametrize("k", [1, 3, 8])
def test_block_entropy_constant(k):
    assert block_entropy(SymbolSequence([1] * 1000, 2), k) == 0


def test_block_entropy_fair_coin():
    s = np.random.default_rng(3).integers(0, 2, 2**16)
    assert block_entropy(SymbolSequence(s, 2), 8) == pytest.approx(1.0, abs=0.02)


def test_block_entropy_needs_samples():
    with pytest.raises(SampleSizeError):
        block_entropy(SymbolSequence([0, 1] * 100, 2), 4)


def test_pairgrowth_constant_curve_is_logarithmic():
    schedule = [2**k for k in range(4, 13)]
    curve = info_curve(SymbolSequence([0] * 4096, 2), schedule, PAIRGROWTH)
    assert np.corrcoef(np.log2(schedule), curve.values)[0, 1] >= 0.99


def test_fair_coin_curve_rate_at_top():
    s = np.random.default_rng(4).integers(0, 2, 4096)
    curve = info_curve(SymbolSequence(s, 2), [2**k for k in range(4, 13)], LZ78)
    assert 0.9 <= curve.values[-1] / 4096 <= 1.4


def test_single_point_schedule():
    curve = info_curve(SymbolSequence([0], 2), (1,), LZ78)
    assert curve.values == (lz78_bits(SymbolSequence([0], 2)).bits,)


def test_schedule_validation():
    with pytest.raises(ConfigError):
        info_curve(SymbolSequence([0] * 10, 2), (5, 3), LZ78)
    with pytest.raises(ConfigError):
        info_curve(SymbolSequence([0] * 10, 2), (20,), LZ78)
    with pytest.raises(ConfigError):
        compressed_bits(SymbolSequence([0], 2), "gzip")


def test_geometric_schedule():
    assert geometric_schedule(2**10) == (64, 128, 256, 512, 1024)


def test_info_curve_csv_round_trip():
    curve = info_curve(SymbolSequence([0, 1, 1] * 100, 2), (16, 64, 256), PAIRGROWTH)
    text = curve.to_csv()
    assert text.splitlines()[0] == "n,bits,estimator"
    assert InfoCurve.from_csv(text) == curve
