"""Computable stand-ins for the information content of symbol strings.

Two dictionary compressors with lossless decoders, plus empirical block
entropy as a cross-check. Dictionary references cost
``ceil(log2(current dictionary size))`` bits; there is no entropy coding.
"""
from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .coding import SymbolSequence
from .errors import ConfigError, SampleSizeError

LZ78 = "lz78"
PAIRGROWTH = "pairgrowth"


def _ref_bits(size: int) -> int:
    return (size - 1).bit_length() if size > 1 else 0


def _symbol_bits(alphabet_size: int) -> int:
    return max(1, _ref_bits(alphabet_size))


@dataclass(frozen=True)
class CompressionResult:
    bits: int
    phrase_count: int
    estimator_id: str
    tokens: tuple = ()


def _as_list(s) -> tuple[list, int]:
    if isinstance(s, SymbolSequence):
        return s.symbols.tolist(), s.alphabet_size
    if isinstance(s, str):
        seq = SymbolSequence.from_text(s)
        return seq.symbols.tolist(), seq.alphabet_size
    arr = np.asarray(s, dtype=np.int64)
    return arr.tolist(), max(2, int(arr.max()) + 1) if arr.size else 2


# ----------------------------------------------------------------------
# LZ78


def lz78_encode(s) -> CompressionResult:
    """Incremental parsing into phrases ``(earlier phrase index, next symbol)``.

    A trailing phrase that already exists is emitted with ``symbol=None``.
    """
    symbols, alphabet = _as_list(s)
    children: dict[tuple[int, int], int] = {}
    tokens = []
    bits = 0
    sym_bits = _symbol_bits(alphabet)
    node = 0
    size = 1  # the empty phrase
    for c in symbols:
        nxt = children.get((node, c))
        if nxt is not None:
            node = nxt
            continue
        bits += _ref_bits(size) + sym_bits
        tokens.append((node, c))
        children[(node, c)] = size
        size += 1
        node = 0
    if node:
        bits += _ref_bits(size) + sym_bits
        tokens.append((node, None))
    return CompressionResult(bits, len(tokens), LZ78, tuple(tokens))


def lz78_decode(tokens: Sequence) -> list:
    phrases: list[tuple] = [()]
    out: list = []
    for ref, c in tokens:
        phrase = phrases[ref] if c is None else phrases[ref] + (c,)
        out.extend(phrase)
        if c is not None:
            phrases.append(phrase)
    return out


def lz78_bits(s) -> CompressionResult:
    return lz78_encode(s)


# ----------------------------------------------------------------------
# pair-growth dictionary compressor


def pairgrowth_encode(s) -> CompressionResult:
    """Parse into tokens of two consecutive longest dictionary matches.

    The dictionary starts with the single symbols. Each token ``(i, j)``
    covers the longest phrase ``i`` at the current position followed by the
    longest phrase ``j`` after it; their concatenation joins the dictionary.
    On a constant string phrase lengths double, so the token count grows
    like ``log2 n``.

    The string tail is closed by one final token ``(i, j, length)`` as soon
    as what remains is a prefix of ``phrase_i`` or of ``phrase_i + phrase_j``
    (``j`` may be ``None``); ``length`` truncates its expansion.

    A token is coded as one number in ``range(D * (D + 1))`` (the second
    slot includes ``None``), i.e. ``ceil(log2(D * (D + 1)))`` bits for
    dictionary size ``D``; the final token adds ``ceil(log2(L + 1))`` bits
    for its length, ``L`` being its untruncated expansion length.
    """
    symbols, alphabet = _as_list(s)
    n = len(symbols)
    # trie over dictionary phrases; `through[node]` is some phrase passing through it
    children: list[dict] = [dict()]
    phrase_of: list[int] = [-1]
    through: list[int] = [-1]
    lengths: list[int] = []
    node_of_phrase: list[int] = []
    for c in range(alphabet):
        children.append({})
        phrase_of.append(c)
        through.append(c)
        children[0][c] = len(children) - 1
        lengths.append(1)
        node_of_phrase.append(len(children) - 1)

    def walk(pos: int):
        node = 0
        best = -1
        i = pos
        while i < n:
            nxt = children[node].get(symbols[i])
            if nxt is None:
                break
            node = nxt
            i += 1
            if phrase_of[node] >= 0:
                best = phrase_of[node]
        return best, (node if i == n else None)

    def add(first: int, start: int, count: int):
        node = node_of_phrase[first]
        new_id = len(lengths)
        for i in range(start, start + count):
            c = symbols[i]
            nxt = children[node].get(c)
            if nxt is None:
                children.append({})
                phrase_of.append(-1)
                through.append(new_id)
                nxt = len(children) - 1
                children[node][c] = nxt
            node = nxt
        phrase_of[node] = new_id
        node_of_phrase.append(node)
        lengths.append(lengths[first] + count)

    tokens = []
    bits = 0
    pos = 0
    while pos < n:
        size = len(lengths)
        cost = _ref_bits(size * (size + 1))
        first, end_node = walk(pos)
        if end_node is not None:
            i = phrase_of[end_node] if phrase_of[end_node] >= 0 else through[end_node]
            tokens.append((i, None, n - pos))
            bits += cost + _ref_bits(lengths[i] + 1)
            break
        mid = pos + lengths[first]
        second, end_node = walk(mid)
        if end_node is not None:
            j = phrase_of[end_node] if phrase_of[end_node] >= 0 else through[end_node]
            tokens.append((first, j, n - pos))
            bits += cost + _ref_bits(lengths[first] + lengths[j] + 1)
            break
        tokens.append((first, second, None))
        bits += cost
        add(first, mid, lengths[second])
        pos = mid + lengths[second]
    return CompressionResult(bits, len(tokens), PAIRGROWTH, tuple(tokens))


def pairgrowth_decode(tokens: Sequence, alphabet_size: int) -> list:
    phrases: list[tuple] = [(c,) for c in range(alphabet_size)]
    out: list = []
    for i, j, length in tokens:
        phrase = phrases[i] if j is None else phrases[i] + phrases[j]
        if length is not None:
            out.extend(phrase[:length])
            break
        out.extend(phrase)
        phrases.append(phrase)
    return out


def pairgrowth_bits(s) -> CompressionResult:
    return pairgrowth_encode(s)


ESTIMATORS: dict[str, Callable[..., CompressionResult]] = {
    LZ78: lz78_bits,
    PAIRGROWTH: pairgrowth_bits,
}


def get_estimator(name: str) -> Callable[..., CompressionResult]:
    try:
        return ESTIMATORS[name]
    except KeyError:
        raise ConfigError(f"unknown estimator {name!r}; expected one of {sorted(ESTIMATORS)}") from None


def compressed_bits(s, estimator: str = LZ78) -> int:
    if len(s) == 0:
        return 0
    return get_estimator(estimator)(s).bits


# ----------------------------------------------------------------------
# block entropy


def block_entropy(s, k: int) -> float:
    """Empirical Shannon entropy of overlapping ``k``-blocks, in bits per symbol."""
    symbols, alphabet = _as_list(s)
    if k < 1:
        raise ConfigError("block length must be >= 1")
    n = len(symbols)
    if n < 100 * k:
        raise SampleSizeError(f"block entropy with k={k} needs at least {100 * k} symbols (got {n})")
    arr = np.asarray(symbols, dtype=np.int64)
    if alphabet**k < 2**62:
        codes = np.zeros(n - k + 1, dtype=np.int64)
        for j in range(k):
            codes = codes * alphabet + arr[j : n - k + 1 + j]
        _, counts = np.unique(codes, return_counts=True)
    else:
        counts = np.array(list(Counter(tuple(symbols[i : i + k]) for i in range(n - k + 1)).values()))
    p = counts / counts.sum()
    return float(-(p * np.log2(p)).sum() / k)


# ----------------------------------------------------------------------
# information curves


@dataclass(frozen=True)
class InfoCurve:
    schedule: tuple
    values: tuple
    estimator_id: str

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "bits", "estimator"])
        for n, b in zip(self.schedule, self.values):
            w.writerow([n, b, self.estimator_id])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "InfoCurve":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ConfigError("empty info curve CSV")
        return cls(
            tuple(int(r["n"]) for r in rows),
            tuple(float(r["bits"]) for r in rows),
            rows[0]["estimator"],
        )


def geometric_schedule(n_max: int, start: int = 64, ratio: int = 2) -> tuple:
    """Lengths ``start, start*ratio, ...`` up to ``n_max`` (``n_max`` appended if missed)."""
    out = []
    n = start
    while n <= n_max:
        out.append(n)
        n *= ratio
    if not out or out[-1] != n_max:
        out.append(n_max)
    return tuple(out)


def info_curve(s, schedule: Sequence[int], estimator: str = LZ78) -> InfoCurve:
    """Compressed length of each prefix ``s[:n]`` for ``n`` in ``schedule``."""
    schedule = tuple(int(n) for n in schedule)
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ConfigError("schedule must be strictly increasing")
    if schedule and (schedule[0] < 1 or schedule[-1] > len(s)):
        raise ConfigError("schedule entries must lie in 1..len(s)")
    fn = get_estimator(estimator)
    seq = s if isinstance(s, SymbolSequence) else SymbolSequence.from_text(s) if isinstance(s, str) else SymbolSequence(s, max(2, int(np.max(s)) + 1))
    values = tuple(fn(seq.prefix(n)).bits for n in schedule)
    return InfoCurve(schedule, values, estimator)
