"""Monkey at a typewriter: uniform keys, one of which is the space bar."""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..rng import make_rng

ALPHABET = string.ascii_lowercase


@dataclass
class RankFrequency:
    words: list[str]
    counts: np.ndarray

    @property
    def ranks(self) -> np.ndarray:
        return np.arange(1, len(self.words) + 1)

    def rows(self):
        for r, w, c in zip(self.ranks, self.words, self.counts):
            yield int(r), w, int(c)


def monkey_corpus(n_symbols: int, length: int, seed: int) -> str:
    """``length`` uniform draws over ``n_symbols`` letters and the space."""
    if not 2 <= n_symbols <= len(ALPHABET):
        raise ValueError(f"n_symbols must lie in 2..{len(ALPHABET)}")
    if length < 1:
        raise ValueError("length must be >= 1")
    keys = make_rng(seed).integers(0, n_symbols + 1, size=int(length))
    table = np.frombuffer((" " + ALPHABET[:n_symbols]).encode(), dtype=np.uint8)
    return table[keys].tobytes().decode("ascii")


def rank_frequency(text: str) -> RankFrequency:
    """Word counts sorted by descending frequency, ties in lexicographic order.

    Runs touching either end of the text may be cut short, so they are
    dropped.
    """
    runs = text.split(" ")
    inner = runs[1:-1] if len(runs) > 2 else []
    counts = Counter(w for w in inner if w)
    items = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return RankFrequency([w for w, _ in items], np.array([c for _, c in items], dtype=np.int64))


def monkey_text(n_symbols: int, length: int, seed: int) -> RankFrequency:
    """Rank-frequency table of a random corpus."""
    return rank_frequency(monkey_corpus(n_symbols, length, seed))


def zipf_mandelbrot_params(n_symbols: int) -> tuple[float, float, float]:
    """``(alpha, B, C)`` of the law ``freq(r) ~ C / (r + B)**alpha``."""
    n = int(n_symbols)
    if n < 2:
        raise ValueError("n_symbols must be >= 2")
    alpha = np.log(n + 1) / np.log(n)
    B = n / (n - 1)
    C = n ** (alpha - 1) / (n - 1) ** alpha
    return float(alpha), float(B), float(C)
