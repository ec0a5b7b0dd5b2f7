"""Seeding for reproducible, parallel ensembles.

Every stream is a counter-based Philox4x64 generator.  Replica ``r`` of a
run seeded with ``seed`` uses ``split(seed, r)``: the 64-bit word produced by
``numpy.random.SeedSequence(seed, spawn_key=(r,))``.  The mapping depends
only on ``(seed, r)``, so results do not depend on execution order or on the
number of worker threads.
"""

from __future__ import annotations

import os

import numpy as np

THREADS_ENV = "MACROKIN_THREADS"


def split(seed: int, index: int) -> int:
    """Derive the 64-bit seed of child stream ``index`` from ``seed``."""
    if index < 0:
        raise ValueError("stream index must be nonnegative")
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit value, else ``MACROKIN_THREADS``, else CPU count.

    The environment variable caps the result in both cases.
    """
    cap = os.environ.get(THREADS_ENV)
    cap_n = max(1, int(cap)) if cap and cap.strip() else None
    n = threads if threads is not None else (cap_n or os.cpu_count() or 1)
    if cap_n is not None:
        n = min(n, cap_n)
    return max(1, int(n))
