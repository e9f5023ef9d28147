"""Seeded random streams.

A stream is identified by ``(master_seed, stream_index)``.  Both integers are
fed to :class:`numpy.random.SeedSequence`, whose hash-based mixing is fixed
and platform independent.  Each stream exposes two generators drawn from
sibling child sequences:

* ``np`` -- a PCG64 :class:`numpy.random.Generator` for vectorised draws;
* ``py`` -- a :class:`random.Random` (Mersenne Twister) for tight scalar
  loops, where numpy's per-call overhead dominates.

Only ``randrange``/``random`` are used on ``py``; both are stable across
CPython 3.x releases for integer seeds.
"""
from __future__ import annotations

import random

import numpy as np

_MASK64 = (1 << 64) - 1


def _seed_sequence(master_seed: int, stream_index: int, sub: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        entropy=int(master_seed) & _MASK64,
        spawn_key=(int(stream_index) & _MASK64, sub),
    )


class RngStream:
    """Reproducible random stream derived from ``(master_seed, stream_index)``."""

    def __init__(self, master_seed: int, stream_index: int = 0):
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        self.np = np.random.Generator(np.random.PCG64(_seed_sequence(master_seed, stream_index, 0)))
        words = _seed_sequence(master_seed, stream_index, 1).generate_state(4, np.uint64)
        self.py = random.Random(int.from_bytes(words.tobytes(), "little"))

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})"


def graph_stream(master_seed: int, graph_index: int) -> RngStream:
    """Stream for the ``graph_index``-th generated graph of an experiment."""
    return RngStream(master_seed, 1000 + graph_index)


def trial_stream(master_seed: int, k: int, trial: int) -> RngStream:
    """Stream for threshold resampling ``trial`` at attack size ``k``."""
    return RngStream(master_seed, k * 1_000_000 + trial)


def attack_stream(master_seed: int, graph_index: int = 0) -> RngStream:
    """Stream for random attack orderings on graph ``graph_index``."""
    return RngStream(master_seed, 2000 + graph_index)
