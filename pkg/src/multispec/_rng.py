"""Counter-based RNG streams.

All randomness in the package flows through Philox generators keyed by an
explicit 64-bit seed plus integer stream indices, so independent stages
(layers, replications, restarts) can draw from non-overlapping streams and
any of them may run in parallel without changing results.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Stream namespace tags.  Network layers draw from streams 1..T, so every
# other consumer of the same seed starts its stream tuple well above 2^32.
LABEL_STREAM = 0x1_0000_0001
PSI_STREAM = 0x1_0000_0002
SCHEDULE_STREAM = 0x1_0000_0003
EIGEN_STREAM = 0x1_0000_0004
KMEANS_STREAM = 0x1_0000_0005


def splitmix64(x: int) -> int:
    """One step of the splitmix64 mixer (public-domain constants)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def mix_stream(*indices: int) -> int:
    """Fold integer stream indices into a single 64-bit word."""
    h = 0x243F6A8885A308D3
    for ix in indices:
        h = splitmix64(h ^ (int(ix) & _MASK64))
    return h


def rng_from(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator for ``(seed, stream...)``.

    Distinct stream tuples give statistically independent generators for
    the same seed; identical arguments always reproduce the same stream.
    """
    key = np.array([int(seed) & _MASK64, mix_stream(*stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
