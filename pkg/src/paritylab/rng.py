"""Counter-based random substreams.

All randomness in this package is drawn from numpy's Philox (philox4x64-10)
counter-based generator. A draw is addressed by (seed, stream, index): the
64-bit seed keys the generator, the stream id selects an independent family
(one per consumer, see the STREAM_* constants), and the index selects the
sample within the family. Substream (seed, s, i) starts at counter block
(0, 0, i mod 2**64, s), so any two distinct (stream, index) pairs yield
non-overlapping counter ranges regardless of how many values are drawn
(up to 2**128 blocks apart).

Addressing samples rather than sequencing them makes every result
reproducible from (seed, stream, index) alone: nothing depends on draw
order, loop structure, or thread scheduling. Index -1 is reserved by
convention for "initial state" draws (it maps to counter word 2**64 - 1,
which no step index ever reaches).
"""

import numpy as np

GENERATOR_NAME = "philox4x64-10"

# Stream ids, one per consumer of randomness.
STREAM_THRESHOLD = 1
STREAM_HEMISPHERE = 2
STREAM_GRAD_STATS = 3
STREAM_RANDOM_LOSS = 4
STREAM_PGD = 5
STREAM_CLI = 6

_MASK64 = (1 << 64) - 1


def substream(seed: int, stream: int, index: int) -> np.random.Generator:
    """Return a fresh Generator positioned at substream (seed, stream, index)."""
    counter = np.array([0, 0, index & _MASK64, stream & _MASK64], dtype=np.uint64)
    key = np.array([seed & _MASK64, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def normals(seed: int, stream: int, index: int, size: int) -> np.ndarray:
    """Standard normal draws from substream (seed, stream, index)."""
    return substream(seed, stream, index).standard_normal(size)
