"""
Counter-based uniform streams.

Every random draw in the package is a pure function of (seed, stream, index):
the Philox bit generator is keyed by the 64-bit seed and the stream id, and
draws advance its counter. Batches, matrix trials and suite jobs each own a
stream, so results never depend on how work is split across processes.
"""

import hashlib

import numpy as np

SEED_MASK = (1 << 64) - 1
_MANTISSA_SCALE = 2.0 ** 52


def philox_key(seed: int, stream: int = 0) -> int:
    """128-bit Philox key: seed in the high word, stream id in the low word."""
    return ((int(seed) & SEED_MASK) << 64) | (int(stream) & SEED_MASK)


class UniformStream:
    """Sequential reader over one (seed, stream) pair, yielding values in (0, 1)."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & SEED_MASK
        self.stream = int(stream) & SEED_MASK
        self._generator = np.random.Generator(np.random.Philox(key=philox_key(self.seed, self.stream)))
        self.consumed = 0

    def next(self, shape) -> np.ndarray:
        raw = self._generator.random(shape)
        # Mid-point of a 2^-52 cell: never exactly 0 or 1.
        values = (np.floor(raw * _MANTISSA_SCALE) + 0.5) / _MANTISSA_SCALE
        self.consumed += values.size
        return values


def uniform_stream(seed: int, count: int, stream: int = 0) -> np.ndarray:
    """The first `count` open-interval uniforms of stream (seed, stream)."""
    return UniformStream(seed, stream).next(int(count))


def derive_seed(master_seed: int, label: str) -> int:
    """Fixed-hash derivation of a per-job seed from the master seed."""
    digest = hashlib.sha256(f"{int(master_seed)}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
