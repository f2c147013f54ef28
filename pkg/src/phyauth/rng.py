"""Counter-based random streams.

Every stream is a Philox-4x64 generator whose 128-bit key is
``(master_seed << 64) | stream_id``. Two streams with different ids never
share key material, and a given ``(master_seed, stream_id)`` pair replays
the same sequence regardless of which process or in which order it is
consumed. Gaussian variates come from numpy's ziggurat sampler
(``Generator.standard_normal``); uniform bits from ``Generator.integers``.
Both are part of the reproducibility contract: changing either changes
every simulated table.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


class RngStream:
    """One independent, replayable random stream."""

    __slots__ = ("master_seed", "stream_id", "_gen")

    def __init__(self, master_seed: int, stream_id: int = 0):
        if not (0 <= master_seed <= _MASK64):
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
        if not (0 <= stream_id <= _MASK64):
            raise ValueError(f"stream_id must be a 64-bit unsigned integer, got {stream_id}")
        self.master_seed = master_seed
        self.stream_id = stream_id
        self._gen = np.random.Generator(np.random.Philox(key=(master_seed << 64) | stream_id))

    def child(self, stream_id: int) -> "RngStream":
        """Sibling stream under the same master seed."""
        return RngStream(self.master_seed, stream_id)

    def bits(self, n: int) -> np.ndarray:
        return self._gen.integers(0, 2, size=n, dtype=np.uint8)

    def normal(self, size, scale: float = 1.0) -> np.ndarray:
        return scale * self._gen.standard_normal(size)

    def integers(self, low: int, high: int, size=None):
        return self._gen.integers(low, high, size=size)

    def choice_index(self, n: int) -> int:
        return int(self._gen.integers(0, n))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"
