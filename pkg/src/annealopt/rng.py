"""Deterministic random-number streams.

Every sampler in the package draws from an :class:`RngStream`, which wraps a
numpy generator seeded from a (seed, stream_id) pair.  Identical pairs give
bit-identical draw sequences; distinct stream ids give statistically
independent streams (SeedSequence spawn keys), which is how replicate chains
stay both independent and reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RngStream:
    """A reproducible random stream keyed by (seed, stream_id)."""

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.default_rng(ss)

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def split(self, stream_id: int) -> "RngStream":
        """A fresh independent stream under the same seed."""
        return RngStream(self.seed, stream_id)

    # Delegate draw methods (uniform, normal, exponential, ...) to numpy.
    def __getattr__(self, name):
        if name.startswith("_"):
            raise AttributeError(name)
        return getattr(self._gen, name)
