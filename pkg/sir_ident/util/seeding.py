"""Deterministic random streams for simulations and surveys.

Replicate seeds are derived from a master seed with numpy's SeedSequence
(``spawn_key`` carries the replicate index), so stream ``k`` never depends
on how many other streams were drawn or on which worker draws it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RNG_IDENTIFIER = f"numpy-{np.__version__}/PCG64/SeedSequence(entropy=seed, spawn_key=(index,))"

_UINT64_MASK = (1 << 64) - 1


def mix(master_seed: int, index: int) -> int:
    """Derive the 64-bit seed of stream ``index`` from ``master_seed``."""
    sequence = np.random.SeedSequence(entropy=int(master_seed) & _UINT64_MASK, spawn_key=(int(index),))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True, slots=True)
class SeededRng:
    """A seed plus the rule that turns it into a generator.

    The same seed always yields the same sequence of draws.
    """
    seed: int

    def __post_init__(self):
        if not 0 <= self.seed <= _UINT64_MASK:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def generator(self) -> np.random.Generator:
        """A fresh PCG64 generator positioned at the start of this stream."""
        return np.random.Generator(np.random.PCG64(self.seed))

    def spawn(self, key: int) -> SeededRng:
        """An independent child stream, e.g. one per survey of a replicate."""
        return SeededRng(mix(self.seed, key))

    @classmethod
    def for_replicate(cls, master_seed: int, index: int) -> SeededRng:
        return cls(mix(master_seed, index))
