"""
Seeded random streams.

Every consumer draws from its own named stream so adding an agent does not
shift the draws of any other. A stream is a PCG64DXSM generator whose seed
sequence is keyed by (run seed, blake2b hash of the stream name).
"""

import hashlib
from typing import Dict

import numpy as np


def _name_key(name: str) -> int:
    return int.from_bytes(hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest(), "little")


class SeededStreams:
    def __init__(self, seed: int):
        self.seed = int(seed)
        self._streams: Dict[str, np.random.Generator] = {}

    def stream(self, name: str) -> np.random.Generator:
        generator = self._streams.get(name)
        if generator is None:
            sequence = np.random.SeedSequence(self.seed, spawn_key=(_name_key(name),))
            generator = self._streams[name] = np.random.Generator(np.random.PCG64DXSM(sequence))
        return generator
