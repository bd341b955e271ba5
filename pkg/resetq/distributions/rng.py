import logging
from typing import Tuple

import numpy as np

from resetq.common.errors import ValidationError

logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64 - 1


class RngStream:
    """
    Reproducible random stream addressed by (master seed, stream index).

    Streams with the same seed and different indices are derived through
    numpy's SeedSequence spawn keys and are statistically independent.
    A stream must not be shared between concurrent users.
    """

    def __init__(self, seed: int, index: int = 0, _path: Tuple[int, ...] = None):
        if not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) <= MAX_SEED:
            raise ValidationError(f'Seed must be an unsigned 64-bit integer, got {seed!r}')
        if not isinstance(index, (int, np.integer)) or int(index) < 0:
            raise ValidationError(f'Stream index must be a non-negative integer, got {index!r}')
        self.seed = int(seed)
        self.index = int(index)
        self.path = tuple(_path) if _path is not None else (self.index,)
        self.generator = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self.path))
        )

    def substream(self, index: int) -> 'RngStream':
        """Independent child stream, e.g. one per job class inside a replication."""
        return RngStream(self.seed, self.index, _path=self.path + (int(index),))

    def __repr__(self):
        return f'RngStream(seed={self.seed}, path={self.path})'

    def to_dict(self):
        return {'seed': self.seed, 'index': self.index}
