"""
Deterministic random streams.

Every impression draws from its own counter-based stream keyed by
(experiment seed, query index), so results do not depend on how queries are
split between workers.
"""
import numpy as np

SETUP_STREAM = 0
QUERY_STREAM = 1
BLOCK_STREAM = 2


def _stream(seed: int, *spawn_key: int) -> np.random.Generator:
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in spawn_key))
    return np.random.Generator(np.random.Philox(sequence))


def query_stream(seed: int, query_index: int) -> np.random.Generator:
    """Stream for one impression"""
    return _stream(seed, QUERY_STREAM, query_index)


def setup_stream(seed: int, purpose: int = 0) -> np.random.Generator:
    """Stream for one-off experiment setup draws (random relevances, shuffled base order)"""
    return _stream(seed, SETUP_STREAM, purpose)


def block_stream(seed: int, block_index: int) -> np.random.Generator:
    """Stream for one block of the batched engine"""
    return _stream(seed, BLOCK_STREAM, block_index)
