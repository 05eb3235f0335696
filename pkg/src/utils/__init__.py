from .helpers import setup_logging, sorted_ranks
from .rng import block_stream, query_stream, setup_stream

__all__ = ['setup_logging', 'sorted_ranks', 'query_stream', 'setup_stream', 'block_stream']
