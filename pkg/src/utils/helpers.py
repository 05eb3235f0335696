import logging
from typing import Iterable, List


def setup_logging(level: str = "INFO"):
    """Setup application logging"""
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )


def sorted_ranks(ranks: Iterable[int]) -> List[int]:
    """Clicked ranks as a sorted list; repeats are kept (one per click event)"""
    return sorted(int(rank) for rank in ranks)
