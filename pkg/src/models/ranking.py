"""Results of learning a ranking from preference counts"""
from dataclasses import dataclass
from typing import Optional, Tuple

from src.models.core import DocumentId


@dataclass(frozen=True, order=True)
class ErrorCount:
    """Preference votes a ranking violates, out of all votes in the stats"""

    violated: int
    total: int = 0

    def __post_init__(self):
        if not 0 <= self.violated <= self.total:
            raise ValueError(f"violated votes must lie in 0..{self.total}, got {self.violated}")


@dataclass(frozen=True)
class MinimizerComparison:
    exhaustive: Tuple[DocumentId, ...]
    greedy: Tuple[DocumentId, ...]
    exhaustive_error: ErrorCount
    greedy_error: ErrorCount
    # A cycle in the pairwise majorities, when one exists
    majority_cycle: Optional[Tuple[DocumentId, ...]] = None

    @property
    def diverged(self) -> bool:
        return self.greedy_error.violated > self.exhaustive_error.violated


@dataclass(frozen=True)
class PairMargin:
    """
    Vote margin of the more relevant document `winner` over `loser` against the
    lower bound n * (eps - eps * p_reverse) that sufficient data guarantees.
    """

    winner: DocumentId
    loser: DocumentId
    vote_margin: int
    bound: float

    @property
    def holds(self) -> bool:
        return self.vote_margin > self.bound >= 0
