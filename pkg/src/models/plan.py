"""Randomization records and the votes harvested from them"""
from dataclasses import dataclass
from typing import Tuple

from src.models.core import DocumentId, RankedList


@dataclass(frozen=True)
class PairAssignment:
    """1-based (top_rank, bottom_rank) pairs plus the ranks left out of any pair"""

    pairs: Tuple[Tuple[int, int], ...]
    unpaired_ranks: Tuple[int, ...]

    @property
    def bottom_ranks(self) -> Tuple[int, ...]:
        return tuple(bottom for _, bottom in self.pairs)

    @property
    def top_ranks(self) -> Tuple[int, ...]:
        return tuple(top for top, _ in self.pairs)


@dataclass(frozen=True)
class FlipPlan:
    """Offset k and one swap flag per pair, in PairAssignment order"""

    k: int
    swap_flags: Tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "swap_flags", tuple(bool(flag) for flag in self.swap_flags))

    def to_dict(self):
        return {"k": self.k, "swap_flags": list(self.swap_flags)}


@dataclass(frozen=True)
class PerturbedList:
    order: RankedList
    plan: FlipPlan
    original: RankedList

    def __len__(self) -> int:
        return len(self.order)

    def doc_at(self, rank: int) -> DocumentId:
        return self.order.doc_at(rank)


@dataclass(frozen=True)
class PreferenceVote:
    """Winner was presented directly below loser inside one pair and was clicked"""

    winner: DocumentId
    loser: DocumentId
    query_id: str = ""

    def __post_init__(self):
        if self.winner == self.loser:
            raise ValueError(f"A preference vote needs two different documents, got {self.winner!r}")


@dataclass(frozen=True)
class RelevanceVote:
    """Absolute 'relevant' vote from a click, kept apart from pairwise votes"""

    document: DocumentId
    presented_rank: int
    query_id: str = ""
