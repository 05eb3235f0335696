"""Shared domain vocabulary: documents, relevances, queries and rankings"""
from dataclasses import dataclass
from typing import Dict, Iterable, Tuple, Union

from src.utils.exceptions import InvalidRelevance, TiedRelevance

DocumentId = Union[str, int]
Relevance = float


def check_relevance(value) -> float:
    """Validate a relevance value and return it as a float in [0, 1]"""
    try:
        relevance = float(value)
    except (TypeError, ValueError):
        raise InvalidRelevance(f"Relevance must be a number, got {value!r}")
    if not 0.0 <= relevance <= 1.0:
        raise InvalidRelevance(f"Relevance must lie in [0, 1], got {relevance}")
    return relevance


def _check_distinct(order: Tuple[DocumentId, ...], what: str):
    if len(set(order)) != len(order):
        raise ValueError(f"{what} contains repeated document ids: {list(order)}")


@dataclass(frozen=True)
class RankedList:
    """Documents in presentation order; rank r is order[r - 1]"""

    order: Tuple[DocumentId, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        if not self.order:
            raise ValueError("A ranked list needs at least one document")
        _check_distinct(self.order, "Ranked list")

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    def doc_at(self, rank: int) -> DocumentId:
        return self.order[rank - 1]

    def rank_of(self, document: DocumentId) -> int:
        return self.order.index(document) + 1


@dataclass(frozen=True)
class TrueRanking:
    """Documents in strictly decreasing relevance"""

    order: Tuple[DocumentId, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))


@dataclass(frozen=True)
class Query:
    """A query with its candidate documents in base-ranker order and their relevances"""

    query_id: str
    candidates: Tuple[Tuple[DocumentId, float], ...]

    def __post_init__(self):
        candidates = tuple((doc, check_relevance(rel)) for doc, rel in self.candidates)
        if not candidates:
            raise ValueError("A query needs at least one candidate document")
        _check_distinct(tuple(doc for doc, _ in candidates), "Query candidates")
        object.__setattr__(self, "candidates", candidates)

    @classmethod
    def from_relevances(cls, query_id: str, documents: Iterable[DocumentId], relevances: Iterable[float]) -> "Query":
        return cls(query_id, tuple(zip(documents, relevances)))

    @property
    def documents(self) -> Tuple[DocumentId, ...]:
        return tuple(doc for doc, _ in self.candidates)

    def relevances(self) -> Dict[DocumentId, float]:
        return dict(self.candidates)

    def ranked_list(self) -> RankedList:
        return RankedList(self.documents)

    def to_dict(self):
        return {
            "query_id": self.query_id,
            "candidates": [[doc, rel] for doc, rel in self.candidates],
        }


def true_ranking(query: Query) -> TrueRanking:
    """Order the candidates by strictly decreasing relevance"""
    by_relevance = sorted(query.candidates, key=lambda candidate: candidate[1], reverse=True)
    for (doc_a, rel_a), (doc_b, rel_b) in zip(by_relevance, by_relevance[1:]):
        if rel_a == rel_b:
            raise TiedRelevance(f"Documents {doc_a!r} and {doc_b!r} share relevance {rel_a}")
    return TrueRanking(tuple(doc for doc, _ in by_relevance))
