"""Accumulated pair counts and the reports computed from them"""
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Optional, Set, Tuple

from src.models.core import DocumentId

OrderedPair = Tuple[DocumentId, DocumentId]


class PairStats:
    """
    Counts keyed by ordered document pair (i, j).

    n(i, j): impressions with d_j shown directly above d_i inside a pair.
    c(i, j): clicks on d_i in that configuration.

    A shard has a single writer; shards combine with `merge`, which is an
    entrywise sum with the empty PairStats as identity.
    """

    def __init__(self, impressions: Optional[Dict[OrderedPair, int]] = None,
                 clicks: Optional[Dict[OrderedPair, int]] = None):
        self._impressions: Counter = Counter(impressions or {})
        self._clicks: Counter = Counter(clicks or {})

    def add(self, i: DocumentId, j: DocumentId, impressions: int = 0, clicks: int = 0) -> None:
        key = (i, j)
        self._impressions[key] += impressions
        self._clicks[key] += clicks

    def n(self, i: DocumentId, j: DocumentId) -> int:
        return self._impressions.get((i, j), 0)

    def c(self, i: DocumentId, j: DocumentId) -> int:
        return self._clicks.get((i, j), 0)

    def ordered_pairs(self) -> Iterator[OrderedPair]:
        keys = set(self._impressions) | set(self._clicks)
        return iter(sorted(keys, key=_pair_sort_key))

    def unordered_pairs(self) -> Iterator[OrderedPair]:
        """Each pair once, as (smaller id, larger id)"""
        seen: Set[OrderedPair] = set()
        for i, j in self.ordered_pairs():
            pair = tuple(sorted((i, j), key=doc_sort_key))
            if pair not in seen:
                seen.add(pair)
                yield pair

    def documents(self) -> Set[DocumentId]:
        docs: Set[DocumentId] = set()
        for i, j in self.ordered_pairs():
            docs.update((i, j))
        return docs

    def total_votes(self) -> int:
        return sum(self._clicks.values())

    def total_impressions(self, document: DocumentId) -> int:
        return sum(n for (i, j), n in self._impressions.items() if document in (i, j))

    def merge(self, other: "PairStats") -> "PairStats":
        merged = PairStats(self._impressions, self._clicks)
        merged._impressions.update(other._impressions)
        merged._clicks.update(other._clicks)
        return merged

    def copy(self) -> "PairStats":
        return PairStats(self._impressions, self._clicks)

    def is_empty(self) -> bool:
        return not self._impressions and not self._clicks

    def __eq__(self, other) -> bool:
        if not isinstance(other, PairStats):
            return NotImplemented
        return dict(self._impressions) == dict(other._impressions) and dict(self._clicks) == dict(other._clicks)

    def __repr__(self):
        return f"<PairStats pairs={len(set(self._impressions) | set(self._clicks))} votes={self.total_votes()}>"


def doc_sort_key(document: DocumentId):
    return (type(document).__name__, document)


def _pair_sort_key(pair: OrderedPair):
    return tuple(doc_sort_key(doc) for doc in pair)


class RelevanceTally:
    """Absolute click votes per document and per presented rank"""

    def __init__(self):
        self.doc_impressions: Counter = Counter()
        self.doc_clicks: Counter = Counter()
        self.rank_impressions: Counter = Counter()
        self.rank_clicks: Counter = Counter()

    def record(self, presented: Iterable[DocumentId], votes) -> "RelevanceTally":
        for rank, document in enumerate(presented, start=1):
            self.doc_impressions[document] += 1
            self.rank_impressions[rank] += 1
        for vote in votes:
            self.doc_clicks[vote.document] += 1
            self.rank_clicks[vote.presented_rank] += 1
        return self

    def vote_mass(self, rank: int) -> int:
        return self.rank_clicks.get(rank, 0)

    def merge(self, other: "RelevanceTally") -> "RelevanceTally":
        merged = RelevanceTally()
        for name in ("doc_impressions", "doc_clicks", "rank_impressions", "rank_clicks"):
            counter = getattr(merged, name)
            counter.update(getattr(self, name))
            counter.update(getattr(other, name))
        return merged

    def __eq__(self, other) -> bool:
        if not isinstance(other, RelevanceTally):
            return NotImplemented
        return all(
            dict(getattr(self, name)) == dict(getattr(other, name))
            for name in ("doc_impressions", "doc_clicks", "rank_impressions", "rank_clicks")
        )


@dataclass(frozen=True)
class ConvergenceParams:
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(frozen=True)
class PairSufficiency:
    pair: OrderedPair
    balance: float
    balance_ok: bool
    accuracy_ok: bool
    # True when accuracy came from the confidence-interval proxy rather than the true P
    proxy: bool

    @property
    def sufficient(self) -> bool:
        return self.balance_ok and self.accuracy_ok


@dataclass(frozen=True)
class SufficiencyReport:
    pairs: Tuple[PairSufficiency, ...]

    @property
    def sufficient(self) -> bool:
        return bool(self.pairs) and all(pair.sufficient for pair in self.pairs)

    def per_pair(self) -> Dict[OrderedPair, bool]:
        return {pair.pair: pair.sufficient for pair in self.pairs}
