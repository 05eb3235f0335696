from dataclasses import dataclass
from datetime import datetime
from typing import Optional, Tuple

import pytz

from src.models.core import DocumentId, RankedList
from src.models.plan import FlipPlan

LOG_SCHEMA = "fairpairs.click_log/1"
RECORD_FIELDS = (
    "query_id",
    "k",
    "swap_flags",
    "original_order",
    "presented_order",
    "clicked_ranks",
    "seed_info",
)


def get_utc_now():
    """Get current time in UTC"""
    return datetime.now(pytz.utc)


@dataclass(frozen=True)
class ClickLogRecord:
    """One impression: the flip plan, what was shown and which presented ranks were clicked"""

    query_id: str
    k: int
    swap_flags: Tuple[bool, ...]
    original_order: Tuple[DocumentId, ...]
    presented_order: Tuple[DocumentId, ...]
    clicked_ranks: Tuple[int, ...]
    seed_info: Tuple[int, int]
    timestamp: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "swap_flags", tuple(self.swap_flags))
        object.__setattr__(self, "original_order", tuple(self.original_order))
        object.__setattr__(self, "presented_order", tuple(self.presented_order))
        object.__setattr__(self, "clicked_ranks", tuple(sorted(self.clicked_ranks)))
        object.__setattr__(self, "seed_info", tuple(self.seed_info))

    @property
    def plan(self) -> FlipPlan:
        return FlipPlan(self.k, self.swap_flags)

    @property
    def original(self) -> RankedList:
        return RankedList(self.original_order)

    @property
    def presented(self) -> RankedList:
        return RankedList(self.presented_order)

    def clicks_at(self, rank: int) -> int:
        return self.clicked_ranks.count(rank)

    def to_dict(self):
        """Convert record to a dictionary with the log's field order"""
        data = {
            "schema": LOG_SCHEMA,
            "query_id": self.query_id,
            "k": self.k,
            "swap_flags": list(self.swap_flags),
            "original_order": list(self.original_order),
            "presented_order": list(self.presented_order),
            "clicked_ranks": list(self.clicked_ranks),
            "seed_info": list(self.seed_info),
        }
        if self.timestamp is not None:
            data["timestamp"] = self.timestamp
        return data

    @classmethod
    def from_dict(cls, data):
        """Create a record from a dictionary, validating types and ranks"""
        missing = [name for name in RECORD_FIELDS if name not in data]
        if missing:
            raise ValueError(f"missing fields: {', '.join(missing)}")
        unknown = set(data) - set(RECORD_FIELDS) - {"schema", "timestamp"}
        if unknown:
            raise ValueError(f"unknown fields: {', '.join(sorted(unknown))}")

        k = data["k"]
        if isinstance(k, bool) or not isinstance(k, int) or k not in (0, 1):
            raise ValueError(f"k must be 0 or 1, got {k!r}")
        swap_flags = data["swap_flags"]
        if not isinstance(swap_flags, list) or not all(isinstance(flag, bool) for flag in swap_flags):
            raise ValueError("swap_flags must be a list of booleans")
        original_order = data["original_order"]
        presented_order = data["presented_order"]
        for name, order in (("original_order", original_order), ("presented_order", presented_order)):
            if not isinstance(order, list) or not order:
                raise ValueError(f"{name} must be a non-empty list")
        if len(original_order) != len(presented_order):
            raise ValueError("original_order and presented_order differ in length")
        clicked_ranks = data["clicked_ranks"]
        if not isinstance(clicked_ranks, list):
            raise ValueError("clicked_ranks must be a list")
        for rank in clicked_ranks:
            if isinstance(rank, bool) or not isinstance(rank, int) or not 1 <= rank <= len(presented_order):
                raise ValueError(f"clicked rank {rank!r} outside 1..{len(presented_order)}")
        seed_info = data["seed_info"]
        if not isinstance(seed_info, list) or len(seed_info) != 2 or not all(
                isinstance(v, int) and not isinstance(v, bool) for v in seed_info):
            raise ValueError("seed_info must be [experiment_seed, query_index]")

        return cls(
            query_id=data["query_id"],
            k=k,
            swap_flags=tuple(swap_flags),
            original_order=tuple(original_order),
            presented_order=tuple(presented_order),
            clicked_ranks=tuple(clicked_ranks),
            seed_info=tuple(seed_info),
            timestamp=data.get("timestamp"),
        )
