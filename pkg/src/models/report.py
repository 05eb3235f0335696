from dataclasses import dataclass, field
from typing import Dict, Iterable, Tuple

REPORT_COLUMNS = ("pair_type", "impressions", "clicks", "p_hat", "ci_lo", "ci_hi")


@dataclass(frozen=True)
class ReportRow:
    pair_type: str
    impressions: int
    clicks: int
    ci_lo: float
    ci_hi: float

    @property
    def p_hat(self) -> float:
        return self.clicks / self.impressions

    def to_dict(self):
        return {
            "pair_type": self.pair_type,
            "impressions": self.impressions,
            "clicks": self.clicks,
            "p_hat": self.p_hat,
            "ci_lo": self.ci_lo,
            "ci_hi": self.ci_hi,
        }


@dataclass(frozen=True)
class ReportTable:
    """Rows keyed by pair type label (e.g. '1-2', '2-1', '1-#', '#-1')"""

    name: str
    rows: Tuple[ReportRow, ...] = ()
    # Fisher exact p-values keyed by the compared row labels
    significance: Dict[Tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))

    def __len__(self) -> int:
        return len(self.rows)

    def row(self, pair_type: str) -> ReportRow:
        for row in self.rows:
            if row.pair_type == pair_type:
                return row
        raise KeyError(pair_type)

    def labels(self) -> Iterable[str]:
        return [row.pair_type for row in self.rows]
