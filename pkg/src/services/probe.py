"""
Probe-document experiment and the report tables built from click logs.

A pair is labelled by the original ranks of its top and bottom documents,
with `#` for the probe: "1-2" normal, "2-1" reversed, "1-#" probe at the
bottom, "#-1" probe on top.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from src.config.experiment_config import ExperimentConfig
from src.models.click_log import ClickLogRecord
from src.models.core import DocumentId
from src.models.report import ReportRow, ReportTable
from src.services.fairpairs import assign_pairs
from src.services.simulation import PROBE_DOCUMENT, run_simulation
from src.services.statistics import fisher_exact, wilson_interval
from src.utils.exceptions import ConfigError

logger = logging.getLogger(__name__)

NORMAL = "normal"
REVERSED = "reversed"
PROBE_BOTTOM = "probe_bottom"
PROBE_TOP = "probe_top"
PAIR_KINDS = (NORMAL, REVERSED, PROBE_BOTTOM, PROBE_TOP)
MATCHED = "matched"
TOP_PAIR_GROUPS = (2, 5)


@dataclass
class PairTypeCounts:
    impressions: int = 0
    bottom_clicks: int = 0
    top_clicks: int = 0

    def add(self, other: "PairTypeCounts"):
        self.impressions += other.impressions
        self.bottom_clicks += other.bottom_clicks
        self.top_clicks += other.top_clicks


def _original_label(record: ClickLogRecord, document: DocumentId) -> str:
    if document == PROBE_DOCUMENT:
        return PROBE_DOCUMENT
    return str(record.original_order.index(document) + 1)


def pair_type_label(record: ClickLogRecord, top_rank: int) -> str:
    """Label of the pair presented at (top_rank, top_rank + 1)"""
    presented = record.presented_order
    return f"{_original_label(record, presented[top_rank - 1])}-{_original_label(record, presented[top_rank])}"


def classify_label(label: str) -> Tuple[Optional[str], Optional[int]]:
    """(pair kind, original rank the pair is grouped under); (None, None) for labels of no kind"""
    top, bottom = label.split("-")
    if top == PROBE_DOCUMENT and bottom != PROBE_DOCUMENT:
        return PROBE_TOP, int(bottom)
    if bottom == PROBE_DOCUMENT and top != PROBE_DOCUMENT:
        return PROBE_BOTTOM, int(top)
    if top == PROBE_DOCUMENT:
        return None, None
    top_rank, bottom_rank = int(top), int(bottom)
    if bottom_rank == top_rank + 1:
        return NORMAL, top_rank
    if top_rank == bottom_rank + 1:
        return REVERSED, bottom_rank
    return None, None


def count_pair_types(records: Iterable[ClickLogRecord], clicked_only: bool = False) -> Dict[str, PairTypeCounts]:
    """Impressions and clicks per pair label; clicked_only keeps impressions with at least one click"""
    counts: Dict[str, PairTypeCounts] = defaultdict(PairTypeCounts)
    for record in records:
        if clicked_only and not record.clicked_ranks:
            continue
        for top, bottom in assign_pairs(len(record.presented_order), record.k).pairs:
            counts[pair_type_label(record, top)].add(
                PairTypeCounts(1, record.clicks_at(bottom), record.clicks_at(top))
            )
    return dict(counts)


def count_pair_cells(records: Iterable[ClickLogRecord],
                     clicked_only: bool = False) -> Dict[Tuple[str, int], PairTypeCounts]:
    """Like count_pair_types, keyed by (label, presented top rank)"""
    cells: Dict[Tuple[str, int], PairTypeCounts] = defaultdict(PairTypeCounts)
    for record in records:
        if clicked_only and not record.clicked_ranks:
            continue
        for top, bottom in assign_pairs(len(record.presented_order), record.k).pairs:
            cells[(pair_type_label(record, top), top)].add(
                PairTypeCounts(1, record.clicks_at(bottom), record.clicks_at(top))
            )
    return dict(cells)


def matched_label(label: str, position: int) -> str:
    """
    The label of the same pair slot with the probe's place taken by the
    document that originally held it. A pair presented at (position,
    position + 1) always holds the original ranks position and position + 1.
    """
    top, bottom = label.split("-")
    if top == PROBE_DOCUMENT:
        return f"{2 * position + 1 - int(bottom)}-{bottom}"
    return f"{top}-{2 * position + 1 - int(top)}"


def matched_counts(cells: Mapping[Tuple[str, int], PairTypeCounts], kind: str, top_pairs: int,
                   top_clicks: bool = False) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """
    ((impressions, clicks) of the probe pairs, (impressions, clicks) of their matched pairs)

    Only cells seen both with the probe and with the original document count.
    The matched click rate is standardized to the probe's mix of cells, so a
    target range that covers part of the list does not tilt the comparison;
    its clicks are that rate times the matched impressions, rounded.
    """
    pairs = []
    for (label, position), probe_counts in cells.items():
        label_kind, rank = classify_label(label)
        if label_kind != kind or rank > top_pairs:
            continue
        reference = cells.get((matched_label(label, position), position))
        if reference is not None:
            pairs.append((probe_counts, reference))

    def clicks_of(counts: PairTypeCounts) -> int:
        return counts.top_clicks if top_clicks else counts.bottom_clicks

    probe_impressions = sum(probe_counts.impressions for probe_counts, _ in pairs)
    probe_clicks = sum(clicks_of(probe_counts) for probe_counts, _ in pairs)
    reference_impressions = sum(reference.impressions for _, reference in pairs)
    if probe_impressions == 0:
        return (0, 0), (0, 0)
    rate = sum(probe_counts.impressions * clicks_of(reference) / reference.impressions
               for probe_counts, reference in pairs) / probe_impressions
    return (probe_impressions, probe_clicks), (reference_impressions, int(round(rate * reference_impressions)))


def group_counts(counts: Mapping[str, PairTypeCounts], kind: str, top_pairs: int) -> PairTypeCounts:
    """Sum of every label of `kind` grouped under an original rank <= top_pairs"""
    total = PairTypeCounts()
    for label, pair_counts in counts.items():
        label_kind, rank = classify_label(label)
        if label_kind == kind and rank <= top_pairs:
            total.add(pair_counts)
    return total


def _row(label: str, impressions: int, clicks: int, confidence: float) -> Optional[ReportRow]:
    if impressions == 0:
        return None
    lo, hi = wilson_interval(clicks, impressions, confidence)
    return ReportRow(label, impressions, clicks, lo, hi)


def _table(name: str, rows: Iterable[Optional[ReportRow]],
           comparisons: Iterable[Tuple[str, str]] = ()) -> ReportTable:
    rows = [row for row in rows if row is not None]
    by_label = {row.pair_type: row for row in rows}
    significance = {}
    for first, second in comparisons:
        if first in by_label and second in by_label:
            a, b = by_label[first], by_label[second]
            significance[(first, second)] = fisher_exact(
                [[a.clicks, a.impressions - a.clicks], [b.clicks, b.impressions - b.clicks]]
            ).p_value
    return ReportTable(name, tuple(rows), significance)


def _label_sort_key(label: str):
    kind, rank = classify_label(label)
    return (rank if rank is not None else float("inf"), PAIR_KINDS.index(kind) if kind else len(PAIR_KINDS), label)


def _grouped_label(kind: str, top_pairs: int, suffix: str = "") -> str:
    return f"{kind}@top{top_pairs}{suffix}"


def _grouped_row(counts, kind: str, top_pairs: int, confidence: float, top_clicks: bool = False):
    grouped = group_counts(counts, kind, top_pairs)
    clicks = grouped.top_clicks if top_clicks else grouped.bottom_clicks
    return _row(_grouped_label(kind, top_pairs, ":top" if top_clicks else ""), grouped.impressions, clicks, confidence)


def pair_type_table(records: Iterable[ClickLogRecord], clicked_only: bool = False,
                    confidence: float = 0.95) -> ReportTable:
    """Bottom-click rows per pair label, then the grouped rows for the top 2 and top 5 pairs"""
    counts = count_pair_types(records, clicked_only)
    rows = [
        _row(label, counts[label].impressions, counts[label].bottom_clicks, confidence)
        for label in sorted(counts, key=_label_sort_key)
    ]
    for top_pairs in TOP_PAIR_GROUPS:
        rows.extend(_grouped_row(counts, kind, top_pairs, confidence) for kind in PAIR_KINDS)
    return _table("pair_types", rows)


def _matched_rows(cells, kind: str, top_pairs: int, confidence: float, top_clicks: bool = False):
    suffix = ":top" if top_clicks else ""
    (probe_n, probe_c), (reference_n, reference_c) = matched_counts(cells, kind, top_pairs, top_clicks)
    return [_row(_grouped_label(f"{MATCHED}_{kind}", top_pairs, suffix), reference_n, reference_c, confidence),
            _row(_grouped_label(kind, top_pairs, suffix), probe_n, probe_c, confidence)]


def _matched_comparisons(kind: str, suffix: str = "") -> List[Tuple[str, str]]:
    return [(_grouped_label(f"{MATCHED}_{kind}", s, suffix), _grouped_label(kind, s, suffix))
            for s in TOP_PAIR_GROUPS]


def figure_tables(records: Iterable[ClickLogRecord], clicked_only: bool = False,
                  confidence: float = 0.95) -> Dict[str, ReportTable]:
    """
    item_relevance:    probe-bottom pairs vs the same slots holding the original
                       bottom document (bottom clicks), then probe-top pairs vs
                       the same slots holding the original top document (top clicks)
    ignored_relevance: probe-top pairs vs the same slots holding the original top
                       document (bottom clicks); the bottom document and its rank
                       are the same on both rows
    preference_test:   probe-bottom vs probe-top over the top 5 pairs, normal vs
                       reversed over the top 2 pairs
    pair_curve:        per original rank i, the pairs i-# and #-i

    clicked_only conditions on the whole impression, which differs between
    probe and matched slots, so the matched rows are only comparable without it.
    """
    records = list(records)
    counts = count_pair_types(records, clicked_only)
    cells = count_pair_cells(records, clicked_only)

    item_rows, ignored_rows = [], []
    for top_pairs in TOP_PAIR_GROUPS:
        item_rows += _matched_rows(cells, PROBE_BOTTOM, top_pairs, confidence)
        ignored_rows += _matched_rows(cells, PROBE_TOP, top_pairs, confidence)
    for top_pairs in TOP_PAIR_GROUPS:
        item_rows += _matched_rows(cells, PROBE_TOP, top_pairs, confidence, top_clicks=True)

    preference_rows = [
        _grouped_row(counts, PROBE_BOTTOM, 5, confidence),
        _grouped_row(counts, PROBE_TOP, 5, confidence),
        _grouped_row(counts, NORMAL, 2, confidence),
        _grouped_row(counts, REVERSED, 2, confidence),
    ]

    curve_rows = []
    probe_ranks = sorted({rank for kind, rank in map(classify_label, counts) if kind in (PROBE_BOTTOM, PROBE_TOP)})
    for rank in probe_ranks:
        for label in (f"{rank}-{PROBE_DOCUMENT}", f"{PROBE_DOCUMENT}-{rank}"):
            pair_counts = counts.get(label, PairTypeCounts())
            curve_rows.append(_row(label, pair_counts.impressions, pair_counts.bottom_clicks, confidence))

    return {
        "item_relevance": _table("item_relevance", item_rows,
                                 _matched_comparisons(PROBE_BOTTOM) + _matched_comparisons(PROBE_TOP, ":top")),
        "ignored_relevance": _table("ignored_relevance", ignored_rows, _matched_comparisons(PROBE_TOP)),
        "preference_test": _table("preference_test", preference_rows, [
            (_grouped_label(PROBE_BOTTOM, 5), _grouped_label(PROBE_TOP, 5)),
            (_grouped_label(NORMAL, 2), _grouped_label(REVERSED, 2)),
        ]),
        "pair_curve": _table("pair_curve", curve_rows, [
            (f"{rank}-{PROBE_DOCUMENT}", f"{PROBE_DOCUMENT}-{rank}") for rank in probe_ranks
        ]),
    }


def relevance_split_table(records: Iterable[ClickLogRecord], relevances: Mapping[DocumentId, float],
                          confidence: float = 0.95) -> ReportTable:
    """
    Per presented pair position, how often only the bottom document is clicked,
    split by whether the top document is strictly more or strictly less
    relevant. Pairs of equally relevant documents are left out.
    """
    counts: Dict[Tuple[int, bool], List[int]] = defaultdict(lambda: [0, 0])
    for record in records:
        presented = record.presented_order
        for top, bottom in assign_pairs(len(presented), record.k).pairs:
            top_relevance, bottom_relevance = relevances[presented[top - 1]], relevances[presented[bottom - 1]]
            if top_relevance == bottom_relevance:
                continue
            cell = counts[(top, top_relevance > bottom_relevance)]
            cell[0] += 1
            cell[1] += int(record.clicks_at(bottom) > 0 and record.clicks_at(top) == 0)

    rows, comparisons = [], []
    for position in sorted({position for position, _ in counts}):
        more, less = f"{position}:top_more_relevant", f"{position}:top_less_relevant"
        for label, top_more in ((more, True), (less, False)):
            impressions, clicks = counts.get((position, top_more), (0, 0))
            rows.append(_row(label, impressions, clicks, confidence))
        comparisons.append((more, less))
    return _table("relevance_split", rows, comparisons)


def run_probe_experiment(config: ExperimentConfig, workers: int = 1) -> ReportTable:
    """Simulate the configured probe experiment and tabulate its pair types"""
    if config.probe is None:
        raise ConfigError({"probe": "the probe experiment needs a probe block"})
    result = run_simulation(config, workers)
    table = pair_type_table(result.log)
    logger.info(f"Probe experiment: {len(result.log)} impressions, {len(table)} report rows")
    return table
