"""CSV output: report tables, pair statistics and learned rankings"""
import csv
import logging
import os
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from src.models.core import DocumentId
from src.models.pair_stats import PairStats
from src.models.report import REPORT_COLUMNS, ReportTable
from src.services.statistics import wilson_interval
from src.utils.exceptions import ParseError, ReportIOError

logger = logging.getLogger(__name__)

PAIR_STATS_COLUMNS = ("doc_i", "doc_j", "n_ij", "c_ij", "p_ij", "ci_lo", "ci_hi")
SIGNIFICANCE_COLUMNS = ("first", "second", "p_value")
RANKING_COLUMNS = ("rank", "document")


def format_number(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _write_rows(path: str, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_number(value) for value in row])
    except OSError as e:
        raise ReportIOError(f"cannot write {path}: {e.strerror}")


def write_table_csv(path: str, table: ReportTable) -> None:
    _write_rows(path, REPORT_COLUMNS, (
        [row.to_dict()[column] for column in REPORT_COLUMNS] for row in table.rows
    ))


def write_significance_csv(path: str, table: ReportTable) -> None:
    _write_rows(path, SIGNIFICANCE_COLUMNS, (
        [first, second, p_value] for (first, second), p_value in table.significance.items()
    ))


def pair_stats_rows(stats: PairStats, confidence: float = 0.95) -> List[list]:
    """
    Repeated clicks count as repeated votes, so c can exceed n. p_ij is then
    above 1 while the interval is computed at c = n; such rows are logged.
    """
    rows = []
    for i, j in stats.ordered_pairs():
        n, c = stats.n(i, j), stats.c(i, j)
        if n == 0:
            continue
        if c > n:
            logger.warning(f"Pair ({i}, {j}): {c} clicks over {n} impressions; interval capped at p = 1")
        lo, hi = wilson_interval(min(c, n), n, confidence)
        rows.append([i, j, n, c, c / n, lo, hi])
    return rows


def write_pair_stats_csv(path: str, stats: PairStats, confidence: float = 0.95) -> None:
    _write_rows(path, PAIR_STATS_COLUMNS, pair_stats_rows(stats, confidence))


def read_pair_stats_csv(path: str) -> PairStats:
    """Counts back from a pair-stats CSV; document ids are read as strings"""
    stats = PairStats()
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            if tuple(reader.fieldnames or ()) != PAIR_STATS_COLUMNS:
                raise ParseError(f"expected columns {', '.join(PAIR_STATS_COLUMNS)}", 1)
            for line_number, row in enumerate(reader, start=2):
                try:
                    n, c = int(row["n_ij"]), int(row["c_ij"])
                except (TypeError, ValueError):
                    raise ParseError("n_ij and c_ij must be integers", line_number)
                if n < 0 or c < 0:
                    raise ParseError("counts must be non-negative", line_number)
                stats.add(row["doc_i"], row["doc_j"], impressions=n, clicks=c)
    except OSError as e:
        raise ReportIOError(f"cannot read {path}: {e.strerror}")
    return stats


def write_ranking_csv(path: str, ranking: Sequence[DocumentId]) -> None:
    _write_rows(path, RANKING_COLUMNS, ([rank, document] for rank, document in enumerate(ranking, start=1)))


def emit_report(output_dir: str, tables: Mapping[str, ReportTable], stats: Optional[PairStats] = None,
                ranking: Optional[Sequence[DocumentId]] = None) -> Dict[str, str]:
    """
    One CSV per table (plus its Fisher p-values when it has any), the pair
    statistics and the learned ranking when given. Returns name -> path.
    """
    try:
        os.makedirs(output_dir, exist_ok=True)
    except OSError as e:
        raise ReportIOError(f"cannot create {output_dir}: {e.strerror}")

    written = {}
    for name in sorted(tables):
        table = tables[name]
        path = os.path.join(output_dir, f"{name}.csv")
        write_table_csv(path, table)
        written[name] = path
        if table.significance:
            significance_path = os.path.join(output_dir, f"{name}_significance.csv")
            write_significance_csv(significance_path, table)
            written[f"{name}_significance"] = significance_path
    if stats is not None:
        path = os.path.join(output_dir, "pair_stats.csv")
        write_pair_stats_csv(path, stats)
        written["pair_stats"] = path
    if ranking is not None:
        path = os.path.join(output_dir, "ranking.csv")
        write_ranking_csv(path, ranking)
        written["ranking"] = path
    logger.info(f"Wrote {len(written)} report files to {output_dir}")
    return written
