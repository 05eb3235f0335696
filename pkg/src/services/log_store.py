"""Newline-delimited JSON click logs"""
import json
import logging
from typing import Iterable, Iterator, List

from src.models.click_log import LOG_SCHEMA, ClickLogRecord
from src.utils.exceptions import ParseError, ReportIOError, VersionError

logger = logging.getLogger(__name__)


def serialize_record(record: ClickLogRecord) -> str:
    return json.dumps(record.to_dict(), separators=(",", ":"), ensure_ascii=False)


def parse_record(line: str, line_number: int = None) -> ClickLogRecord:
    try:
        data = json.loads(line)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", line_number)
    if not isinstance(data, dict):
        raise ParseError("a record must be a JSON object", line_number)
    schema = data.get("schema")
    if schema != LOG_SCHEMA:
        raise VersionError(f"unknown log schema {schema!r}, expected {LOG_SCHEMA!r}", line_number)
    try:
        return ClickLogRecord.from_dict(data)
    except (TypeError, ValueError) as e:
        raise ParseError(str(e), line_number)


def write_log(path: str, records: Iterable[ClickLogRecord]) -> int:
    """Write one record per line (UTF-8, LF endings); returns the number written"""
    count = 0
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for record in records:
                f.write(serialize_record(record))
                f.write("\n")
                count += 1
    except OSError as e:
        raise ReportIOError(f"cannot write log {path}: {e.strerror}")
    logger.info(f"Wrote {count} records to {path}")
    return count


def iter_log(path: str) -> Iterator[ClickLogRecord]:
    """Records in file order; blank lines are skipped"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                if line.strip():
                    yield parse_record(line, line_number)
    except OSError as e:
        raise ReportIOError(f"cannot read log {path}: {e.strerror}")


def read_log(path: str) -> List[ClickLogRecord]:
    records = list(iter_log(path))
    logger.info(f"Read {len(records)} records from {path}")
    return records
