"""Exceptions raised by fairpairs-lab"""
from typing import Dict, Optional


class FairPairsError(Exception):
    """Base class for every error raised by this package"""


class InvalidRelevance(FairPairsError, ValueError):
    pass


class TiedRelevance(FairPairsError, ValueError):
    pass


class PlanSizeMismatch(FairPairsError, ValueError):
    pass


class RankOutOfRange(FairPairsError, ValueError):
    pass


class InvalidSpec(FairPairsError, ValueError):
    pass


class MissingRelevance(FairPairsError, LookupError):
    pass


class OrderViolation(FairPairsError, ValueError):
    pass


class InconsistentRecord(FairPairsError, ValueError):
    pass


class NoData(FairPairsError, LookupError):
    pass


class BadConfidence(FairPairsError, ValueError):
    pass


class InvalidTable(FairPairsError, ValueError):
    pass


class ZeroGap(FairPairsError, ValueError):
    pass


class MissingDocument(FairPairsError, LookupError):
    pass


class TooManyDocuments(FairPairsError, ValueError):
    pass


class ProbeRelevanceTooHigh(FairPairsError, ValueError):
    pass


class ConfigError(FairPairsError, ValueError):
    """Invalid experiment configuration; `errors` maps field name to problem"""

    def __init__(self, errors: Dict[str, str]):
        self.errors = dict(errors)
        details = "; ".join(f"{field}: {message}" for field, message in sorted(self.errors.items()))
        super().__init__(f"Invalid configuration: {details}")


class ParseError(FairPairsError, ValueError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")


class VersionError(ParseError):
    pass


class ReportIOError(FairPairsError, OSError):
    pass


class VerificationFailed(FairPairsError):
    pass
