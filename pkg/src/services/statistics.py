"""Binomial confidence intervals and the two-sided Fisher exact test"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy import stats

from src.utils.exceptions import BadConfidence, InvalidTable

logger = logging.getLogger(__name__)

# Tables whose probability is within this relative tolerance of the observed
# one count as "as extreme" in the two-sided sum
FISHER_RELATIVE_TOLERANCE = 1e-7


def z_score(confidence: float) -> float:
    if not 0.0 < confidence < 1.0:
        raise BadConfidence(f"confidence must lie strictly between 0 and 1, got {confidence}")
    return float(stats.norm.ppf(1.0 - (1.0 - confidence) / 2.0))


def wilson_interval(c: int, n: int, confidence: float = 0.95) -> Tuple[float, float]:
    """
    Wilson score interval for c successes out of n trials.

    The bounds are exactly 0 when c = 0 and exactly 1 when c = n.
    """
    z = z_score(confidence)
    if n < 1:
        raise ValueError(f"need at least one trial, got n={n}")
    if not 0 <= c <= n:
        raise ValueError(f"successes must lie in 0..{n}, got {c}")

    p_hat = c / n
    z2 = z * z
    denominator = 1.0 + z2 / n
    center = (p_hat + z2 / (2.0 * n)) / denominator
    spread = z * math.sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / denominator

    lo = 0.0 if c == 0 else max(0.0, center - spread)
    hi = 1.0 if c == n else min(1.0, center + spread)
    return lo, hi


def half_width(c: int, n: int, confidence: float = 0.95) -> float:
    lo, hi = wilson_interval(c, n, confidence)
    return (hi - lo) / 2.0


@dataclass(frozen=True)
class FisherResult:
    p_value: float
    # A zero row or column margin leaves a single possible table
    degenerate: bool = False


def _checked_table(table: Sequence[Sequence[int]]) -> np.ndarray:
    try:
        counts = np.asarray(table)
    except (TypeError, ValueError) as e:
        raise InvalidTable(f"not a 2x2 table: {e}")
    if counts.shape != (2, 2):
        raise InvalidTable(f"expected a 2x2 table, got shape {counts.shape}")
    if not np.all(np.equal(np.mod(counts, 1), 0)) or np.any(counts < 0):
        raise InvalidTable(f"table entries must be non-negative integers, got {counts.tolist()}")
    return counts.astype(np.int64)


def fisher_exact(table: Sequence[Sequence[int]]) -> FisherResult:
    """
    Two-sided Fisher exact test on a 2x2 table of counts.

    Sums the hypergeometric probability of every table with the observed
    margins that is no more likely than the observed one.
    """
    counts = _checked_table(table)
    row_totals = counts.sum(axis=1)
    col_totals = counts.sum(axis=0)
    if np.any(row_totals == 0) or np.any(col_totals == 0):
        logger.warning(f"Degenerate table {counts.tolist()}: a margin is zero, reporting p = 1")
        return FisherResult(p_value=1.0, degenerate=True)

    total = int(counts.sum())
    first_row, first_col = int(row_totals[0]), int(col_totals[0])
    distribution = stats.hypergeom(total, first_col, first_row)
    support = np.arange(max(0, first_row + first_col - total), min(first_row, first_col) + 1)
    probabilities = distribution.pmf(support)
    observed = distribution.pmf(int(counts[0, 0]))

    as_extreme = probabilities <= observed * (1.0 + FISHER_RELATIVE_TOLERANCE)
    p_value = float(min(1.0, probabilities[as_extreme].sum()))
    return FisherResult(p_value=p_value)
