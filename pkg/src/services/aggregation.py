"""
Turning click-log records into pair counts, and checking whether the counts
are sufficient for the error-rate minimizer to recover the true order.
"""
import logging
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

from src.models.click_log import ClickLogRecord
from src.models.core import DocumentId, RankedList
from src.models.pair_stats import (
    ConvergenceParams,
    PairStats,
    PairSufficiency,
    RelevanceTally,
    SufficiencyReport,
    doc_sort_key,
)
from src.models.plan import PreferenceVote
from src.services.fairpairs import apply_flip_plan, assign_pairs
from src.services.learner import naive_extractor, skip_above_extractor
from src.services.statistics import half_width
from src.utils.exceptions import InconsistentRecord, NoData, PlanSizeMismatch, ZeroGap

logger = logging.getLogger(__name__)

FAIRPAIRS = "fairpairs"
FAIRPAIRS_TOP = "fairpairs_top"
SKIP_ABOVE = "skip_above"
NAIVE = "naive"
EXTRACTORS = (FAIRPAIRS, SKIP_ABOVE, NAIVE)

Accumulator = Union[PairStats, RelevanceTally]

# Smallest |P_ij - P_ji| treated as a real asymmetry
MIN_GAP = 1e-12


def _check_consistent(record: ClickLogRecord):
    try:
        perturbed = apply_flip_plan(record.original, record.plan)
    except (PlanSizeMismatch, ValueError) as e:
        raise InconsistentRecord(f"record {record.seed_info}: {e}")
    if perturbed.order.order != record.presented_order:
        raise InconsistentRecord(
            f"record {record.seed_info}: presented order {list(record.presented_order)} "
            f"is not the original order under k={record.k}, flags={list(record.swap_flags)}"
        )


def record_votes(stats: PairStats, impression: ClickLogRecord) -> PairStats:
    """
    Count one impression into `stats` (in place) and return it: n for every
    realized (bottom, top) pair orientation, c for clicks on the pair bottom.
    """
    _check_consistent(impression)
    presented = impression.presented_order
    for top, bottom in assign_pairs(len(presented), impression.k).pairs:
        stats.add(presented[bottom - 1], presented[top - 1], impressions=1, clicks=impression.clicks_at(bottom))
    return stats


def record_top_votes(stats: PairStats, impression: ClickLogRecord) -> PairStats:
    """Top-of-pair stream: n for d_i shown directly above d_j inside a pair, c for clicks on d_i"""
    _check_consistent(impression)
    presented = impression.presented_order
    for top, bottom in assign_pairs(len(presented), impression.k).pairs:
        stats.add(presented[top - 1], presented[bottom - 1], impressions=1, clicks=impression.clicks_at(top))
    return stats


def record_preference_votes(stats: PairStats, presented: RankedList,
                            votes: Iterable[PreferenceVote]) -> PairStats:
    """
    Count skip-above votes: n_ij for every pair with d_i shown anywhere below
    d_j, c_ij for every vote d_i over d_j.
    """
    order = presented.order
    for lower in range(1, len(order)):
        for upper in range(lower):
            stats.add(order[lower], order[upper], impressions=1)
    for vote in votes:
        stats.add(vote.winner, vote.loser, clicks=1)
    return stats


def estimate_p(stats: PairStats, i: DocumentId, j: DocumentId) -> float:
    n = stats.n(i, j)
    if n == 0:
        raise NoData(f"no impressions of {i!r} directly below {j!r}")
    return stats.c(i, j) / n


def new_accumulators(extractors: Iterable[str] = (FAIRPAIRS,), top_click_votes: bool = False) -> Dict[str, Accumulator]:
    accumulators: Dict[str, Accumulator] = {}
    for name in extractors:
        if name not in EXTRACTORS:
            raise ValueError(f"unknown extractor {name!r}; expected one of {', '.join(EXTRACTORS)}")
        accumulators[name] = RelevanceTally() if name == NAIVE else PairStats()
    if top_click_votes:
        accumulators[FAIRPAIRS_TOP] = PairStats()
    return accumulators


def accumulate(accumulators: Dict[str, Accumulator], record: ClickLogRecord) -> Dict[str, Accumulator]:
    """Feed one record to every enabled extractor"""
    if FAIRPAIRS in accumulators:
        record_votes(accumulators[FAIRPAIRS], record)
    if FAIRPAIRS_TOP in accumulators:
        record_top_votes(accumulators[FAIRPAIRS_TOP], record)
    if SKIP_ABOVE in accumulators:
        presented = record.presented
        votes = skip_above_extractor(presented, record.clicked_ranks, record.query_id)
        record_preference_votes(accumulators[SKIP_ABOVE], presented, votes)
    if NAIVE in accumulators:
        presented = record.presented
        accumulators[NAIVE].record(presented.order, naive_extractor(presented, record.clicked_ranks, record.query_id))
    return accumulators


def merge_accumulators(first: Mapping[str, Accumulator], second: Mapping[str, Accumulator]) -> Dict[str, Accumulator]:
    merged = {}
    for name in list(first) + [name for name in second if name not in first]:
        if name in first and name in second:
            merged[name] = first[name].merge(second[name])
        else:
            merged[name] = first[name] if name in first else second[name]
    return merged


def aggregate_log(records: Iterable[ClickLogRecord], extractors: Iterable[str] = (FAIRPAIRS,),
                  top_click_votes: bool = False) -> Dict[str, Accumulator]:
    """Replay a click log through the extractors"""
    accumulators = new_accumulators(extractors, top_click_votes)
    count = 0
    for record in records:
        accumulate(accumulators, record)
        count += 1
    logger.info(f"Aggregated {count} records into {', '.join(accumulators) or 'no extractors'}")
    return accumulators


def epsilon_from_model(true_P: Mapping[Tuple[DocumentId, DocumentId], float]) -> ConvergenceParams:
    """eps = half the smallest |P_ij - P_ji| over the pairs in true_P"""
    if not true_P:
        raise NoData("no pair probabilities given")
    gaps = []
    for (i, j), probability in true_P.items():
        if (j, i) not in true_P:
            raise NoData(f"P is given for ({i!r}, {j!r}) but not for ({j!r}, {i!r})")
        gap = abs(probability - true_P[(j, i)])
        if gap < MIN_GAP:
            raise ZeroGap(f"P({i!r}, {j!r}) equals P({j!r}, {i!r}); pairs are indistinguishable")
        gaps.append(gap)
    return ConvergenceParams(epsilon=min(gaps) / 2.0)


def sufficiency_check(stats: PairStats, params: ConvergenceParams,
                      true_P: Optional[Mapping[Tuple[DocumentId, DocumentId], float]] = None,
                      confidence: float = 0.95) -> SufficiencyReport:
    """
    Per ordered pair: balance |1 - n_ji/n_ij| < eps and accuracy |p_ij - P_ij| < eps/2.

    Without true_P the accuracy condition uses the Wilson half-width of p_ij
    as a stand-in, and the result is marked as a proxy. The required pairs are
    the keys of true_P, or every pair with data.
    """
    epsilon = params.epsilon
    required = sorted(true_P if true_P is not None else stats.ordered_pairs(),
                      key=lambda pair: (doc_sort_key(pair[0]), doc_sort_key(pair[1])))
    results = []
    for i, j in required:
        n_ij, n_ji = stats.n(i, j), stats.n(j, i)
        if n_ij == 0 or n_ji == 0:
            raise NoData(f"pair ({i!r}, {j!r}) lacks impressions in one presentation order")
        balance = abs(1.0 - n_ji / n_ij)
        p_ij = stats.c(i, j) / n_ij
        if true_P is not None:
            accuracy_ok = abs(p_ij - true_P[(i, j)]) < epsilon / 2.0
        else:
            accuracy_ok = half_width(stats.c(i, j), n_ij, confidence) < epsilon / 2.0
        results.append(PairSufficiency(
            pair=(i, j),
            balance=balance,
            balance_ok=balance < epsilon,
            accuracy_ok=accuracy_ok,
            proxy=true_P is None,
        ))
    report = SufficiencyReport(tuple(results))
    logger.debug(f"Sufficiency: {sum(p.sufficient for p in results)}/{len(results)} pairs pass at eps={epsilon:.5f}")
    return report
