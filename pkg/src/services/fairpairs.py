"""
FairPairs: randomly pair adjacent results, flip each pair with probability 1/2,
and read clicks on pair bottoms as preferences over the result directly above.

Ranks are 1-based throughout.
"""
import itertools
import logging
from functools import lru_cache
from typing import Iterable, Iterator, List, Tuple

import numpy as np

from src.models.core import RankedList
from src.models.plan import FlipPlan, PairAssignment, PerturbedList, PreferenceVote
from src.utils.exceptions import PlanSizeMismatch, RankOutOfRange
from src.utils.helpers import sorted_ranks

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def assign_pairs(n: int, k: int) -> PairAssignment:
    """
    Pair ranks (1,2),(3,4),... when k=0 and (2,3),(4,5),... when k=1.

    Ranks left over at either end are listed as unpaired.
    """
    if n < 1:
        raise ValueError(f"list length must be >= 1, got {n}")
    if k not in (0, 1):
        raise ValueError(f"offset k must be 0 or 1, got {k}")
    pairs = tuple((top, top + 1) for top in range(1 + k, n, 2))
    paired = {rank for pair in pairs for rank in pair}
    unpaired = tuple(rank for rank in range(1, n + 1) if rank not in paired)
    return PairAssignment(pairs, unpaired)


def draw_flip_plan(n: int, rng: np.random.Generator) -> FlipPlan:
    """Draw k uniformly from {0, 1}, then one fair coin per pair"""
    k = int(rng.integers(2))
    num_pairs = len(assign_pairs(n, k).pairs)
    flags = rng.random(num_pairs) < 0.5
    return FlipPlan(k, tuple(bool(flag) for flag in flags))


def apply_flip_plan(ranked: RankedList, plan: FlipPlan) -> PerturbedList:
    """Swap the two documents of every pair whose flag is set"""
    if plan.k not in (0, 1):
        raise PlanSizeMismatch(f"offset k must be 0 or 1, got {plan.k}")
    assignment = assign_pairs(len(ranked), plan.k)
    if len(plan.swap_flags) != len(assignment.pairs):
        raise PlanSizeMismatch(
            f"plan has {len(plan.swap_flags)} swap flags but a list of {len(ranked)} "
            f"with k={plan.k} has {len(assignment.pairs)} pairs"
        )
    order = list(ranked.order)
    for (top, bottom), swap in zip(assignment.pairs, plan.swap_flags):
        if swap:
            order[top - 1], order[bottom - 1] = order[bottom - 1], order[top - 1]
    return PerturbedList(order=RankedList(tuple(order)), plan=plan, original=ranked)


def checked_ranks(clicked_ranks: Iterable[int], n: int) -> List[int]:
    ranks = sorted_ranks(clicked_ranks)
    for rank in ranks:
        if not 1 <= rank <= n:
            raise RankOutOfRange(f"clicked rank {rank} outside 1..{n}")
    return ranks


def extract_preferences(perturbed: PerturbedList, clicked_ranks: Iterable[int],
                        query_id: str = "") -> List[PreferenceVote]:
    """
    One vote per click on a pair bottom: the clicked document over the one shown
    directly above it. Clicks on pair tops and unpaired ranks give no vote; a
    repeated click gives a repeated vote.
    """
    n = len(perturbed)
    bottoms = set(assign_pairs(n, perturbed.plan.k).bottom_ranks)
    votes = []
    for rank in checked_ranks(clicked_ranks, n):
        if rank in bottoms:
            votes.append(PreferenceVote(perturbed.doc_at(rank), perturbed.doc_at(rank - 1), query_id))
    return votes


def extract_top_preferences(perturbed: PerturbedList, clicked_ranks: Iterable[int],
                            query_id: str = "") -> List[PreferenceVote]:
    """Optional stream: a click on a pair top is a vote over the document directly below it"""
    n = len(perturbed)
    tops = set(assign_pairs(n, perturbed.plan.k).top_ranks)
    return [
        PreferenceVote(perturbed.doc_at(rank), perturbed.doc_at(rank + 1), query_id)
        for rank in checked_ranks(clicked_ranks, n)
        if rank in tops
    ]


def enumerate_flip_plans(n: int) -> Iterator[Tuple[FlipPlan, float]]:
    """Every possible plan for a list of length n with its probability"""
    for k in (0, 1):
        num_pairs = len(assign_pairs(n, k).pairs)
        weight = 0.5 * 0.5 ** num_pairs
        for flags in itertools.product((False, True), repeat=num_pairs):
            yield FlipPlan(k, flags), weight


def presented_positions(n: int, plan: FlipPlan) -> List[int]:
    """positions[i] is the 1-based presented rank of the document at original rank i + 1"""
    positions = list(range(1, n + 1))
    for (top, bottom), swap in zip(assign_pairs(n, plan.k).pairs, plan.swap_flags):
        if swap:
            positions[top - 1], positions[bottom - 1] = bottom, top
    return positions


def marginal_rank_distribution(n: int) -> np.ndarray:
    """
    Exact P(original rank i presented at rank j) as an n x n matrix
    (row i - 1, column j - 1), by enumeration of all plans.
    """
    if n < 1:
        raise ValueError(f"list length must be >= 1, got {n}")
    distribution = np.zeros((n, n))
    for plan, weight in enumerate_flip_plans(n):
        for original, presented in enumerate(presented_positions(n, plan)):
            distribution[original, presented - 1] += weight
    return distribution


def sample_flip_plans(n: int, count: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draw `count` plans at once.

    Returns (k, swaps) where swaps[q, t - 1] is True when the pair whose top
    is at rank t was flipped in plan q.
    """
    k = rng.integers(0, 2, size=count)
    flags = rng.random((count, (n + 1) // 2)) < 0.5
    swaps = np.zeros((count, max(n - 1, 0)), dtype=bool)
    for k_value in (0, 1):
        rows = k == k_value
        for index, (top, _) in enumerate(assign_pairs(n, k_value).pairs):
            swaps[:, top - 1] |= rows & flags[:, index]
    return k, swaps


def sample_presented_positions(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """positions[q, i] is the presented rank (1-based) of original rank i + 1 under plan q"""
    _, swaps = sample_flip_plans(n, count, rng)
    positions = np.tile(np.arange(1, n + 1), (count, 1))
    for top in range(1, n):
        swapped = swaps[:, top - 1]
        positions[swapped, top - 1] = top + 1
        positions[swapped, top] = top
    return positions


def sample_rank_frequencies(n: int, count: int, rng: np.random.Generator) -> Tuple[np.ndarray, int]:
    """Empirical marginal rank matrix over `count` random plans and the largest displacement seen"""
    positions = sample_presented_positions(n, count, rng)
    frequencies = np.zeros((n, n))
    for original in range(n):
        frequencies[original] = np.bincount(positions[:, original] - 1, minlength=n) / max(count, 1)
    originals = np.arange(1, n + 1)
    max_displacement = int(np.abs(positions - originals).max()) if count else 0
    return frequencies, max_displacement
