"""
Rankings from preference counts: the exact error-rate minimizer, a net-wins
heuristic, and the click interpretations used as baselines.
"""
import itertools
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from src.models.core import DocumentId, RankedList
from src.models.pair_stats import PairStats, doc_sort_key
from src.models.plan import PreferenceVote, RelevanceVote
from src.models.ranking import ErrorCount, MinimizerComparison, PairMargin
from src.services.fairpairs import checked_ranks
from src.utils.exceptions import MissingDocument, TooManyDocuments

logger = logging.getLogger(__name__)

MAX_EXHAUSTIVE_DOCUMENTS = 10


def _positions(ranking: Sequence[DocumentId]) -> Dict[DocumentId, int]:
    positions = {document: index for index, document in enumerate(ranking)}
    if len(positions) != len(ranking):
        raise ValueError(f"ranking repeats a document: {list(ranking)}")
    return positions


def _check_covered(stats: PairStats, documents: Iterable[DocumentId]):
    missing = stats.documents() - set(documents)
    if missing:
        raise MissingDocument(f"stats reference documents outside the ranking: {sorted(missing, key=doc_sort_key)}")


def error_rate(ranking: Sequence[DocumentId], stats: PairStats) -> ErrorCount:
    """Votes c_ij count as violated when the ranking places d_i below d_j"""
    positions = _positions(ranking)
    _check_covered(stats, positions)
    violated = sum(
        stats.c(i, j)
        for i, j in stats.ordered_pairs()
        if positions[i] > positions[j]
    )
    return ErrorCount(violated=violated, total=stats.total_votes())


def _vote_matrix(stats: PairStats, documents: Sequence[DocumentId]) -> List[List[int]]:
    return [[stats.c(i, j) if i != j else 0 for j in documents] for i in documents]


def minimize_error_exhaustive(stats: PairStats, docs: Iterable[DocumentId]) -> Tuple[DocumentId, ...]:
    """
    Ranking with the fewest violated votes; among equally good rankings the
    lexicographically smallest document sequence.

    Dynamic programming over subsets: the best ranking of a set R puts first
    the document x minimizing (votes from R - {x} against x) + best(R - {x}).
    Taking the smallest such x at every step yields the lexicographic tie-break.
    """
    documents = sorted(set(docs), key=doc_sort_key)
    if len(documents) > MAX_EXHAUSTIVE_DOCUMENTS:
        raise TooManyDocuments(
            f"exhaustive search handles at most {MAX_EXHAUSTIVE_DOCUMENTS} documents, got {len(documents)}"
        )
    _check_covered(stats, documents)
    n = len(documents)
    votes = _vote_matrix(stats, documents)

    full = (1 << n) - 1
    best = [0] * (full + 1)
    choice = [-1] * (full + 1)
    for mask in range(1, full + 1):
        members = [index for index in range(n) if mask >> index & 1]
        best_cost = None
        for x in members:
            rest = mask & ~(1 << x)
            cost = sum(votes[y][x] for y in members if y != x) + best[rest]
            if best_cost is None or cost < best_cost:
                best_cost, choice[mask] = cost, x
        best[mask] = best_cost

    ranking = []
    mask = full
    while mask:
        x = choice[mask]
        ranking.append(documents[x])
        mask &= ~(1 << x)
    logger.debug(f"Exhaustive minimizer: {n} documents, {best[full]} violated votes")
    return tuple(ranking)


def minimize_error_greedy(stats: PairStats, docs: Iterable[DocumentId]) -> Tuple[DocumentId, ...]:
    """Net wins descending, then total impressions descending, then document id"""
    documents = set(docs)

    def net_wins(document):
        return sum(stats.c(document, other) - stats.c(other, document) for other in documents if other != document)

    return tuple(sorted(
        documents,
        key=lambda document: (-net_wins(document), -stats.total_impressions(document), doc_sort_key(document)),
    ))


def find_majority_cycle(stats: PairStats, docs: Iterable[DocumentId]) -> Optional[Tuple[DocumentId, ...]]:
    """A cycle a > b > ... > a in the strict pairwise vote majorities, or None"""
    documents = sorted(set(docs), key=doc_sort_key)
    beats = {
        i: [j for j in documents if j != i and stats.c(i, j) > stats.c(j, i)]
        for i in documents
    }
    state: Dict[DocumentId, int] = {}
    path: List[DocumentId] = []

    def visit(document) -> Optional[Tuple[DocumentId, ...]]:
        state[document] = 1
        path.append(document)
        for other in beats[document]:
            if state.get(other) == 1:
                return tuple(path[path.index(other):])
            if other not in state:
                cycle = visit(other)
                if cycle:
                    return cycle
        state[document] = 2
        path.pop()
        return None

    for document in documents:
        if document not in state:
            cycle = visit(document)
            if cycle:
                return cycle
    return None


def compare_minimizers(stats: PairStats, docs: Iterable[DocumentId]) -> MinimizerComparison:
    documents = list(docs)
    exhaustive = minimize_error_exhaustive(stats, documents)
    greedy = minimize_error_greedy(stats, documents)
    comparison = MinimizerComparison(
        exhaustive=exhaustive,
        greedy=greedy,
        exhaustive_error=error_rate(exhaustive, stats),
        greedy_error=error_rate(greedy, stats),
        majority_cycle=find_majority_cycle(stats, documents),
    )
    if comparison.diverged:
        logger.warning(
            f"Greedy ranking violates {comparison.greedy_error.violated} votes, "
            f"exhaustive minimum is {comparison.exhaustive_error.violated}"
        )
    return comparison


def error_gaps(stats: PairStats, reference: Sequence[DocumentId]) -> Dict[Tuple[DocumentId, ...], int]:
    """err(f) - err(reference) for every other ordering f of the reference documents"""
    if len(reference) > MAX_EXHAUSTIVE_DOCUMENTS:
        raise TooManyDocuments(f"cannot enumerate orderings of {len(reference)} documents")
    baseline = error_rate(reference, stats).violated
    reference = tuple(reference)
    return {
        ordering: error_rate(ordering, stats).violated - baseline
        for ordering in itertools.permutations(reference)
        if ordering != reference
    }


def convergence_margins(stats: PairStats, true_order: Sequence[DocumentId], epsilon: float) -> List[PairMargin]:
    """
    For every pair with data in both presentation orders, the vote margin of
    the more relevant document and its guaranteed lower bound n_ij * eps * (1 - p_ji).
    """
    margins = []
    for position, winner in enumerate(true_order):
        for loser in true_order[position + 1:]:
            n_win, n_lose = stats.n(winner, loser), stats.n(loser, winner)
            if not n_win or not n_lose:
                continue
            p_reverse = stats.c(loser, winner) / n_lose
            margins.append(PairMargin(
                winner=winner,
                loser=loser,
                vote_margin=stats.c(winner, loser) - stats.c(loser, winner),
                bound=n_win * (epsilon - epsilon * p_reverse),
            ))
    return margins


def skip_above_extractor(presented: RankedList, clicked_ranks: Iterable[int],
                         query_id: str = "") -> List[PreferenceVote]:
    """A clicked result is preferred to every unclicked result shown above it"""
    ranks = checked_ranks(clicked_ranks, len(presented))
    clicked = set(ranks)
    return [
        PreferenceVote(presented.doc_at(rank), presented.doc_at(skipped), query_id)
        for rank in ranks
        for skipped in range(1, rank)
        if skipped not in clicked
    ]


def naive_extractor(presented: RankedList, clicked_ranks: Iterable[int],
                    query_id: str = "") -> List[RelevanceVote]:
    """Every clicked result counts as relevant"""
    return [
        RelevanceVote(presented.doc_at(rank), rank, query_id)
        for rank in checked_ranks(clicked_ranks, len(presented))
    ]
