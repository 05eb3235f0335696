"""
Simulated users and the closed-form quantities of the factored click model.

Click probabilities are functions of relevances and presented rank only, so
relabelling documents with the same relevances changes nothing.
"""
import itertools
import logging
from collections import defaultdict
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.models.click_model import Assumption2Report, ClickModelSpec, PairContext, ScoreReport
from src.models.core import DocumentId, RankedList
from src.models.plan import PerturbedList
from src.services.fairpairs import apply_flip_plan, assign_pairs, enumerate_flip_plans
from src.utils.exceptions import InvalidSpec, MissingRelevance, OrderViolation

logger = logging.getLogger(__name__)

# Relevance of a "neutral" predecessor, whose factor G is exactly 1
PREDECESSOR_CENTER = 0.5


def examination(model: ClickModelSpec, rank: int) -> float:
    if rank < 1:
        raise ValueError(f"presented rank must be >= 1, got {rank}")
    return float(rank) ** -model.eta


def predecessor_factor(model: ClickModelSpec, relevance: Optional[float]) -> float:
    if relevance is None:
        return 1.0
    return max(0.0, 1.0 + model.gamma * (relevance - PREDECESSOR_CENTER))


def rank_click_probability(model: ClickModelSpec, relevance: float, rank: int,
                           above: Optional[float] = None) -> float:
    """Click probability of the document at `rank`, given the relevance of the one shown above it"""
    probability = examination(model, rank) * model.attraction(relevance) * predecessor_factor(model, above)
    return min(1.0, max(0.0, probability))


def click_probability(model: ClickModelSpec, ctx: PairContext, presented_rank: int) -> float:
    """P(click on the pair bottom) = E(rank) * A(r_bot) * G(r_top), clamped to [0, 1]"""
    return rank_click_probability(model, ctx.r_bot, presented_rank, above=ctx.r_top)


def simulate_session(model: ClickModelSpec, perturbed: PerturbedList,
                     relevances: Mapping[DocumentId, float], rng: np.random.Generator) -> List[int]:
    """
    Draw the clicked presented ranks for one impression.

    Ranks click independently; with a cascade model, examination stops after a
    click with probability `cascade_stop`.
    """
    order = perturbed.order.order
    try:
        presented = [relevances[document] for document in order]
    except KeyError as e:
        raise MissingRelevance(f"no relevance for document {e.args[0]!r}")

    draws = rng.random(len(order))
    stops = rng.random(len(order)) if model.cascade_stop else None
    clicked = []
    above = None
    for index, relevance in enumerate(presented):
        rank = index + 1
        if draws[index] < rank_click_probability(model, relevance, rank, above):
            clicked.append(rank)
            if stops is not None and stops[index] < model.cascade_stop:
                break
        above = relevance
    return clicked


def item_relevance_score(model: ClickModelSpec, ctx_base: PairContext, r1: float, r2: float, rank: int) -> float:
    """Change in the bottom's click probability when it is swapped for a less relevant document"""
    if not r1 > r2:
        raise OrderViolation(f"item relevance score needs r1 > r2, got r1={r1}, r2={r2}")
    return (click_probability(model, ctx_base.with_bottom(r1), rank)
            - click_probability(model, ctx_base.with_bottom(r2), rank))


def ignored_relevance_score(model: ClickModelSpec, ctx_base: PairContext, r1: float, r2: float, rank: int) -> float:
    """Change in the bottom's click probability when the top is swapped for a less relevant document"""
    if not r1 > r2:
        raise OrderViolation(f"ignored relevance score needs r1 > r2, got r1={r1}, r2={r2}")
    return (click_probability(model, ctx_base.with_top(r1), rank)
            - click_probability(model, ctx_base.with_top(r2), rank))


def verify_assumption2(model: ClickModelSpec, relevance_grid: Sequence[float],
                       rank_range: Iterable[int]) -> Assumption2Report:
    """
    Compare both scores for every r1 > r2 on the grid, every rank and every
    grid value of the document held fixed (the top for the item score, the
    bottom for the ignored score).
    """
    grid = [float(value) for value in relevance_grid]
    if len(set(grid)) != len(grid) or grid != sorted(grid):
        raise ValueError("relevance grid must be sorted with distinct values")
    cells = []
    for rank in rank_range:
        for r2, r1 in itertools.combinations(grid, 2):
            for held in grid:
                ctx = PairContext((), held, held)
                cells.append(ScoreReport(
                    delta_rel=item_relevance_score(model, ctx, r1, r2, rank),
                    delta_ign=ignored_relevance_score(model, ctx, r1, r2, rank),
                    r1=r1, r2=r2, rank=rank, context_relevance=held,
                ))
    report = Assumption2Report(tuple(cells))
    if not report.holds:
        logger.info(f"Model {model.name}: item score <= ignored score in {len(report.violations)} of {len(cells)} cells")
    return report


def _require_closed_form(model: ClickModelSpec):
    if not model.independent_clicks:
        raise InvalidSpec(f"model {model.name} stops after clicks; no closed form for its click probabilities")


def expected_pair_probabilities(model: ClickModelSpec, relevances: Mapping[DocumentId, float],
                                base_orders: Sequence[Sequence[DocumentId]]) -> Dict[Tuple[DocumentId, DocumentId], float]:
    """
    P_ij: expected click probability of d_i when shown directly below d_j inside
    a pair, averaged over equally likely base orders and all flip plans.

    Only pairs that can occur get an entry.
    """
    _require_closed_form(model)
    weights = defaultdict(float)
    weighted_clicks = defaultdict(float)
    for base in base_orders:
        ranked = RankedList(tuple(base))
        n = len(ranked)
        for plan, weight in enumerate_flip_plans(n):
            order = apply_flip_plan(ranked, plan).order.order
            for top, bottom in assign_pairs(n, plan.k).pairs:
                top_doc, bottom_doc = order[top - 1], order[bottom - 1]
                ctx = PairContext((), relevances[top_doc], relevances[bottom_doc])
                key = (bottom_doc, top_doc)
                weights[key] += weight
                weighted_clicks[key] += weight * click_probability(model, ctx, bottom)
    return {key: weighted_clicks[key] / weights[key] for key in weights}


def expected_click_mass(model: ClickModelSpec, relevances: Mapping[DocumentId, float],
                        base_order: Sequence[DocumentId], randomize: bool = True) -> np.ndarray:
    """Expected clicks per presented rank (index rank - 1) for one impression"""
    _require_closed_form(model)
    ranked = RankedList(tuple(base_order))
    n = len(ranked)
    plans = list(enumerate_flip_plans(n)) if randomize else [(None, 1.0)]
    mass = np.zeros(n)
    for plan, weight in plans:
        order = apply_flip_plan(ranked, plan).order.order if plan is not None else ranked.order
        above = None
        for index, document in enumerate(order):
            mass[index] += weight * rank_click_probability(model, relevances[document], index + 1, above)
            above = relevances[document]
    return mass
