"""
Vectorized FairPairs impressions for long convergence runs.

Only pair bottoms are simulated and no per-impression log is kept. The
counts are deterministic per (seed, block).
"""
import logging
from typing import Mapping

import numpy as np

from src.models.click_model import ClickModelSpec
from src.models.core import DocumentId, RankedList
from src.models.pair_stats import PairStats
from src.services.click_models import PREDECESSOR_CENTER
from src.services.fairpairs import assign_pairs, sample_flip_plans
from src.utils.exceptions import InvalidSpec, MissingRelevance
from src.utils.rng import block_stream

logger = logging.getLogger(__name__)


def simulate_pair_counts(base: RankedList, relevances: Mapping[DocumentId, float], model: ClickModelSpec,
                         seed: int, block: int, count: int) -> PairStats:
    """Pair counts of `count` randomized impressions of `base`, drawn from block stream `block`"""
    if not model.independent_clicks:
        raise InvalidSpec(f"model {model.name} stops after clicks; the batched engine needs independent clicks")
    n = len(base)
    try:
        relevance = np.array([relevances[document] for document in base.order], dtype=float)
    except KeyError as e:
        raise MissingRelevance(f"no relevance for document {e.args[0]!r}")
    if count <= 0 or n < 2:
        return PairStats()

    rng = block_stream(seed, block)
    k, swaps = sample_flip_plans(n, count, rng)
    draws = rng.random((count, n))

    impressions = np.zeros((n, n), dtype=np.int64)
    clicks = np.zeros((n, n), dtype=np.int64)
    for k_value in (0, 1):
        rows = k == k_value
        for top, bottom in assign_pairs(n, k_value).pairs:
            swapped = swaps[rows, top - 1]
            top_index = np.where(swapped, bottom - 1, top - 1)
            bottom_index = np.where(swapped, top - 1, bottom - 1)
            probability = (
                float(bottom) ** -model.eta
                * model.attraction.values(relevance[bottom_index])
                * np.maximum(0.0, 1.0 + model.gamma * (relevance[top_index] - PREDECESSOR_CENTER))
            )
            clicked = draws[rows, bottom - 1] < np.clip(probability, 0.0, 1.0)
            np.add.at(impressions, (bottom_index, top_index), 1)
            np.add.at(clicks, (bottom_index, top_index), clicked.astype(np.int64))

    stats = PairStats()
    for i, j in zip(*np.nonzero(impressions)):
        stats.add(base.order[i], base.order[j], impressions=int(impressions[i, j]), clicks=int(clicks[i, j]))
    logger.debug(f"Block {block}: {count} impressions of {n} documents")
    return stats
