"""
Seeded simulation runs: impressions of one query under FairPairs and a
simulated user, the click log they produce, and convergence runs.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config.experiment_config import ExperimentConfig
from src.models.click_log import ClickLogRecord, get_utc_now
from src.models.click_model import ClickModelSpec
from src.models.core import DocumentId, Query, RankedList, true_ranking
from src.models.pair_stats import ConvergenceParams, PairStats, SufficiencyReport
from src.models.plan import FlipPlan
from src.models.ranking import PairMargin
from src.services.aggregation import (
    Accumulator,
    accumulate,
    epsilon_from_model,
    merge_accumulators,
    new_accumulators,
    sufficiency_check,
)
from src.services.batch_simulation import simulate_pair_counts
from src.services.click_models import expected_pair_probabilities, simulate_session
from src.services.fairpairs import apply_flip_plan, assign_pairs, draw_flip_plan
from src.services.learner import convergence_margins, error_gaps, minimize_error_exhaustive
from src.utils.exceptions import NoData, ProbeRelevanceTooHigh
from src.utils.rng import query_stream, setup_stream

logger = logging.getLogger(__name__)

PROBE_DOCUMENT = "#"

# setup_stream purpose for the shuffled base order (0 draws random relevances)
SHUFFLE_DRAW = 1


def build_query(config: ExperimentConfig) -> Query:
    """Documents d1..dn with their relevances, listed in the configured base order"""
    relevances = config.relevances()
    documents = config.documents()
    if config.base_ranking == "true":
        documents = sorted(documents, key=lambda document: -relevances[document])
    elif config.base_ranking == "reversed":
        documents = sorted(documents, key=lambda document: relevances[document])
    else:
        permutation = setup_stream(config.seed, SHUFFLE_DRAW).permutation(len(documents))
        documents = [documents[index] for index in permutation]
    return Query.from_relevances(config.query_id, documents, [relevances[document] for document in documents])


def identity_plan(n: int) -> FlipPlan:
    """The plan that presents the base ranking unchanged"""
    return FlipPlan(0, (False,) * len(assign_pairs(n, 0).pairs))


@dataclass(frozen=True)
class SimulationSetup:
    """Everything fixed across the impressions of one run"""

    config: ExperimentConfig
    base: RankedList
    relevances: Dict[DocumentId, float]
    model: ClickModelSpec

    def _plan(self, rng: np.random.Generator) -> FlipPlan:
        if self.config.randomize:
            return draw_flip_plan(len(self.base), rng)
        return identity_plan(len(self.base))

    def _record(self, index: int, original: RankedList, plan: FlipPlan, rng: np.random.Generator) -> ClickLogRecord:
        perturbed = apply_flip_plan(original, plan)
        clicked = simulate_session(self.model, perturbed, self.relevances, rng)
        return ClickLogRecord(
            query_id=self.config.query_id,
            k=plan.k,
            swap_flags=plan.swap_flags,
            original_order=original.order,
            presented_order=perturbed.order.order,
            clicked_ranks=tuple(clicked),
            seed_info=(self.config.seed, index),
            timestamp=get_utc_now().isoformat() if self.config.log_timestamps else None,
        )

    def impression(self, index: int) -> ClickLogRecord:
        rng = query_stream(self.config.seed, index)
        return self._record(index, self.base, self._plan(rng), rng)


@dataclass(frozen=True)
class ProbeSetup(SimulationSetup):
    """
    Impressions with the probe document `#` put in place of one document at a
    uniformly drawn rank of the target range. After FairPairs the rank is a
    presented rank, before FairPairs an original rank; either way the logged
    original order carries the probe, so the plan still maps it to the
    presented order.
    """

    def impression(self, index: int) -> ClickLogRecord:
        probe = self.config.probe
        rng = query_stream(self.config.seed, index)
        plan = self._plan(rng)
        first, last = probe.target_rank_range
        target = int(rng.integers(first, last + 1))
        if probe.swap_order == "after_fairpairs":
            victim = apply_flip_plan(self.base, plan).doc_at(target)
        else:
            victim = self.base.doc_at(target)
        original = RankedList(tuple(PROBE_DOCUMENT if document == victim else document for document in self.base))
        return self._record(index, original, plan, rng)


def build_setup(config: ExperimentConfig) -> SimulationSetup:
    query = build_query(config)
    relevances = query.relevances()
    if config.probe is None:
        return SimulationSetup(config, query.ranked_list(), relevances, config.model)

    probe_relevance = float(config.probe.probe_relevance)
    lowest = min(relevances.values())
    if not probe_relevance < lowest:
        raise ProbeRelevanceTooHigh(
            f"probe relevance {probe_relevance} must lie strictly below every shown document (lowest {lowest})"
        )
    relevances[PROBE_DOCUMENT] = probe_relevance
    return ProbeSetup(config, query.ranked_list(), relevances, config.model)


@dataclass
class SimulationResult:
    log: List[ClickLogRecord] = field(default_factory=list)
    stats: Dict[str, Accumulator] = field(default_factory=dict)


def _simulate_shard(setup: SimulationSetup, start: int, stop: int) -> SimulationResult:
    config = setup.config
    accumulators = new_accumulators(config.extractors, config.top_click_votes)
    log = []
    for index in range(start, stop):
        record = setup.impression(index)
        accumulate(accumulators, record)
        log.append(record)
    return SimulationResult(log, accumulators)


def shard_bounds(num_queries: int, workers: int) -> List[Tuple[int, int]]:
    """Contiguous query-index ranges, one per worker, in index order"""
    workers = max(1, min(workers, num_queries or 1))
    size, extra = divmod(num_queries, workers)
    bounds = []
    start = 0
    for shard in range(workers):
        stop = start + size + (1 if shard < extra else 0)
        bounds.append((start, stop))
        start = stop
    return bounds


def run_simulation(config: ExperimentConfig, workers: int = 1) -> SimulationResult:
    """
    Simulate config.num_queries impressions. Each query index has its own
    random stream, so the log and the stats are identical for any worker count.
    """
    setup = build_setup(config)
    bounds = shard_bounds(config.num_queries, workers)
    logger.info(f"Simulating {config.num_queries} queries of {len(setup.base)} documents "
                f"with model {setup.model.name} on {len(bounds)} worker(s)")
    if len(bounds) == 1:
        shards = [_simulate_shard(setup, *bounds[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(bounds)) as executor:
            shards = list(executor.map(lambda bound: _simulate_shard(setup, *bound), bounds))

    result = SimulationResult(stats=new_accumulators(config.extractors, config.top_click_votes))
    for shard in shards:
        result.log.extend(shard.log)
        result.stats = merge_accumulators(result.stats, shard.stats)
    return result


@dataclass
class ConvergenceResult:
    seed: int
    converged: bool
    queries: int
    epsilon: float
    true_order: Tuple[DocumentId, ...]
    learned: Tuple[DocumentId, ...] = ()
    # Smallest err(f) - err(true order) over every other ordering f
    min_error_gap: Optional[int] = None
    margins: List[PairMargin] = field(default_factory=list)
    stats: PairStats = field(default_factory=PairStats)
    report: Optional[SufficiencyReport] = None

    @property
    def recovered(self) -> bool:
        return self.converged and self.learned == self.true_order

    @property
    def error_chain_holds(self) -> bool:
        return (self.min_error_gap is not None and self.min_error_gap > 0
                and all(margin.holds for margin in self.margins))

    def to_dict(self):
        return {
            "seed": self.seed,
            "converged": self.converged,
            "queries": self.queries,
            "epsilon": self.epsilon,
            "true_order": list(self.true_order),
            "learned": list(self.learned),
            "recovered": self.recovered,
            "min_error_gap": self.min_error_gap,
            "error_chain_holds": self.error_chain_holds,
        }


def _check_sufficiency(stats: PairStats, params: ConvergenceParams, true_P) -> Optional[SufficiencyReport]:
    try:
        return sufficiency_check(stats, params, true_P)
    except NoData:
        return None


def run_convergence(config: ExperimentConfig, check_every: int = 5000,
                    max_queries: int = 4_000_000) -> ConvergenceResult:
    """
    Add blocks of `check_every` impressions until the counts are sufficient
    against the model's exact pair probabilities, then learn with the
    exhaustive minimizer and check every wrong ordering scores worse.
    A probe block in the config is ignored.
    """
    if config.probe is not None:
        config = config.with_overrides(probe=None)
    setup = build_setup(config)
    truth = true_ranking(build_query(config)).order
    true_P = expected_pair_probabilities(setup.model, setup.relevances, [setup.base.order])
    params = epsilon_from_model(true_P)
    logger.info(f"Seed {config.seed}: eps = {params.epsilon:.5f} over {len(true_P)} ordered pairs")

    stats = PairStats()
    queries = 0
    block = 0
    report = None
    while queries < max_queries:
        count = min(check_every, max_queries - queries)
        stats = stats.merge(simulate_pair_counts(setup.base, setup.relevances, setup.model, config.seed, block, count))
        queries += count
        block += 1
        report = _check_sufficiency(stats, params, true_P)
        if report is not None and report.sufficient:
            break

    converged = report is not None and report.sufficient
    if not converged:
        logger.warning(f"Seed {config.seed}: counts not sufficient after {queries} queries")
        return ConvergenceResult(config.seed, False, queries, params.epsilon, truth, stats=stats, report=report)

    learned = minimize_error_exhaustive(stats, setup.base.order)
    gaps = error_gaps(stats, truth)
    result = ConvergenceResult(
        seed=config.seed,
        converged=True,
        queries=queries,
        epsilon=params.epsilon,
        true_order=truth,
        learned=learned,
        min_error_gap=min(gaps.values()) if gaps else None,
        margins=convergence_margins(stats, truth, params.epsilon),
        stats=stats,
        report=report,
    )
    logger.info(f"Seed {config.seed}: sufficient after {queries} queries, recovered={result.recovered}")
    return result


def run_convergence_seeds(config: ExperimentConfig, seeds: Sequence[int], check_every: int = 5000,
                          max_queries: int = 4_000_000, workers: int = 1) -> List[ConvergenceResult]:
    configs = [config.with_overrides(seed=seed) for seed in seeds]
    if workers <= 1:
        return [run_convergence(c, check_every, max_queries) for c in configs]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda c: run_convergence(c, check_every, max_queries), configs))
