"""
Acceptance suites: each runs a seeded experiment and returns a SuiteResult
with a pass flag and the numbers behind it.
"""
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from src.config.experiment_config import ExperimentConfig, ProbeConfig
from src.config.presets import CLICK_MODEL_PRESETS, swap_study_table
from src.models.click_log import ClickLogRecord
from src.models.core import RankedList, true_ranking
from src.services.aggregation import FAIRPAIRS, NAIVE, SKIP_ABOVE, aggregate_log
from src.services.click_models import expected_click_mass, verify_assumption2
from src.services.fairpairs import (
    apply_flip_plan,
    draw_flip_plan,
    enumerate_flip_plans,
    marginal_rank_distribution,
    presented_positions,
    sample_rank_frequencies,
)
from src.services.learner import minimize_error_exhaustive
from src.services.log_store import read_log, serialize_record, write_log
from src.services.probe import MATCHED, PROBE_BOTTOM, PROBE_TOP, figure_tables
from src.services.simulation import build_query, run_convergence_seeds, run_simulation
from src.services.statistics import fisher_exact, wilson_interval, z_score
from src.utils.rng import setup_stream

logger = logging.getLogger(__name__)

ASSUMPTION_GRID = [round(0.1 * step, 1) for step in range(1, 10)]
ASSUMPTION_RANKS = range(1, 9)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "details": self.details}


def adjacent_pair_signs(config: ExperimentConfig, queries: int, workers: int = 1) -> Dict[str, Any]:
    """Simulate and compare p_ij with p_ji for every pair adjacent in the true order"""
    config = config.with_overrides(num_queries=queries, extractors=(FAIRPAIRS,), probe=None)
    query = build_query(config)
    relevances = query.relevances()
    truth = true_ranking(query).order
    stats = run_simulation(config, workers).stats[FAIRPAIRS]

    pairs = []
    for better, worse in zip(truth, truth[1:]):
        n_bw, n_wb = stats.n(better, worse), stats.n(worse, better)
        if not n_bw or not n_wb:
            pairs.append({"pair": f"{better}>{worse}", "sign_ok": False, "disjoint": False, "no_data": True})
            continue
        c_bw, c_wb = stats.c(better, worse), stats.c(worse, better)
        lo_bw, hi_bw = wilson_interval(c_bw, n_bw)
        lo_wb, hi_wb = wilson_interval(c_wb, n_wb)
        pairs.append({
            "pair": f"{better}>{worse}",
            "p_better_below": c_bw / n_bw,
            "p_worse_below": c_wb / n_wb,
            "sign_ok": (c_bw / n_bw > c_wb / n_wb) == (relevances[better] > relevances[worse]),
            "disjoint": lo_bw > hi_wb or lo_wb > hi_bw,
        })
    return {"queries": queries, "pairs": pairs}


def theorem1_suite(queries: int = 200_000, seed: int = 1, workers: int = 1) -> SuiteResult:
    """Under the default model every adjacent pair's click rates order like the relevances, with disjoint CIs"""
    outcome = adjacent_pair_signs(ExperimentConfig(seed=seed, num_docs=6), queries, workers)
    passed = all(pair["sign_ok"] and pair["disjoint"] for pair in outcome["pairs"])
    return SuiteResult("theorem1", passed, outcome)


def theorem2_suite(seeds: int = 100, check_every: int = 5000, max_queries: int = 4_000_000,
                   required: Optional[int] = None, workers: int = 1) -> SuiteResult:
    """Once counts are sufficient, the exhaustive minimizer returns the true order"""
    results = run_convergence_seeds(ExperimentConfig(num_docs=6), range(seeds), check_every, max_queries, workers)
    recovered = sum(result.recovered for result in results)
    required = seeds - seeds // 100 if required is None else required
    chains = all(result.error_chain_holds for result in results if result.converged)
    details = {
        "seeds": seeds,
        "recovered": recovered,
        "required": required,
        "error_chain_holds": chains,
        "queries": [result.queries for result in results],
        "epsilon": results[0].epsilon if results else None,
    }
    return SuiteResult("theorem2", recovered >= required and chains, details)


def assumption2_suite(queries: int = 200_000, seed: int = 1, workers: int = 1) -> SuiteResult:
    """The default model satisfies the relevance-score assumption, the violating preset breaks it and its signs"""
    default_report = verify_assumption2(CLICK_MODEL_PRESETS["default"], ASSUMPTION_GRID, ASSUMPTION_RANKS)
    violating_report = verify_assumption2(CLICK_MODEL_PRESETS["violating"], ASSUMPTION_GRID, ASSUMPTION_RANKS)
    outcome = adjacent_pair_signs(ExperimentConfig(seed=seed, num_docs=6, click_model="violating"), queries, workers)
    flipped = [pair["pair"] for pair in outcome["pairs"] if not pair["sign_ok"]]
    details = {
        "default_holds": default_report.holds,
        "violating_holds": violating_report.holds,
        "violating_cells": len(violating_report.violations),
        "flipped_pairs": flipped,
    }
    passed = default_report.holds and not violating_report.holds and bool(flipped)
    return SuiteResult("assumption2", passed, details)


def baselines_suite(queries: int = 50_000, seed: int = 1, tolerance: float = 0.10) -> SuiteResult:
    """
    Without randomization the naive click mass falls off with rank at least
    as fast as the examination factor, and skip-above votes do not recover
    the true order.
    """
    config = ExperimentConfig(seed=seed, num_docs=6, num_queries=queries, randomize=False,
                              extractors=(SKIP_ABOVE, NAIVE))
    result = run_simulation(config)
    tally = result.stats[NAIVE]
    query = build_query(config)
    expected = expected_click_mass(config.model, query.relevances(), query.documents, randomize=False)

    simulated_ratio = tally.vote_mass(1) / max(tally.vote_mass(5), 1)
    expected_ratio = expected[0] / expected[4]
    examination_ratio = 5.0 ** config.model.eta
    truth = true_ranking(query).order
    learned = minimize_error_exhaustive(result.stats[SKIP_ABOVE], query.documents)
    details = {
        "rank1_mass": tally.vote_mass(1),
        "rank5_mass": tally.vote_mass(5),
        "simulated_ratio": simulated_ratio,
        "expected_ratio": expected_ratio,
        "examination_ratio": examination_ratio,
        "skip_above_ranking": list(learned),
        "true_order": list(truth),
    }
    naive_ok = (simulated_ratio >= examination_ratio * (1 - tolerance)
                and abs(simulated_ratio - expected_ratio) <= tolerance * expected_ratio)
    return SuiteResult("baselines", naive_ok and learned != truth, details)


def displacement_suite(plans: int = 1_000_000, n: int = 5, seed: int = 1, sigma: float = 3.0) -> SuiteResult:
    """Sampled marginal rank frequencies match exact enumeration; nothing moves more than one rank"""
    exact = marginal_rank_distribution(n)
    frequencies, max_displacement = sample_rank_frequencies(n, plans, setup_stream(seed, 2))
    tolerance = sigma * np.sqrt(exact * (1 - exact) / plans)
    within = bool(np.all(np.abs(frequencies - exact) <= tolerance))

    exhaustive_ok = True
    for size in range(1, 7):
        for plan, _ in enumerate_flip_plans(size):
            positions = presented_positions(size, plan)
            if any(abs(presented - original) > 1 for original, presented in enumerate(positions, start=1)):
                exhaustive_ok = False
    details = {
        "plans": plans,
        "max_abs_deviation": float(np.abs(frequencies - exact).max()),
        "p_1_1": float(frequencies[0, 0]),
        "p_3_3": float(frequencies[2, 2]),
        "max_displacement": max_displacement,
        "exhaustive_bound_holds": exhaustive_ok,
    }
    return SuiteResult("displacement", within and max_displacement <= 1 and exhaustive_ok, details)


def exact_fisher_p_value(table) -> Fraction:
    """Two-sided p-value by exact enumeration in rational arithmetic"""
    (a, b), (c, d) = table
    row, col, total = a + b, a + c, a + b + c + d
    if min(row, c + d, col, b + d) == 0:
        return Fraction(1)

    def probability(x):
        return Fraction(math.comb(col, x) * math.comb(total - col, row - x), math.comb(total, row))

    observed = probability(a)
    cutoff = observed * (1 + Fraction(1, 10 ** 7))
    support = range(max(0, row + col - total), min(row, col) + 1)
    return min(Fraction(1), sum((p for p in map(probability, support) if p <= cutoff), Fraction(0)))


def reference_wilson_interval(c: int, n: int, confidence: float = 0.95):
    """Wilson bounds as the roots of (p_hat - p)^2 = z^2 p (1 - p) / n"""
    z2 = z_score(confidence) ** 2
    p_hat = c / n
    roots = np.roots([1 + z2 / n, -(2 * p_hat + z2 / n), p_hat * p_hat])
    lo, hi = sorted(float(np.real(root)) for root in roots)
    return max(0.0, lo), min(1.0, hi)


def statistics_suite(tables: int = 1000, intervals: int = 1000, seed: int = 1) -> SuiteResult:
    rng = setup_stream(seed, 3)
    fixtures = [swap_study_table("normal"), [[5, 0], [0, 5]]]
    random_tables = [rng.multinomial(int(rng.integers(1, 41)), [0.25] * 4).reshape(2, 2).tolist()
                     for _ in range(tables)]
    fisher_error = 0.0
    for table in fixtures + random_tables:
        expected = float(exact_fisher_p_value(table))
        fisher_error = max(fisher_error, abs(fisher_exact(table).p_value - expected))

    wilson_error = 0.0
    for _ in range(intervals):
        n = int(rng.integers(1, 2000))
        c = int(rng.integers(0, n + 1))
        lo, hi = wilson_interval(c, n)
        ref_lo, ref_hi = reference_wilson_interval(c, n)
        wilson_error = max(wilson_error, abs(lo - ref_lo), abs(hi - ref_hi))

    details = {
        "tables": len(fixtures) + tables,
        "max_fisher_error": fisher_error,
        "fixture_p_value": fisher_exact(fixtures[0]).p_value,
        "intervals": intervals,
        "max_wilson_error": wilson_error,
    }
    return SuiteResult("statistics", fisher_error <= 1e-12 and wilson_error <= 1e-9, details)


def probe_suite(queries: int = 100_000, seed: int = 1, workers: int = 1) -> SuiteResult:
    """
    A probe at the bottom of a pair is clicked less than the document it
    replaced. A probe on top lowers the bottom document's click rate, by less
    than the item gap.
    """
    config = ExperimentConfig(
        seed=seed, num_queries=queries, num_docs=6, relevance_source="high",
        probe=ProbeConfig(probe_relevance=0.05, target_rank_range=(1, 6)),
    )
    tables = figure_tables(run_simulation(config, workers).log)
    item, ignored = tables["item_relevance"], tables["ignored_relevance"]
    matched_bottom = item.row(f"{MATCHED}_{PROBE_BOTTOM}@top5")
    probe_bottom = item.row(f"{PROBE_BOTTOM}@top5")
    matched_top = ignored.row(f"{MATCHED}_{PROBE_TOP}@top5")
    probe_top = ignored.row(f"{PROBE_TOP}@top5")
    item_gap = matched_bottom.p_hat - probe_bottom.p_hat
    ignored_gap = matched_top.p_hat - probe_top.p_hat
    details = {
        "matched_bottom": matched_bottom.p_hat,
        "probe_bottom": probe_bottom.p_hat,
        "matched_top": matched_top.p_hat,
        "probe_top": probe_top.p_hat,
        "item_gap": item_gap,
        "ignored_gap": ignored_gap,
        "significance": {f"{a} vs {b}": p for (a, b), p in tables["preference_test"].significance.items()},
    }
    passed = probe_bottom.ci_hi < matched_bottom.ci_lo and 0 < ignored_gap < item_gap
    return SuiteResult("probe", passed, details)


def random_records(count: int, rng: np.random.Generator) -> List[ClickLogRecord]:
    records = []
    for index in range(count):
        n = int(rng.integers(1, 9))
        documents = [f"d{value}" for value in rng.permutation(20)[:n]]
        original = RankedList(tuple(documents))
        plan = draw_flip_plan(n, rng)
        clicks = sorted(int(rank) for rank in rng.integers(1, n + 1, size=int(rng.integers(0, 4))))
        records.append(ClickLogRecord(
            query_id=f"q{int(rng.integers(0, 100))}",
            k=plan.k,
            swap_flags=plan.swap_flags,
            original_order=original.order,
            presented_order=apply_flip_plan(original, plan).order.order,
            clicked_ranks=tuple(clicks),
            seed_info=(int(rng.integers(0, 2 ** 32)), index),
        ))
    return records


def engineering_suite(records: int = 10_000, queries: int = 2000, seed: int = 1,
                      workers: int = 4) -> SuiteResult:
    """Log round trip, replay equals online counting, sharding and reruns change nothing"""
    generated = random_records(records, setup_stream(seed, 4))
    with tempfile.TemporaryDirectory() as directory:
        path = os.path.join(directory, "log.jsonl")
        write_log(path, generated)
        round_trip = read_log(path) == generated

    config = ExperimentConfig(seed=seed, num_queries=queries, extractors=(FAIRPAIRS, SKIP_ABOVE, NAIVE),
                              top_click_votes=True)
    sequential = run_simulation(config, workers=1)
    sharded = run_simulation(config, workers=workers)
    replayed = aggregate_log(sequential.log, config.extractors, config.top_click_votes)
    rerun = run_simulation(config, workers=1)

    details = {
        "round_trip": round_trip,
        "replay_equal": replayed == sequential.stats,
        "sharded_equal": sharded.stats == sequential.stats and sharded.log == sequential.log,
        "byte_identical": [serialize_record(r) for r in rerun.log] == [serialize_record(r) for r in sequential.log],
    }
    return SuiteResult("engineering", all(details.values()), details)


SUITES: Dict[str, Callable[..., SuiteResult]] = {
    "theorem1": theorem1_suite,
    "theorem2": theorem2_suite,
    "assumption2": assumption2_suite,
    "baselines": baselines_suite,
    "displacement": displacement_suite,
    "statistics": statistics_suite,
    "probe": probe_suite,
    "engineering": engineering_suite,
}


def run_suite(name: str, quick: bool = False, settings: Optional[Dict[str, Dict[str, Any]]] = None,
              **options) -> List[SuiteResult]:
    """
    Run one suite, or every suite for `all`.

    Options resolve in order: quick sizes, then `settings` (per suite name,
    applied under `all` too), then explicit options for a single suite.
    """
    if name != "all" and name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)} or all")
    results = []
    for suite_name in (SUITES if name == "all" else [name]):
        suite_options = dict(QUICK_OPTIONS[suite_name]) if quick else {}
        suite_options.update((settings or {}).get(suite_name, {}))
        if name != "all":
            suite_options.update(options)
        result = SUITES[suite_name](**suite_options)
        logger.info(f"Suite {suite_name}: {'passed' if result.passed else 'FAILED'}")
        results.append(result)
    return results


# Reduced sizes for a fast smoke run (`verify --quick`)
QUICK_OPTIONS: Dict[str, Dict[str, Any]] = {
    "theorem1": {"queries": 50_000},
    "theorem2": {"seeds": 3, "required": 3},
    "assumption2": {"queries": 20_000},
    "baselines": {"queries": 20_000},
    "displacement": {"plans": 100_000, "sigma": 4.0},
    "statistics": {"tables": 300, "intervals": 300},
    "probe": {"queries": 20_000},
    "engineering": {"records": 1000, "queries": 500},
}
