import pytest

from src.config.experiment_config import ExperimentConfig, ProbeConfig
from src.config.presets import CLICK_MODEL_PRESETS
from src.models.core import RankedList
from src.services.aggregation import FAIRPAIRS, NAIVE, SKIP_ABOVE
from src.services.batch_simulation import simulate_pair_counts
from src.services.simulation import (
    PROBE_DOCUMENT,
    build_query,
    identity_plan,
    run_convergence,
    run_simulation,
    shard_bounds,
)
from src.utils.exceptions import InvalidSpec, ProbeRelevanceTooHigh


class TestBuildQuery:

    def test_true_order_lists_most_relevant_first(self):
        query = build_query(ExperimentConfig(num_docs=4))
        assert query.documents == ("d1", "d2", "d3", "d4")
        relevances = [relevance for _, relevance in query.candidates]
        assert relevances == sorted(relevances, reverse=True)

    def test_reversed_order(self):
        assert build_query(ExperimentConfig(num_docs=4, base_ranking="reversed")).documents == ("d4", "d3", "d2", "d1")

    def test_shuffled_order_depends_only_on_seed(self):
        first = build_query(ExperimentConfig(seed=12, num_docs=8, base_ranking="shuffled")).documents
        assert first == build_query(ExperimentConfig(seed=12, num_docs=8, base_ranking="shuffled")).documents
        assert sorted(first) == sorted(f"d{i}" for i in range(1, 9))

    def test_identity_plan(self):
        assert identity_plan(5).swap_flags == (False, False)
        assert identity_plan(1).swap_flags == ()


class TestShardBounds:

    @pytest.mark.parametrize("num_queries, workers, expected", [
        (10, 3, [(0, 4), (4, 7), (7, 10)]),
        (2, 5, [(0, 1), (1, 2)]),
        (0, 4, [(0, 0)]),
        (7, 1, [(0, 7)]),
    ])
    def test_bounds(self, num_queries, workers, expected):
        assert shard_bounds(num_queries, workers) == expected


class TestRunSimulation:

    def test_no_queries(self, small_config):
        result = run_simulation(small_config.with_overrides(num_queries=0))
        assert result.log == []
        assert result.stats[FAIRPAIRS].is_empty()

    def test_same_seed_same_log(self, small_config):
        assert run_simulation(small_config).log == run_simulation(small_config).log

    def test_different_seed_different_log(self, small_config):
        assert run_simulation(small_config).log != run_simulation(small_config.with_overrides(seed=8)).log

    def test_worker_count_changes_nothing(self, small_config):
        config = small_config.with_overrides(extractors=(FAIRPAIRS, SKIP_ABOVE, NAIVE), top_click_votes=True)
        single = run_simulation(config, workers=1)
        sharded = run_simulation(config, workers=4)
        assert sharded.log == single.log
        assert sharded.stats == single.stats

    def test_records_follow_query_index(self, small_config):
        log = run_simulation(small_config, workers=3).log
        assert [record.seed_info for record in log] == [(7, index) for index in range(300)]

    def test_without_randomization_the_base_order_is_shown(self, small_config):
        log = run_simulation(small_config.with_overrides(randomize=False)).log
        assert all(record.presented_order == record.original_order for record in log)
        assert all(record.k == 0 for record in log)

    def test_timestamps_only_when_asked(self, small_config):
        assert all(record.timestamp is None for record in run_simulation(small_config).log)
        stamped = run_simulation(small_config.with_overrides(num_queries=3, log_timestamps=True)).log
        assert all(record.timestamp for record in stamped)


class TestProbeImpressions:

    def test_probe_replaces_one_document(self, small_config):
        config = small_config.with_overrides(probe=ProbeConfig(0.05, (1, 5)))
        for record in run_simulation(config).log:
            assert record.original_order.count(PROBE_DOCUMENT) == 1
            assert len(set(record.original_order)) == 5

    def test_after_fairpairs_targets_a_presented_rank(self, small_config):
        config = small_config.with_overrides(probe=ProbeConfig(0.05, (2, 2), "after_fairpairs"))
        assert all(record.presented_order[1] == PROBE_DOCUMENT for record in run_simulation(config).log)

    def test_before_fairpairs_targets_an_original_rank(self, small_config):
        config = small_config.with_overrides(probe=ProbeConfig(0.05, (2, 2), "before_fairpairs"))
        assert all(record.original_order[1] == PROBE_DOCUMENT for record in run_simulation(config).log)

    def test_probe_must_be_least_relevant(self, small_config):
        with pytest.raises(ProbeRelevanceTooHigh):
            run_simulation(small_config.with_overrides(probe=ProbeConfig(0.5, (1, 5))))


class TestBatchedCounts:

    base = RankedList(("d1", "d2", "d3", "d4"))
    relevances = {"d1": 0.9, "d2": 0.6, "d3": 0.4, "d4": 0.2}

    def test_deterministic_per_block(self, default_model):
        first = simulate_pair_counts(self.base, self.relevances, default_model, 5, 0, 2000)
        assert first == simulate_pair_counts(self.base, self.relevances, default_model, 5, 0, 2000)
        assert first != simulate_pair_counts(self.base, self.relevances, default_model, 5, 1, 2000)

    def test_only_adjacent_pairs_are_counted(self, default_model):
        stats = simulate_pair_counts(self.base, self.relevances, default_model, 5, 0, 2000)
        ranks = {document: index for index, document in enumerate(self.base)}
        assert all(abs(ranks[i] - ranks[j]) == 1 for i, j in stats.ordered_pairs())

    def test_every_impression_counts_each_pair_once(self, default_model):
        stats = simulate_pair_counts(self.base, self.relevances, default_model, 5, 0, 1000)
        # n=4: k=0 shows two pairs, k=1 shows one
        total = sum(stats.n(i, j) for i, j in stats.ordered_pairs())
        assert 1000 <= total <= 2000

    def test_no_impressions(self, default_model):
        assert simulate_pair_counts(self.base, self.relevances, default_model, 5, 0, 0).is_empty()

    def test_cascade_model_rejected(self):
        with pytest.raises(InvalidSpec):
            simulate_pair_counts(self.base, self.relevances, CLICK_MODEL_PRESETS["cascade"], 5, 0, 10)


class TestRunConvergence:

    def test_three_documents_recovered(self):
        result = run_convergence(ExperimentConfig(seed=3, num_docs=3), check_every=5000, max_queries=200_000)
        assert result.converged
        assert result.true_order == ("d1", "d2", "d3")
        assert result.recovered
        assert result.error_chain_holds
        assert result.to_dict()["recovered"]

    def test_budget_exhausted(self):
        result = run_convergence(ExperimentConfig(seed=3, num_docs=3), check_every=10, max_queries=20)
        assert not result.converged
        assert result.queries == 20
        assert not result.recovered
