import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.models.core import RankedList
from src.models.pair_stats import ConvergenceParams, PairStats, RelevanceTally
from src.models.plan import PreferenceVote
from src.services.aggregation import (
    FAIRPAIRS,
    FAIRPAIRS_TOP,
    NAIVE,
    SKIP_ABOVE,
    aggregate_log,
    epsilon_from_model,
    estimate_p,
    merge_accumulators,
    new_accumulators,
    record_preference_votes,
    record_top_votes,
    record_votes,
    sufficiency_check,
)
from src.utils.exceptions import InconsistentRecord, NoData, ZeroGap
from tests.conftest import FIVE_DOCS, make_record

counts = st.integers(0, 50)
pair_stats = st.dictionaries(
    st.tuples(st.sampled_from("abcd"), st.sampled_from("abcd")).filter(lambda pair: pair[0] != pair[1]),
    st.tuples(counts, counts),
    max_size=8,
).map(lambda entries: PairStats({key: n for key, (n, _) in entries.items()},
                                {key: c for key, (_, c) in entries.items()}))


class TestRecordVotes:

    def test_unclicked_pair_counts_an_impression(self):
        stats = record_votes(PairStats(), make_record(("dj", "di"), 0, (False,)))
        assert stats.n("di", "dj") == 1
        assert stats.c("di", "dj") == 0

    def test_bottom_click_counts_a_vote(self):
        stats = record_votes(PairStats(), make_record(("dj", "di"), 0, (False,), clicked_ranks=[2]))
        assert (stats.n("di", "dj"), stats.c("di", "dj")) == (1, 1)

    def test_top_click_is_not_a_vote(self):
        stats = record_votes(PairStats(), make_record(("dj", "di"), 0, (False,), clicked_ranks=[1]))
        assert stats.total_votes() == 0

    def test_worked_example(self):
        stats = record_votes(PairStats(), make_record(FIVE_DOCS, 0, (False, True), clicked_ranks=[4]))
        assert (stats.n("d3", "d4"), stats.c("d3", "d4")) == (1, 1)
        assert (stats.n("d2", "d1"), stats.c("d2", "d1")) == (1, 0)
        assert stats.n("d5", "d3") == 0

    def test_inconsistent_record_rejected(self):
        record = make_record(FIVE_DOCS, 0, (False, True))
        tampered = record.__class__(**{**record.__dict__, "presented_order": FIVE_DOCS})
        with pytest.raises(InconsistentRecord):
            record_votes(PairStats(), tampered)

    def test_top_stream_counts_clicks_on_pair_tops(self):
        stats = record_top_votes(PairStats(), make_record(FIVE_DOCS, 0, (False, True), clicked_ranks=[3, 4]))
        assert (stats.n("d4", "d3"), stats.c("d4", "d3")) == (1, 1)
        assert (stats.n("d1", "d2"), stats.c("d1", "d2")) == (1, 0)

    def test_skip_above_counts_every_lower_upper_pair(self):
        presented = RankedList(("a", "b", "c"))
        stats = record_preference_votes(PairStats(), presented, [PreferenceVote("c", "a")])
        assert stats.n("c", "a") == stats.n("b", "a") == stats.n("c", "b") == 1
        assert stats.n("a", "c") == 0
        assert stats.c("c", "a") == 1


class TestEstimateP:

    def test_values(self):
        stats = PairStats({("a", "b"): 5, ("b", "a"): 36, ("c", "a"): 4}, {("b", "a"): 20, ("c", "a"): 4})
        assert estimate_p(stats, "a", "b") == 0.0
        assert estimate_p(stats, "c", "a") == 1.0
        assert estimate_p(stats, "b", "a") == pytest.approx(0.5556, abs=1e-4)

    def test_no_data(self):
        with pytest.raises(NoData):
            estimate_p(PairStats(), "a", "b")


class TestMerge:

    @given(pair_stats, pair_stats, pair_stats)
    def test_merge_is_associative_and_commutative(self, first, second, third):
        assert first.merge(second).merge(third) == first.merge(second.merge(third))
        assert first.merge(second) == second.merge(first)

    @given(pair_stats)
    def test_empty_stats_is_identity(self, stats):
        assert stats.merge(PairStats()) == stats
        assert PairStats().merge(stats) == stats

    def test_merge_does_not_mutate(self):
        first = PairStats({("a", "b"): 1}, {("a", "b"): 1})
        first.merge(PairStats({("a", "b"): 2}))
        assert first.n("a", "b") == 1

    def test_merge_accumulators_of_split_log(self):
        records = [make_record(FIVE_DOCS, index % 2, (True, index % 3 == 0), clicked_ranks=[index % 5 + 1])
                   for index in range(40)]
        extractors = (FAIRPAIRS, SKIP_ABOVE, NAIVE)
        whole = aggregate_log(records, extractors, top_click_votes=True)
        halves = merge_accumulators(aggregate_log(records[:17], extractors, True),
                                    aggregate_log(records[17:], extractors, True))
        assert halves == whole
        assert set(whole) == {FAIRPAIRS, SKIP_ABOVE, NAIVE, FAIRPAIRS_TOP}
        assert isinstance(whole[NAIVE], RelevanceTally)

    def test_unknown_extractor(self):
        with pytest.raises(ValueError):
            new_accumulators(["clicks"])


class TestEpsilon:

    def test_single_pair(self):
        assert epsilon_from_model({("a", "b"): 0.3, ("b", "a"): 0.2}).epsilon == pytest.approx(0.05)

    def test_smallest_gap_wins(self):
        true_P = {("a", "b"): 0.3, ("b", "a"): 0.2, ("b", "c"): 0.5, ("c", "b"): 0.48}
        assert epsilon_from_model(true_P).epsilon == pytest.approx(0.01)

    def test_symmetric_model(self):
        with pytest.raises(ZeroGap):
            epsilon_from_model({("a", "b"): 0.25, ("b", "a"): 0.25})

    def test_missing_reverse(self):
        with pytest.raises(NoData):
            epsilon_from_model({("a", "b"): 0.25})


class TestSufficiency:

    def test_balance_within_epsilon(self):
        stats = PairStats({("1", "2"): 1000, ("2", "1"): 980}, {("1", "2"): 300, ("2", "1"): 196})
        report = sufficiency_check(stats, ConvergenceParams(0.05), {("1", "2"): 0.3, ("2", "1"): 0.2})
        assert report.sufficient
        assert all(pair.balance < 0.05 for pair in report.pairs)

    def test_exact_balance_any_epsilon(self):
        stats = PairStats({("1", "2"): 10, ("2", "1"): 10})
        report = sufficiency_check(stats, ConvergenceParams(1e-6))
        assert all(pair.balance_ok for pair in report.pairs)
        assert all(pair.proxy for pair in report.pairs)
        assert not report.sufficient

    def test_inaccurate_estimate_fails(self):
        stats = PairStats({("1", "2"): 1000, ("2", "1"): 1000}, {("1", "2"): 400, ("2", "1"): 200})
        report = sufficiency_check(stats, ConvergenceParams(0.05), {("1", "2"): 0.3, ("2", "1"): 0.2})
        assert report.per_pair() == {("1", "2"): False, ("2", "1"): True}

    def test_missing_orientation(self):
        with pytest.raises(NoData):
            sufficiency_check(PairStats({("1", "2"): 10}), ConvergenceParams(0.1))
