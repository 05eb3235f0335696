import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.models.core import RankedList
from src.models.plan import FlipPlan
from src.services.fairpairs import (
    apply_flip_plan,
    assign_pairs,
    draw_flip_plan,
    enumerate_flip_plans,
    extract_preferences,
    extract_top_preferences,
    marginal_rank_distribution,
    presented_positions,
    sample_flip_plans,
    sample_rank_frequencies,
)
from src.utils.exceptions import PlanSizeMismatch, RankOutOfRange
from src.utils.rng import setup_stream


class TestAssignPairs:

    def test_even_offset(self):
        assignment = assign_pairs(5, 0)
        assert assignment.pairs == ((1, 2), (3, 4))
        assert assignment.unpaired_ranks == (5,)

    def test_odd_offset(self):
        assignment = assign_pairs(5, 1)
        assert assignment.pairs == ((2, 3), (4, 5))
        assert assignment.unpaired_ranks == (1,)

    def test_single_document(self):
        assignment = assign_pairs(1, 0)
        assert assignment.pairs == ()
        assert assignment.unpaired_ranks == (1,)

    @given(n=st.integers(1, 30), k=st.sampled_from([0, 1]))
    def test_pairs_and_unpaired_cover_every_rank_once(self, n, k):
        assignment = assign_pairs(n, k)
        ranks = [rank for pair in assignment.pairs for rank in pair] + list(assignment.unpaired_ranks)
        assert sorted(ranks) == list(range(1, n + 1))
        assert all(bottom == top + 1 for top, bottom in assignment.pairs)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            assign_pairs(0, 0)
        with pytest.raises(ValueError):
            assign_pairs(4, 2)


class TestApplyFlipPlan:

    def test_worked_example(self, worked_example):
        assert worked_example.order.order == ("d1", "d2", "d4", "d3", "d5")
        assert worked_example.original.order == ("d1", "d2", "d3", "d4", "d5")

    def test_no_flags_is_identity(self, five_docs):
        assert apply_flip_plan(five_docs, FlipPlan(1, (False, False))).order == five_docs

    def test_flag_count_must_match(self, five_docs):
        with pytest.raises(PlanSizeMismatch):
            apply_flip_plan(five_docs, FlipPlan(0, (True,)))
        with pytest.raises(PlanSizeMismatch):
            apply_flip_plan(five_docs, FlipPlan(1, (True, False, True)))

    @settings(max_examples=200)
    @given(n=st.integers(1, 12), seed=st.integers(0, 2 ** 32))
    def test_random_plan_moves_documents_at_most_one_rank(self, n, seed):
        ranked = RankedList(tuple(f"d{i}" for i in range(1, n + 1)))
        plan = draw_flip_plan(n, setup_stream(seed))
        perturbed = apply_flip_plan(ranked, plan)

        assert sorted(perturbed.order.order) == sorted(ranked.order)
        for document in ranked:
            assert abs(perturbed.order.rank_of(document) - ranked.rank_of(document)) <= 1
        for rank in assign_pairs(n, plan.k).unpaired_ranks:
            assert perturbed.doc_at(rank) == ranked.doc_at(rank)
        assert presented_positions(n, plan) == [perturbed.order.rank_of(document) for document in ranked]

    @given(n=st.integers(1, 12), seed=st.integers(0, 2 ** 32))
    def test_applying_a_plan_twice_restores_the_input(self, n, seed):
        ranked = RankedList(tuple(range(n)))
        plan = draw_flip_plan(n, setup_stream(seed))
        assert apply_flip_plan(apply_flip_plan(ranked, plan).order, plan).order == ranked


class TestDrawFlipPlan:

    def test_same_stream_same_plan(self):
        assert draw_flip_plan(4, setup_stream(11)) == draw_flip_plan(4, setup_stream(11))

    def test_flags_sized_for_the_offset(self):
        for seed in range(20):
            plan = draw_flip_plan(6, setup_stream(seed))
            assert len(plan.swap_flags) == len(assign_pairs(6, plan.k).pairs)

    def test_offset_and_flags_are_fair(self):
        count = 200_000
        k, swaps = sample_flip_plans(4, count, setup_stream(3))
        sigma = np.sqrt(0.25 / count)
        assert abs(np.mean(k == 0) - 0.5) < 4 * sigma
        # rank 1-2 pair exists only under k=0, rank 2-3 only under k=1
        assert abs(swaps[k == 0, 0].mean() - 0.5) < 4 * np.sqrt(0.25 / np.sum(k == 0))
        assert abs(swaps[k == 1, 1].mean() - 0.5) < 4 * np.sqrt(0.25 / np.sum(k == 1))
        assert not swaps[k == 0, 1].any()


class TestExtractPreferences:

    def test_bottom_click_votes_over_document_above(self, worked_example):
        votes = extract_preferences(worked_example, [4])
        assert [(vote.winner, vote.loser) for vote in votes] == [("d3", "d4")]

    def test_no_clicks(self, worked_example):
        assert extract_preferences(worked_example, []) == []

    def test_top_and_unpaired_clicks_give_no_vote(self, worked_example):
        assert extract_preferences(worked_example, [3, 5]) == []

    def test_repeated_click_is_a_repeated_vote(self, worked_example):
        assert len(extract_preferences(worked_example, [2, 4, 4])) == 3

    def test_rank_out_of_range(self, worked_example):
        with pytest.raises(RankOutOfRange):
            extract_preferences(worked_example, [6])

    def test_top_stream(self, worked_example):
        votes = extract_top_preferences(worked_example, [1, 3, 5])
        assert [(vote.winner, vote.loser) for vote in votes] == [("d1", "d2"), ("d4", "d3")]


class TestMarginalRankDistribution:

    def test_single_document(self):
        np.testing.assert_array_equal(marginal_rank_distribution(1), [[1.0]])

    def test_five_documents(self):
        distribution = marginal_rank_distribution(5)
        assert distribution[0, 0] == pytest.approx(0.75)
        assert distribution[2, 2] == pytest.approx(0.5)

    def test_last_rank_of_four(self):
        assert marginal_rank_distribution(4)[3, 3] == pytest.approx(0.75)

    @pytest.mark.parametrize("n", range(1, 8))
    def test_doubly_stochastic_and_symmetric(self, n):
        distribution = marginal_rank_distribution(n)
        np.testing.assert_allclose(distribution.sum(axis=0), 1.0)
        np.testing.assert_allclose(distribution.sum(axis=1), 1.0)
        np.testing.assert_allclose(distribution, distribution.T)

    @pytest.mark.parametrize("n", range(1, 8))
    def test_plan_probabilities_sum_to_one(self, n):
        assert sum(weight for _, weight in enumerate_flip_plans(n)) == pytest.approx(1.0)

    def test_sampled_frequencies_match_enumeration(self):
        count = 200_000
        exact = marginal_rank_distribution(5)
        frequencies, max_displacement = sample_rank_frequencies(5, count, setup_stream(5, 2))
        tolerance = 4 * np.sqrt(exact * (1 - exact) / count)
        assert np.all(np.abs(frequencies - exact) <= tolerance)
        assert max_displacement == 1
