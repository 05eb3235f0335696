import pytest

from src.config.experiment_config import ExperimentConfig
from src.config.presets import CLICK_MODEL_PRESETS
from src.models.click_log import ClickLogRecord
from src.models.core import RankedList
from src.models.plan import FlipPlan
from src.services.fairpairs import apply_flip_plan

FIVE_DOCS = ("d1", "d2", "d3", "d4", "d5")


@pytest.fixture
def default_model():
    return CLICK_MODEL_PRESETS["default"]


@pytest.fixture
def five_docs():
    return RankedList(FIVE_DOCS)


@pytest.fixture
def worked_example(five_docs):
    """(d1..d5) with k=0 and the second pair flipped: (d1, d2, d4, d3, d5)"""
    return apply_flip_plan(five_docs, FlipPlan(0, (False, True)))


def make_record(original, k, swap_flags, clicked_ranks=(), index=0, query_id="q1"):
    plan = FlipPlan(k, tuple(swap_flags))
    presented = apply_flip_plan(RankedList(tuple(original)), plan).order.order
    return ClickLogRecord(
        query_id=query_id,
        k=k,
        swap_flags=plan.swap_flags,
        original_order=tuple(original),
        presented_order=presented,
        clicked_ranks=tuple(clicked_ranks),
        seed_info=(0, index),
    )


@pytest.fixture
def record_factory():
    return make_record


@pytest.fixture
def small_config():
    return ExperimentConfig(seed=7, num_queries=300, num_docs=5)
