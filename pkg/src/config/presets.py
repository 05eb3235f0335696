"""Named click models, relevance profiles and fixed count fixtures"""
from typing import Dict, List

import numpy as np

from src.models.click_model import ClickModelSpec, LinearAttraction

CLICK_MODEL_PRESETS: Dict[str, ClickModelSpec] = {
    # Satisfies both click-model assumptions
    "default": ClickModelSpec(eta=1.0, attraction=LinearAttraction(0.0, 1.0), gamma=0.1, name="default"),
    # No presentation bias at all
    "unbiased": ClickModelSpec(eta=0.0, attraction=LinearAttraction(0.0, 1.0), gamma=0.0, name="unbiased"),
    # Relevance of the document above outweighs the clicked document's own relevance
    "violating": ClickModelSpec(eta=1.0, attraction=LinearAttraction(0.3, 0.05), gamma=5.0, name="violating"),
    # Stops examining after a click half of the time; no closed form
    "cascade": ClickModelSpec(eta=1.0, attraction=LinearAttraction(0.0, 1.0), gamma=0.1, cascade_stop=0.5,
                              name="cascade"),
}

RELEVANCE_PRESETS = ("linear", "high", "random")

# Bounds of the random relevance profile
RANDOM_RELEVANCE_RANGE = (0.05, 0.95)


def preset_relevances(name: str, num_docs: int, rng: np.random.Generator = None) -> List[float]:
    """
    linear: evenly spaced from 0.9 down to 0.15
    high:   evenly spaced from 0.9 down to 0.5
    random: uniform draws, needs `rng`
    """
    if name == "linear":
        values = np.linspace(0.9, 0.15, num_docs)
    elif name == "high":
        values = np.linspace(0.9, 0.5, num_docs)
    elif name == "random":
        if rng is None:
            raise ValueError("the random relevance profile needs a random stream")
        values = rng.uniform(*RANDOM_RELEVANCE_RANGE, size=num_docs)
    else:
        raise ValueError(f"unknown relevance preset {name!r}; expected one of {', '.join(RELEVANCE_PRESETS)}")
    return [float(value) for value in values]


# Clicks on the top two results of a results page, by presentation and by
# which of the two is more relevant: (clicks on result 1, clicks on result 2, queries)
SWAP_STUDY_COUNTS = {
    "normal": {
        "rel1_above_rel2": (20, 2, 36),
        "rel1_below_rel2": (7, 4, 20),
    },
    "swapped": {
        "rel1_above_rel2": (16, 2, 28),
        "rel1_below_rel2": (12, 9, 36),
    },
}


def swap_study_table(presentation: str = "normal"):
    """2x2 table: rows are relevance conditions, columns clicks on result 1 and result 2"""
    counts = SWAP_STUDY_COUNTS[presentation]
    return [list(counts["rel1_above_rel2"][:2]), list(counts["rel1_below_rel2"][:2])]
