"""Parameters of the simulated user and the relevance-score reports derived from them"""
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from src.utils.exceptions import InvalidSpec

VALIDATION_GRID = np.linspace(0.0, 1.0, 101)


@dataclass(frozen=True)
class LinearAttraction:
    """A(r) = intercept + slope * r, clamped to [0, 1]"""

    intercept: float = 0.0
    slope: float = 1.0

    def __call__(self, relevance: float) -> float:
        return min(1.0, max(0.0, self.intercept + self.slope * relevance))

    def values(self, relevances: np.ndarray) -> np.ndarray:
        return np.clip(self.intercept + self.slope * np.asarray(relevances, dtype=float), 0.0, 1.0)

    def to_dict(self):
        return {"intercept": self.intercept, "slope": self.slope}


@dataclass(frozen=True)
class ClickModelSpec:
    """
    Factored click model: P(click at rank p) = E(p) * A(r_p) * G(r_{p-1}), clamped to [0, 1].

    E(p) = p ** -eta is the examination factor, A the attraction of the clicked
    document and G(r) = max(0, 1 + gamma * (r - 0.5)) the factor contributed by
    the document presented directly above (1 at rank 1). With cascade_stop set,
    examination ends after a click with that probability.
    """

    eta: float = 1.0
    attraction: LinearAttraction = field(default_factory=LinearAttraction)
    gamma: float = 0.1
    cascade_stop: Optional[float] = None
    name: str = "custom"

    def __post_init__(self):
        if self.eta < 0:
            raise InvalidSpec(f"position decay eta must be >= 0, got {self.eta}")
        if self.cascade_stop is not None and not 0.0 <= self.cascade_stop <= 1.0:
            raise InvalidSpec(f"cascade_stop must lie in [0, 1], got {self.cascade_stop}")
        values = self.attraction.values(VALIDATION_GRID)
        if np.any(np.diff(values) < 0):
            raise InvalidSpec(f"attraction {self.attraction} decreases on [0, 1]")

    @property
    def strictly_increasing(self) -> bool:
        return bool(np.all(np.diff(self.attraction.values(VALIDATION_GRID)) > 0))

    @property
    def independent_clicks(self) -> bool:
        return not self.cascade_stop

    def to_dict(self):
        return {
            "eta": self.eta,
            "attraction": self.attraction.to_dict(),
            "gamma": self.gamma,
            "cascade_stop": self.cascade_stop,
        }


@dataclass(frozen=True)
class PairContext:
    """Relevances around one pair; never document ids"""

    above: Tuple[float, ...]
    r_top: float
    r_bot: float
    below: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "above", tuple(self.above))
        object.__setattr__(self, "below", tuple(self.below))

    def with_bottom(self, r_bot: float) -> "PairContext":
        return PairContext(self.above, self.r_top, r_bot, self.below)

    def with_top(self, r_top: float) -> "PairContext":
        return PairContext(self.above, r_top, self.r_bot, self.below)


@dataclass(frozen=True)
class ScoreReport:
    delta_rel: float
    delta_ign: float
    r1: float = 0.0
    r2: float = 0.0
    rank: int = 2
    context_relevance: float = 0.5

    @property
    def assumption2_holds(self) -> bool:
        return self.delta_rel > self.delta_ign


@dataclass(frozen=True)
class Assumption2Report:
    cells: Tuple[ScoreReport, ...]

    @property
    def holds(self) -> bool:
        return all(cell.assumption2_holds for cell in self.cells)

    @property
    def violations(self) -> Tuple[ScoreReport, ...]:
        return tuple(cell for cell in self.cells if not cell.assumption2_holds)
