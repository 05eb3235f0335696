"""
Experiment configuration: one query with known relevances, repeated
num_queries times under a simulated user.
"""
import json
import logging
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, List, Optional, Tuple, Union

from src.config.presets import CLICK_MODEL_PRESETS, RELEVANCE_PRESETS, preset_relevances
from src.models.click_model import ClickModelSpec, LinearAttraction
from src.models.core import DocumentId
from src.utils.exceptions import ConfigError, InvalidSpec
from src.utils.rng import setup_stream

logger = logging.getLogger(__name__)

EXTRACTOR_NAMES = ("fairpairs", "skip_above", "naive")
BASE_RANKINGS = ("true", "reversed", "shuffled")
SWAP_ORDERS = ("after_fairpairs", "before_fairpairs")
MODEL_PARAMETERS = ("eta", "gamma", "cascade_stop", "attraction")
MAX_SEED = 2 ** 64 - 1


def document_ids(num_docs: int) -> List[str]:
    return [f"d{index}" for index in range(1, num_docs + 1)]


@dataclass(frozen=True)
class ProbeConfig:
    """A low-relevance document swapped into a uniformly chosen rank of target_rank_range (inclusive)"""

    probe_relevance: float = 0.05
    target_rank_range: Tuple[int, int] = (1, 5)
    swap_order: str = "after_fairpairs"

    def __post_init__(self):
        if isinstance(self.target_rank_range, list):
            object.__setattr__(self, "target_rank_range", tuple(self.target_rank_range))

    def errors(self, num_docs: int) -> Dict[str, str]:
        errors = {}
        if not isinstance(self.probe_relevance, (int, float)) or not 0.0 <= self.probe_relevance <= 1.0:
            errors["probe.probe_relevance"] = f"must be a number in [0, 1], got {self.probe_relevance!r}"
        rank_range = self.target_rank_range
        integer_ranks = isinstance(rank_range, tuple) and len(rank_range) == 2 and all(
            isinstance(rank, int) and not isinstance(rank, bool) for rank in rank_range
        )
        if not integer_ranks:
            errors["probe.target_rank_range"] = f"must be two integer ranks, got {rank_range!r}"
        elif not 1 <= rank_range[0] <= rank_range[1] <= num_docs:
            errors["probe.target_rank_range"] = f"must satisfy 1 <= first <= last <= num_docs={num_docs}"
        if self.swap_order not in SWAP_ORDERS:
            errors["probe.swap_order"] = f"must be one of {', '.join(SWAP_ORDERS)}, got {self.swap_order!r}"
        return errors

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ProbeConfig":
        if not isinstance(data, dict):
            raise ConfigError({"probe": f"must be an object, got {data!r}"})
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError({f"probe.{key}": "unknown key" for key in unknown})
        return cls(**data)

    def to_dict(self):
        return {
            "probe_relevance": self.probe_relevance,
            "target_rank_range": list(self.target_rank_range),
            "swap_order": self.swap_order,
        }


def _model_from_block(block: Dict[str, Any], base: ClickModelSpec, name: str) -> ClickModelSpec:
    unknown = set(block) - set(MODEL_PARAMETERS)
    if unknown:
        raise InvalidSpec(f"unknown click model parameters: {', '.join(sorted(unknown))}")
    attraction = base.attraction
    if "attraction" in block:
        params = block["attraction"]
        if not isinstance(params, dict) or set(params) - {"intercept", "slope"}:
            raise InvalidSpec("attraction must be an object with intercept and/or slope")
        attraction = LinearAttraction(
            intercept=float(params.get("intercept", attraction.intercept)),
            slope=float(params.get("slope", attraction.slope)),
        )
    cascade_stop = block.get("cascade_stop", base.cascade_stop)
    return ClickModelSpec(
        eta=float(block.get("eta", base.eta)),
        attraction=attraction,
        gamma=float(block.get("gamma", base.gamma)),
        cascade_stop=None if cascade_stop is None else float(cascade_stop),
        name=name,
    )


def resolve_click_model(click_model: Union[str, Dict[str, Any], ClickModelSpec]) -> ClickModelSpec:
    """
    A preset name, a preset with overrides ({"preset": "default", "gamma": 0.5}),
    or an explicit parameter block (unset parameters take the ClickModelSpec defaults).
    """
    if isinstance(click_model, ClickModelSpec):
        return click_model
    if isinstance(click_model, str):
        if click_model not in CLICK_MODEL_PRESETS:
            raise InvalidSpec(f"unknown click model preset {click_model!r}; "
                              f"expected one of {', '.join(CLICK_MODEL_PRESETS)}")
        return CLICK_MODEL_PRESETS[click_model]
    if isinstance(click_model, dict):
        block = dict(click_model)
        preset = block.pop("preset", None)
        if preset is not None:
            base = resolve_click_model(preset)
            return _model_from_block(block, base, f"{preset}+overrides" if block else preset)
        return _model_from_block(block, ClickModelSpec(), "custom")
    raise InvalidSpec(f"click model must be a preset name or a parameter block, got {click_model!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    num_queries: int = 1000
    num_docs: int = 6
    relevance_source: Union[str, Tuple[float, ...]] = "linear"
    click_model: Union[str, Dict[str, Any]] = "default"
    probe: Optional[ProbeConfig] = None
    extractors: Tuple[str, ...] = ("fairpairs",)
    base_ranking: str = "true"
    randomize: bool = True
    top_click_votes: bool = False
    log_timestamps: bool = False
    query_id: str = "q1"

    def __post_init__(self):
        if isinstance(self.relevance_source, list):
            object.__setattr__(self, "relevance_source", tuple(self.relevance_source))
        object.__setattr__(self, "extractors", tuple(self.extractors))
        if isinstance(self.probe, dict):
            object.__setattr__(self, "probe", ProbeConfig.from_dict(self.probe))
        errors = self.validate()
        if errors:
            raise ConfigError(errors)

    def validate(self) -> Dict[str, str]:
        """Field name -> problem, for every invalid field"""
        errors = {}

        def is_int(value):
            return isinstance(value, int) and not isinstance(value, bool)

        if not is_int(self.seed) or not 0 <= self.seed <= MAX_SEED:
            errors["seed"] = f"must be an integer in 0..2^64-1, got {self.seed!r}"
        if not is_int(self.num_queries) or self.num_queries < 0:
            errors["num_queries"] = f"must be a non-negative integer, got {self.num_queries!r}"
        if not is_int(self.num_docs) or self.num_docs < 2:
            errors["num_docs"] = f"pairwise experiments need an integer >= 2, got {self.num_docs!r}"
            return errors

        source = self.relevance_source
        if isinstance(source, str):
            if source not in RELEVANCE_PRESETS:
                errors["relevance_source"] = f"unknown preset {source!r}; expected one of {', '.join(RELEVANCE_PRESETS)}"
        elif isinstance(source, tuple):
            if len(source) != self.num_docs:
                errors["relevance_source"] = f"lists {len(source)} relevances for num_docs={self.num_docs}"
            elif not all(isinstance(value, (int, float)) and not isinstance(value, bool) and 0.0 <= value <= 1.0
                         for value in source):
                errors["relevance_source"] = "relevances must be numbers in [0, 1]"
        else:
            errors["relevance_source"] = f"must be a preset name or a list of relevances, got {source!r}"

        try:
            resolve_click_model(self.click_model)
        except (InvalidSpec, TypeError, ValueError) as e:
            errors["click_model"] = str(e)

        if self.probe is not None:
            if not isinstance(self.probe, ProbeConfig):
                errors["probe"] = f"must be a probe block, got {self.probe!r}"
            else:
                errors.update(self.probe.errors(self.num_docs))

        unknown = [name for name in self.extractors if name not in EXTRACTOR_NAMES]
        if unknown:
            errors["extractors"] = f"unknown extractors {unknown}; expected a subset of {', '.join(EXTRACTOR_NAMES)}"
        elif len(set(self.extractors)) != len(self.extractors):
            errors["extractors"] = "extractors are listed more than once"
        if self.base_ranking not in BASE_RANKINGS:
            errors["base_ranking"] = f"must be one of {', '.join(BASE_RANKINGS)}, got {self.base_ranking!r}"
        for flag in ("randomize", "top_click_votes", "log_timestamps"):
            if not isinstance(getattr(self, flag), bool):
                errors[flag] = f"must be true or false, got {getattr(self, flag)!r}"
        if not isinstance(self.query_id, str) or not self.query_id:
            errors["query_id"] = "must be a non-empty string"
        return errors

    @property
    def model(self) -> ClickModelSpec:
        return resolve_click_model(self.click_model)

    def documents(self) -> List[DocumentId]:
        return document_ids(self.num_docs)

    def relevances(self) -> Dict[DocumentId, float]:
        """Relevance of every document d1..dn; the random profile is drawn from the setup stream"""
        if isinstance(self.relevance_source, str):
            values = preset_relevances(self.relevance_source, self.num_docs, setup_stream(self.seed))
        else:
            values = [float(value) for value in self.relevance_source]
        return dict(zip(self.documents(), values))

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        return replace(self, **overrides)

    def to_dict(self):
        data = asdict(self)
        data["relevance_source"] = (self.relevance_source if isinstance(self.relevance_source, str)
                                    else list(self.relevance_source))
        data["extractors"] = list(self.extractors)
        data["probe"] = self.probe.to_dict() if self.probe is not None else None
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError({"config": "top level must be an object"})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError({key: "unknown key" for key in unknown})
        values = dict(data)
        if values.get("probe") is not None:
            values["probe"] = ProbeConfig.from_dict(values["probe"])
        try:
            return cls(**values)
        except TypeError as e:
            raise ConfigError({"config": str(e)})


def read_config_file(path: str) -> Dict[str, Any]:
    """Raw key/value mapping of a JSON config file"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError({"config": f"cannot read {path}: {e.strerror}"})
    except json.JSONDecodeError as e:
        raise ConfigError({"config": f"{path} is not valid JSON: {e.msg} (line {e.lineno})"})
    if not isinstance(data, dict):
        raise ConfigError({"config": f"{path} must hold a JSON object"})
    return data


def load_experiment_config(path: str) -> ExperimentConfig:
    config = ExperimentConfig.from_dict(read_config_file(path))
    logger.info(f"Loaded experiment config from {path}")
    return config


def merge_cli_values(file_values: Dict[str, Any], cli_values: Dict[str, Any]) -> Dict[str, Any]:
    """
    Explicitly given CLI values fill in fields the config file leaves unset.
    The file wins a conflict, with a warning naming the field.
    """
    merged = dict(file_values)
    for name, value in cli_values.items():
        if name not in file_values:
            merged[name] = value
        elif file_values[name] != value:
            logger.warning(f"Config file sets {name}={file_values[name]!r}; ignoring command-line value {value!r}")
    return merged
