import json
import logging

import pytest

from src.config.app_config import AppConfig
from src.config.experiment_config import (
    ExperimentConfig,
    ProbeConfig,
    load_experiment_config,
    merge_cli_values,
    read_config_file,
    resolve_click_model,
)
from src.config.presets import CLICK_MODEL_PRESETS, preset_relevances
from src.utils.exceptions import ConfigError, InvalidSpec


class TestAppConfig:

    def test_environment_values(self, monkeypatch):
        monkeypatch.setenv("FAIRPAIRS_WORKERS", "3")
        monkeypatch.setenv("FAIRPAIRS_OUTPUT_DIR", "runs")
        monkeypatch.setenv("FAIRPAIRS_CHECK_EVERY", "")
        config = AppConfig()
        assert config.workers == 3
        assert config.output_dir == "runs"
        assert config.check_every == 5000

    def test_non_integer_rejected(self, monkeypatch):
        monkeypatch.setenv("FAIRPAIRS_MAX_QUERIES", "lots")
        with pytest.raises(ConfigError) as excinfo:
            AppConfig()
        assert set(excinfo.value.errors) == {"FAIRPAIRS_MAX_QUERIES"}


class TestExperimentConfig:

    def test_defaults_are_valid(self):
        config = ExperimentConfig()
        assert config.validate() == {}
        assert config.documents() == ["d1", "d2", "d3", "d4", "d5", "d6"]

    def test_every_invalid_field_reported(self):
        with pytest.raises(ConfigError) as excinfo:
            ExperimentConfig(seed=-1, num_queries=-5, base_ranking="sideways", extractors=("clicks",))
        assert set(excinfo.value.errors) == {"seed", "num_queries", "base_ranking", "extractors"}

    @pytest.mark.parametrize("overrides, field", [
        ({"num_docs": 1}, "num_docs"),
        ({"relevance_source": (0.5, 0.4)}, "relevance_source"),
        ({"relevance_source": (0.9, 0.8, 0.7, 0.6, 0.5, 1.5)}, "relevance_source"),
        ({"relevance_source": "steep"}, "relevance_source"),
        ({"click_model": "optimistic"}, "click_model"),
        ({"click_model": {"eta": -1}}, "click_model"),
        ({"extractors": ("naive", "naive")}, "extractors"),
        ({"randomize": "yes"}, "randomize"),
        ({"query_id": ""}, "query_id"),
        ({"probe": ProbeConfig(target_rank_range=(4, 9))}, "probe.target_rank_range"),
        ({"probe": ProbeConfig(swap_order="never")}, "probe.swap_order"),
        ({"probe": ProbeConfig(probe_relevance=2.0)}, "probe.probe_relevance"),
    ])
    def test_invalid_field(self, overrides, field):
        with pytest.raises(ConfigError) as excinfo:
            ExperimentConfig(**overrides)
        assert field in excinfo.value.errors

    def test_explicit_relevances(self):
        config = ExperimentConfig(num_docs=3, relevance_source=[0.2, 0.8, 0.5])
        assert config.relevances() == {"d1": 0.2, "d2": 0.8, "d3": 0.5}

    def test_random_relevances_follow_seed(self):
        first = ExperimentConfig(seed=4, relevance_source="random").relevances()
        assert first == ExperimentConfig(seed=4, relevance_source="random").relevances()
        assert first != ExperimentConfig(seed=5, relevance_source="random").relevances()

    def test_dict_round_trip(self):
        config = ExperimentConfig(seed=9, relevance_source=(0.9, 0.5, 0.1), num_docs=3,
                                  probe=ProbeConfig(0.01, (1, 3)), extractors=("fairpairs", "naive"))
        data = json.loads(json.dumps(config.to_dict()))
        assert ExperimentConfig.from_dict(data) == config

    def test_unknown_keys(self):
        with pytest.raises(ConfigError) as excinfo:
            ExperimentConfig.from_dict({"seed": 1, "num_querys": 10})
        assert excinfo.value.errors == {"num_querys": "unknown key"}

    def test_unknown_probe_key(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"probe": {"relevance": 0.1}})


class TestPresets:

    def test_linear_profile(self):
        assert preset_relevances("linear", 4) == pytest.approx([0.9, 0.65, 0.4, 0.15])

    def test_random_needs_a_stream(self):
        with pytest.raises(ValueError):
            preset_relevances("random", 4)


class TestResolveClickModel:

    def test_preset(self):
        assert resolve_click_model("violating") is CLICK_MODEL_PRESETS["violating"]

    def test_preset_with_overrides(self):
        model = resolve_click_model({"preset": "default", "gamma": 0.5})
        assert model.gamma == 0.5
        assert model.eta == CLICK_MODEL_PRESETS["default"].eta
        assert model.name == "default+overrides"

    def test_parameter_block(self):
        model = resolve_click_model({"eta": 0.5, "attraction": {"intercept": 0.1, "slope": 0.8}})
        assert (model.eta, model.attraction.intercept, model.attraction.slope) == (0.5, 0.1, 0.8)

    @pytest.mark.parametrize("block", [{"theta": 1}, {"attraction": {"power": 2}}, 3])
    def test_invalid(self, block):
        with pytest.raises(InvalidSpec):
            resolve_click_model(block)


class TestConfigFiles:

    def test_load(self, tmp_path):
        path = tmp_path / "experiment.json"
        path.write_text(json.dumps({"seed": 3, "num_docs": 4, "click_model": "unbiased"}), encoding="utf-8")
        config = load_experiment_config(str(path))
        assert (config.seed, config.num_docs, config.model.name) == (3, 4, "unbiased")

    @pytest.mark.parametrize("content", ["{broken", "[1, 2]"])
    def test_unreadable_content(self, tmp_path, content):
        path = tmp_path / "experiment.json"
        path.write_text(content, encoding="utf-8")
        with pytest.raises(ConfigError):
            read_config_file(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            read_config_file(str(tmp_path / "missing.json"))

    def test_file_wins_conflicts(self, caplog):
        with caplog.at_level(logging.WARNING):
            merged = merge_cli_values({"seed": 1}, {"seed": 2, "num_docs": 4})
        assert merged == {"seed": 1, "num_docs": 4}
        assert "seed" in caplog.text

    def test_agreeing_values_do_not_warn(self, caplog):
        with caplog.at_level(logging.WARNING):
            merge_cli_values({"seed": 1}, {"seed": 1})
        assert caplog.text == ""
