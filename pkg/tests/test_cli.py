import json

import pytest

from src.cli import main
from src.services.log_store import read_log
from src.services.report_writer import read_pair_stats_csv


@pytest.fixture
def simulated(tmp_path):
    output_dir = tmp_path / "run"
    code = main(["simulate", "--seed", "1", "--num-docs", "4", "--num-queries", "500",
                 "--extractor", "fairpairs", "--extractor", "skip_above", "--output-dir", str(output_dir)])
    assert code == 0
    return output_dir


class TestSimulate:

    def test_outputs(self, simulated):
        assert len(read_log(str(simulated / "click_log.jsonl"))) == 500
        assert read_pair_stats_csv(str(simulated / "pair_stats.csv")).total_votes() > 0
        assert (simulated / "skip_above_pair_stats.csv").exists()
        config = json.loads((simulated / "config.json").read_text(encoding="utf-8"))
        assert (config["seed"], config["num_docs"], config["extractors"]) == (1, 4, ["fairpairs", "skip_above"])

    def test_config_file_wins_over_flags(self, tmp_path):
        config_path = tmp_path / "experiment.json"
        config_path.write_text(json.dumps({"seed": 5, "num_queries": 20, "num_docs": 3}), encoding="utf-8")
        output_dir = tmp_path / "run"
        code = main(["simulate", "--config", str(config_path), "--seed", "6", "--relevance", "0.9,0.5,0.2",
                     "--output-dir", str(output_dir)])
        assert code == 0
        config = json.loads((output_dir / "config.json").read_text(encoding="utf-8"))
        assert config["seed"] == 5
        assert config["relevance_source"] == [0.9, 0.5, 0.2]

    def test_invalid_config_file(self, tmp_path, capsys):
        config_path = tmp_path / "experiment.json"
        config_path.write_text(json.dumps({"num_docs": 1}), encoding="utf-8")
        assert main(["simulate", "--config", str(config_path), "--output-dir", str(tmp_path)]) == 1
        assert "num_docs" in capsys.readouterr().err

    def test_bad_relevance_flag(self, tmp_path):
        assert main(["simulate", "--relevance", "steep", "--output-dir", str(tmp_path)]) == 1


class TestDownstreamCommands:

    def test_replayed_stats_match_simulation(self, simulated, tmp_path):
        output_dir = tmp_path / "replay"
        assert main(["aggregate", str(simulated / "click_log.jsonl"), "--extractor", "naive",
                     "--extractor", "fairpairs", "--output-dir", str(output_dir)]) == 0
        assert (read_pair_stats_csv(str(output_dir / "pair_stats.csv"))
                == read_pair_stats_csv(str(simulated / "pair_stats.csv")))

    @pytest.mark.parametrize("method", ["exhaustive", "greedy", "compare"])
    def test_learn(self, simulated, tmp_path, capsys, method):
        ranking_path = tmp_path / "ranking.csv"
        assert main(["learn", str(simulated / "pair_stats.csv"), "--method", method,
                     "--output", str(ranking_path)]) == 0
        assert f"{method}:" in capsys.readouterr().out
        lines = ranking_path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "rank,document"
        assert sorted(line.split(",")[1] for line in lines[1:]) == ["d1", "d2", "d3", "d4"]

    def test_report(self, simulated, tmp_path):
        output_dir = tmp_path / "report"
        assert main(["report", str(simulated / "click_log.jsonl"), "--config", str(simulated / "config.json"),
                     "--output-dir", str(output_dir)]) == 0
        for name in ("pair_types", "item_relevance", "relevance_split", "pair_stats"):
            assert (output_dir / f"{name}.csv").exists()

    def test_missing_log(self, tmp_path):
        assert main(["report", str(tmp_path / "missing.jsonl")]) == 1


class TestProbeCommand:

    def test_report_tables(self, tmp_path):
        output_dir = tmp_path / "probe"
        assert main(["probe", "--num-docs", "5", "--num-queries", "400", "--target-ranks", "1", "5",
                     "--output-dir", str(output_dir)]) == 0
        log = read_log(str(output_dir / "click_log.jsonl"))
        assert all("#" in record.original_order for record in log)
        for name in ("item_relevance", "ignored_relevance", "preference_test", "pair_curve", "pair_types"):
            assert (output_dir / f"{name}.csv").exists()

    def test_probe_too_relevant(self, tmp_path):
        assert main(["probe", "--probe-relevance", "0.99", "--output-dir", str(tmp_path)]) == 1


class TestVerifyCommand:

    def test_quick_statistics_suite(self, tmp_path, capsys):
        output = tmp_path / "verify.json"
        assert main(["verify", "statistics", "--quick", "--output", str(output)]) == 0
        assert "statistics: PASS" in capsys.readouterr().out
        (result,) = json.loads(output.read_text(encoding="utf-8"))
        assert result["passed"]

    def test_unknown_suite(self):
        assert main(["verify", "everything"]) == 1

    def test_bad_environment_integer(self, monkeypatch, capsys):
        monkeypatch.setenv("FAIRPAIRS_WORKERS", "four")
        assert main(["verify", "statistics", "--quick"]) == 1
        assert "FAIRPAIRS_WORKERS" in capsys.readouterr().err

    def test_convergence_settings_reach_the_suite(self, monkeypatch, tmp_path):
        monkeypatch.setenv("FAIRPAIRS_CHECK_EVERY", "500")
        output = tmp_path / "verify.json"
        assert main(["verify", "theorem2", "--quick", "--max-queries", "1000", "--output", str(output)]) == 2
        (result,) = json.loads(output.read_text(encoding="utf-8"))
        assert result["details"]["recovered"] == 0
        assert all(queries <= 1000 for queries in result["details"]["queries"])
