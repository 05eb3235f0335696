import json
import logging
import os
import sys

import click
from click.core import ParameterSource

from src.config.app_config import AppConfig
from src.config.experiment_config import (
    BASE_RANKINGS,
    EXTRACTOR_NAMES,
    SWAP_ORDERS,
    ExperimentConfig,
    merge_cli_values,
    read_config_file,
)
from src.config.presets import CLICK_MODEL_PRESETS, RELEVANCE_PRESETS
from src.models.pair_stats import PairStats
from src.services.aggregation import FAIRPAIRS, aggregate_log
from src.services.learner import compare_minimizers, error_rate, minimize_error_exhaustive, minimize_error_greedy
from src.services.log_store import read_log, write_log
from src.services.probe import figure_tables, pair_type_table, relevance_split_table
from src.services.report_writer import emit_report, read_pair_stats_csv, write_pair_stats_csv, write_ranking_csv
from src.services.simulation import build_query, run_simulation
from src.services.verification import SUITES, run_suite
from src.utils.exceptions import FairPairsError, VerificationFailed

logger = logging.getLogger(__name__)

# CLI option name -> ExperimentConfig field
CONFIG_OPTIONS = {
    "seed": "seed",
    "num_queries": "num_queries",
    "num_docs": "num_docs",
    "relevance": "relevance_source",
    "click_model": "click_model",
    "extractor": "extractors",
    "base_ranking": "base_ranking",
    "randomize": "randomize",
    "top_click_votes": "top_click_votes",
    "timestamps": "log_timestamps",
    "query_id": "query_id",
}
PROBE_OPTIONS = {
    "probe_relevance": "probe_relevance",
    "target_ranks": "target_rank_range",
    "swap_order": "swap_order",
}


def _parse_relevance(ctx, param, value):
    """A preset name, or comma-separated relevances"""
    if value is None or value in RELEVANCE_PRESETS:
        return value
    try:
        return tuple(float(part) for part in value.split(","))
    except ValueError:
        raise click.BadParameter(f"expected one of {', '.join(RELEVANCE_PRESETS)} or comma-separated numbers, "
                                 f"got {value!r}")


def experiment_options(command):
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON experiment config file"),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--num-queries", type=int, default=1000, show_default=True),
        click.option("--num-docs", type=int, default=6, show_default=True),
        click.option("--relevance", default="linear", callback=_parse_relevance, show_default=True,
                     help="linear, high, random, or comma-separated relevances"),
        click.option("--click-model", type=click.Choice(sorted(CLICK_MODEL_PRESETS)), default="default",
                     show_default=True),
        click.option("--extractor", type=click.Choice(EXTRACTOR_NAMES), multiple=True, default=("fairpairs",),
                     show_default=True),
        click.option("--base-ranking", type=click.Choice(BASE_RANKINGS), default="true", show_default=True),
        click.option("--randomize/--no-randomize", default=True, show_default=True),
        click.option("--top-click-votes/--no-top-click-votes", default=False),
        click.option("--timestamps/--no-timestamps", default=False),
        click.option("--query-id", default="q1", show_default=True),
        click.option("--workers", type=int, default=None, help="defaults to FAIRPAIRS_WORKERS"),
        click.option("--output-dir", type=click.Path(file_okay=False), default=None,
                     help="defaults to FAIRPAIRS_OUTPUT_DIR"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _explicit(ctx: click.Context, names) -> dict:
    """Values of the given options that were typed on the command line, keyed by config field"""
    values = {}
    for option, field_name in names.items():
        if option in ctx.params and ctx.get_parameter_source(option) == ParameterSource.COMMANDLINE:
            value = ctx.params[option]
            values[field_name] = list(value) if isinstance(value, tuple) else value
    return values


def build_config(ctx: click.Context) -> ExperimentConfig:
    """Defaults, then the config file, then explicit flags the file leaves unset"""
    config_path = ctx.params.get("config_path")
    file_values = read_config_file(config_path) if config_path else {}
    cli_probe = _explicit(ctx, PROBE_OPTIONS)
    if cli_probe:
        file_probe = file_values.get("probe") or {}
        file_values = dict(file_values, probe=merge_cli_values(file_probe, cli_probe))
    values = merge_cli_values(file_values, _explicit(ctx, CONFIG_OPTIONS))
    return ExperimentConfig.from_dict(values)


def _settings(ctx: click.Context, workers, output_dir):
    app_config: AppConfig = ctx.obj
    return (workers if workers is not None else app_config.workers,
            output_dir if output_dir is not None else app_config.output_dir)


def _ensure_dir(path: str):
    os.makedirs(path, exist_ok=True)
    return path


@click.group()
@click.option("--log-level", default=None, help="overrides FAIRPAIRS_LOG_LEVEL")
@click.pass_context
def cli(ctx, log_level):
    """FairPairs click-randomization experiments."""
    from src import create_app

    ctx.obj = create_app(log_level)


@cli.command()
@experiment_options
@click.pass_context
def simulate(ctx, config_path, seed, num_queries, num_docs, relevance, click_model, extractor, base_ranking,
             randomize, top_click_votes, timestamps, query_id, workers, output_dir):
    """Simulate impressions and write the click log and pair statistics."""
    config = build_config(ctx)
    workers, output_dir = _settings(ctx, workers, output_dir)
    result = run_simulation(config, workers)

    _ensure_dir(output_dir)
    log_path = os.path.join(output_dir, "click_log.jsonl")
    write_log(log_path, result.log)
    for name, accumulator in sorted(result.stats.items()):
        if isinstance(accumulator, PairStats):
            filename = "pair_stats.csv" if name == FAIRPAIRS else f"{name}_pair_stats.csv"
            write_pair_stats_csv(os.path.join(output_dir, filename), accumulator)
    with open(os.path.join(output_dir, "config.json"), "w", encoding="utf-8") as f:
        json.dump(config.to_dict(), f, indent=2)

    click.echo(f"Simulated {len(result.log)} queries; log written to {log_path}")


@cli.command()
@experiment_options
@click.option("--probe-relevance", type=float, default=0.05, show_default=True)
@click.option("--target-ranks", type=(int, int), default=(1, 5), show_default=True,
              help="inclusive range of ranks the probe may replace")
@click.option("--swap-order", type=click.Choice(SWAP_ORDERS), default="after_fairpairs", show_default=True)
@click.option("--clicked-only", is_flag=True, help="count only queries with a click in the figure tables")
@click.pass_context
def probe(ctx, config_path, seed, num_queries, num_docs, relevance, click_model, extractor, base_ranking,
          randomize, top_click_votes, timestamps, query_id, workers, output_dir, probe_relevance, target_ranks,
          swap_order, clicked_only):
    """Run the probe-document experiment and write its report tables."""
    config = build_config(ctx)
    if config.probe is None:
        config = config.with_overrides(probe={
            "probe_relevance": probe_relevance,
            "target_rank_range": list(target_ranks),
            "swap_order": swap_order,
        })
    workers, output_dir = _settings(ctx, workers, output_dir)
    result = run_simulation(config, workers)

    _ensure_dir(output_dir)
    write_log(os.path.join(output_dir, "click_log.jsonl"), result.log)
    tables = figure_tables(result.log, clicked_only=clicked_only)
    tables["pair_types"] = pair_type_table(result.log)
    written = emit_report(output_dir, tables, stats=result.stats.get(FAIRPAIRS))
    for name in sorted(written):
        click.echo(f"{name}: {written[name]}")


@cli.command()
@click.argument("log_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--extractor", type=click.Choice(EXTRACTOR_NAMES), multiple=True, default=("fairpairs",),
              show_default=True)
@click.option("--top-click-votes/--no-top-click-votes", default=False)
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.pass_context
def aggregate(ctx, log_path, extractor, top_click_votes, output_dir):
    """Replay a click log into pair statistics."""
    _, output_dir = _settings(ctx, None, output_dir)
    accumulators = aggregate_log(read_log(log_path), extractor, top_click_votes)
    _ensure_dir(output_dir)
    for name, accumulator in sorted(accumulators.items()):
        if isinstance(accumulator, PairStats):
            filename = "pair_stats.csv" if name == FAIRPAIRS else f"{name}_pair_stats.csv"
            path = os.path.join(output_dir, filename)
            write_pair_stats_csv(path, accumulator)
            click.echo(f"{name}: {accumulator.total_votes()} votes -> {path}")
        else:
            masses = ", ".join(f"{rank}:{mass}" for rank, mass in sorted(accumulator.rank_clicks.items()))
            click.echo(f"{name}: clicks per rank {masses}")


@cli.command()
@click.argument("stats_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(["exhaustive", "greedy", "compare"]), default="exhaustive",
              show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="ranking CSV to write")
def learn(stats_path, method, output):
    """Learn a ranking from a pair-stats CSV."""
    stats = read_pair_stats_csv(stats_path)
    documents = stats.documents()
    if method == "compare":
        comparison = compare_minimizers(stats, documents)
        ranking = comparison.exhaustive
        click.echo(f"greedy: {' > '.join(comparison.greedy)} "
                   f"({comparison.greedy_error.violated}/{comparison.greedy_error.total} violated)")
        if comparison.majority_cycle:
            click.echo(f"majority cycle: {' > '.join(comparison.majority_cycle)}")
    elif method == "greedy":
        ranking = minimize_error_greedy(stats, documents)
    else:
        ranking = minimize_error_exhaustive(stats, documents)

    error = error_rate(ranking, stats)
    click.echo(f"{method}: {' > '.join(ranking)} ({error.violated}/{error.total} violated)")
    if output:
        write_ranking_csv(output, ranking)


@cli.command()
@click.argument("log_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="experiment config; its relevances add the relevance-split table")
@click.option("--clicked-only", is_flag=True, help="count only queries with a click in the figure tables")
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.pass_context
def report(ctx, log_path, config_path, clicked_only, output_dir):
    """Write the report tables for a click log."""
    _, output_dir = _settings(ctx, None, output_dir)
    records = read_log(log_path)
    tables = figure_tables(records, clicked_only=clicked_only)
    tables["pair_types"] = pair_type_table(records)
    if config_path:
        config = ExperimentConfig.from_dict(read_config_file(config_path))
        if config.probe is None:
            tables["relevance_split"] = relevance_split_table(records, build_query(config).relevances())
        else:
            logger.warning("Skipping the relevance-split table: the probe's relevance is not in the log")
    stats = aggregate_log(records)[FAIRPAIRS]
    written = emit_report(output_dir, tables, stats=stats)
    for name in sorted(written):
        click.echo(f"{name}: {written[name]}")


@cli.command()
@click.argument("suite", type=click.Choice(sorted(SUITES) + ["all"]), default="all")
@click.option("--quick", is_flag=True, help="reduced sizes")
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="JSON file for the suite details")
@click.option("--check-every", type=click.IntRange(min=1), default=None, help="overrides FAIRPAIRS_CHECK_EVERY")
@click.option("--max-queries", type=click.IntRange(min=1), default=None, help="overrides FAIRPAIRS_MAX_QUERIES")
@click.pass_context
def verify(ctx, suite, quick, output, check_every, max_queries):
    """Run acceptance suites; exits with status 2 when one fails."""
    app_config: AppConfig = ctx.obj
    convergence = {
        "check_every": check_every if check_every is not None else app_config.check_every,
        "max_queries": max_queries if max_queries is not None else app_config.max_queries,
    }
    results = run_suite(suite, quick=quick, settings={"theorem2": convergence})
    for result in results:
        click.echo(f"{result.name}: {'PASS' if result.passed else 'FAIL'}")
    if output:
        with open(output, "w", encoding="utf-8") as f:
            json.dump([result.to_dict() for result in results], f, indent=2, default=str)
    failed = [result.name for result in results if not result.passed]
    if failed:
        raise VerificationFailed(f"failed suites: {', '.join(failed)}")


def main(argv=None) -> int:
    """Run the CLI and map errors to exit codes: 1 usage/config/input, 2 failed verification"""
    try:
        cli.main(args=argv, prog_name="fairpairs", standalone_mode=False)
    except VerificationFailed as e:
        click.echo(f"Error: {e}", err=True)
        return 2
    except click.ClickException as e:
        e.show()
        return 1
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except (FairPairsError, OSError) as e:
        click.echo(f"Error: {e}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
