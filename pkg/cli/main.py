"""
This module contains the command-line entry point. Each subcommand runs one pipeline stage
against a run directory; `pipeline` runs all of them in order.
"""

import logging
from typing import Any, Callable, Dict, List, Optional, TypeVar

import click

from cli.config import RunConfig, load_config
from cli.errors import ConfigFileError, DependencyMissingError, StageError
from cli.stages import STAGE_EXIT_CODES, PipelineRunner
from faults.models import FaultKind
from gateway.models import Phase
from runstore.errors import ConfigMismatchError, RunLockedError, RunStoreError
from runstore.store import RunStore
from source_model.models import Quartile
from spm.models import MAX_STRENGTH, MIN_STRENGTH

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
EXIT_USAGE = 2
EXIT_DEPENDENCY_MISSING = 20
EXIT_CONFIG_MISMATCH = 21
EXIT_RUN_LOCKED = 22

T = TypeVar("T")
F = TypeVar("F", bound=Callable[..., Any])


def split_names(text: Optional[str]) -> Optional[List[str]]:
    """
    Parses a comma-separated list; None and "all" mean no restriction.
    """
    if text is None or text.strip() == "all":
        return None
    names = [name.strip() for name in text.split(",") if name.strip()]
    if not names:
        raise click.BadParameter("expected 'all' or a comma-separated list")
    return names


def _choices(text: Optional[str], parse: Callable[[str], T]) -> Optional[List[T]]:
    names = split_names(text)
    if names is None:
        return None
    try:
        return [parse(name) for name in names]
    except ValueError as e:
        raise click.BadParameter(str(e))


def parse_strengths(text: Optional[str]) -> Optional[List[int]]:
    """
    Accepts "all", a range "1..8" or a list "1,4,8".
    """
    if text is None or text == "all":
        return None
    try:
        if ".." in text:
            low, high = (int(part) for part in text.split("..", 1))
            strengths = list(range(low, high + 1))
        else:
            strengths = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"invalid strengths '{text}'")
    if not strengths or any(not MIN_STRENGTH <= s <= MAX_STRENGTH for s in strengths):
        raise click.BadParameter(f"strengths must lie in {MIN_STRENGTH}..{MAX_STRENGTH}")
    return strengths


def _quartile(name: str) -> Quartile:
    return Quartile(name.upper())


def _settings(ctx: click.Context) -> Dict[str, Any]:
    obj: Dict[str, Any] = ctx.ensure_object(dict)
    return obj


def run_stage(
    ctx: click.Context, stage_name: str, action: Callable[[PipelineRunner], Any]
) -> Any:
    """
    Loads the config, opens the run store and runs `action`, turning failures into the exit
    code of the stage.
    """
    settings = _settings(ctx)
    try:
        config: RunConfig = load_config(settings.get("config_path"), settings.get("overrides"))
        with RunStore.open(
            config.run_dir, config.snapshot(), config.config_hash(), config.rng_seed
        ) as store:
            return action(PipelineRunner(config, store))
    except ConfigFileError as e:
        click.echo(f"Error: {e.message}", err=True)
        ctx.exit(EXIT_USAGE)
    except DependencyMissingError as e:
        logger.error(e.message)
        click.echo(f"Error: {e.message}", err=True)
        ctx.exit(EXIT_DEPENDENCY_MISSING)
    except ConfigMismatchError as e:
        logger.error(e.message)
        click.echo(f"Error: {e.message}", err=True)
        ctx.exit(EXIT_CONFIG_MISMATCH)
    except RunLockedError as e:
        logger.error(e.message)
        click.echo(f"Error: {e.message}", err=True)
        ctx.exit(EXIT_RUN_LOCKED)
    except StageError as e:
        logger.error(f"Stage {e.stage} failed: {e.message}")
        click.echo(f"Error: {e.message}", err=True)
        ctx.exit(STAGE_EXIT_CODES.get(e.stage, STAGE_EXIT_CODES[stage_name]))
    except RunStoreError as e:
        logger.error(f"Run store failure in {stage_name}: {e.message}")
        click.echo(f"Error: {e.message}", err=True)
        ctx.exit(STAGE_EXIT_CODES[stage_name])


# run option -> RunConfig override key
OVERRIDE_KEYS = {"run_dir": "run_dir", "seed": "rng_seed", "parallel": "parallel"}


def _remember(ctx: click.Context, param: click.Parameter, value: Any) -> Any:
    """
    Stores a run option in the shared settings. Options given after the subcommand name are
    parsed last and win over the same option given to the group.
    """
    if value is None:
        return value
    settings = _settings(ctx)
    if param.name == "config_path":
        settings["config_path"] = value
    elif param.name is not None:
        settings.setdefault("overrides", {})[OVERRIDE_KEYS[param.name]] = value
    return value


def run_options(command: F) -> F:
    """
    Adds --config, --run-dir, --seed and --parallel to the group and to every subcommand.
    """
    options = [
        click.option(
            "--config",
            "config_path",
            type=click.Path(dir_okay=False),
            expose_value=False,
            callback=_remember,
            help="TOML run configuration.",
        ),
        click.option(
            "--run-dir",
            type=click.Path(file_okay=False),
            expose_value=False,
            callback=_remember,
            help="Run directory.",
        ),
        click.option(
            "--seed", type=int, expose_value=False, callback=_remember, help="Global random seed."
        ),
        click.option(
            "--parallel",
            type=click.IntRange(min=1),
            expose_value=False,
            callback=_remember,
            help="Concurrent model requests.",
        ),
    ]
    for option in reversed(options):
        command = option(command)
    return command


@click.group()
@run_options
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default="INFO",
    show_default=True,
)
@click.pass_context
def cli(ctx: click.Context, log_level: str) -> None:
    """
    Generates fault-localization tasks from seed programs, evaluates models on them and
    reports accuracy and robustness under semantic-preserving mutations.
    """
    logging.basicConfig(
        level=log_level.upper(),
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler()],
        force=True,
    )
    settings = _settings(ctx)
    settings.setdefault("overrides", {})["log_level"] = log_level.upper()


def _with_section(config: RunConfig, section: str, **values: Any) -> RunConfig:
    """
    Returns `config` with the non-None `values` replacing keys of `section`.
    """
    updates = {key: value for key, value in values.items() if value is not None}
    if not updates:
        return config
    current = getattr(config, section)
    return config.model_copy(update={section: current.model_copy(update=updates)})


@cli.command()
@run_options
@click.option("--min-loc", type=click.IntRange(min=1), help="Smallest seed kept (default 50).")
@click.option("--max-tokens", type=click.IntRange(min=1), help="Largest prompt estimate kept.")
@click.pass_context
def ingest(ctx: click.Context, min_loc: Optional[int], max_tokens: Optional[int]) -> None:
    """
    Load and filter the seed files named in the config.
    """

    def action(runner: PipelineRunner) -> None:
        runner.config = _with_section(
            runner.config, "filter", min_loc=min_loc, max_tokens=max_tokens
        )
        seeds = runner.ingest()
        click.echo(f"{len(seeds)} seeds retained")

    run_stage(ctx, "ingest", action)


@cli.command()
@run_options
@click.option("--kinds", default=None, help="'all' or a list of fault kinds.")
@click.option("--quartiles", default=None, help="'all' or a list such as Q1,Q4.")
@click.option("--per-combination", type=click.IntRange(min=1), help="Faults per combination.")
@click.pass_context
def inject(
    ctx: click.Context,
    kinds: Optional[str],
    quartiles: Optional[str],
    per_combination: Optional[int],
) -> None:
    """
    Inject faults into the stored seeds and create baseline tasks.
    """
    kind_list = _choices(kinds, FaultKind)
    quartile_list = _choices(quartiles, _quartile)

    def action(runner: PipelineRunner) -> None:
        runner.config = _with_section(
            runner.config,
            "faults",
            kinds=kind_list,
            quartiles=quartile_list,
            per_combination=per_combination,
        )
        programs = runner.inject()
        click.echo(f"{len(programs)} faulty programs stored")

    run_stage(ctx, "inject", action)


@cli.command()
@run_options
@click.option(
    "--phase",
    type=click.Choice([p.name for p in Phase], case_sensitive=False),
    default="baseline",
    show_default=True,
)
@click.option("--models", default=None, help="Comma-separated model names (default: roster).")
@click.pass_context
def evaluate(ctx: click.Context, phase: str, models: Optional[str]) -> None:
    """
    Ask models to localize the fault of every outstanding task.
    """
    names = split_names(models)

    def action(runner: PipelineRunner) -> None:
        stored = runner.evaluate(Phase[phase.lower()], names)
        click.echo(f"{stored} answers stored")

    run_stage(ctx, "evaluate", action)


@cli.command(name="filter")
@run_options
@click.option("--panel", default=None, help="'all' or the models whose answers decide.")
@click.pass_context
def filter_tasks(ctx: click.Context, panel: Optional[str]) -> None:
    """
    Drop baseline tasks no panel model could localize.
    """
    members = split_names(panel)

    def action(runner: PipelineRunner) -> None:
        verdicts = runner.filter(members)
        retained = sum(1 for v in verdicts if v.retained)
        click.echo(f"{retained} of {len(verdicts)} tasks retained")

    run_stage(ctx, "filter", action)


@cli.command()
@run_options
@click.option("--plans", default=None, help="'standard' or 'single:<kind>'.")
@click.option("--strengths", default=None, help="'all', a range 1..8 or a list 1,4,8.")
@click.option("--quartiles", default=None, help="'all' or a list such as Q1,Q4.")
@click.option("--content", default=None, help="'template' or 'model:<name>'.")
@click.option("--verify/--no-verify", default=None, help="Check mutants by execution.")
@click.pass_context
def mutate(
    ctx: click.Context,
    plans: Optional[str],
    strengths: Optional[str],
    quartiles: Optional[str],
    content: Optional[str],
    verify: Optional[bool],
) -> None:
    """
    Apply semantic-preserving mutations to retained faults and create mutation-phase tasks.
    """
    strength_list = parse_strengths(strengths)
    quartile_list = _choices(quartiles, _quartile)

    def action(runner: PipelineRunner) -> None:
        stored = runner.mutate(plans, strength_list, quartile_list, content, verify)
        click.echo(f"{stored} mutants stored")

    run_stage(ctx, "mutate", action)


@cli.command()
@run_options
@click.option("--out", type=click.Path(file_okay=False), help="Report directory.")
@click.pass_context
def report(ctx: click.Context, out: Optional[str]) -> None:
    """
    Write accuracy tables and the summary for everything scored so far.
    """

    def action(runner: PipelineRunner) -> None:
        summary = runner.report(out)
        click.echo(f"Report covers {summary['baseline']['tasks']} baseline scores")

    run_stage(ctx, "report", action)


@cli.command()
@run_options
@click.option("--models", default=None, help="Comma-separated model names (default: roster).")
@click.pass_context
def pipeline(ctx: click.Context, models: Optional[str]) -> None:
    """
    Run every stage: ingest, inject, evaluate, filter, mutate, evaluate and report.
    """
    names = split_names(models)

    def action(runner: PipelineRunner) -> None:
        runner.run_all(names)
        click.echo(f"Run complete in '{runner.store.run_dir}'")

    run_stage(ctx, "pipeline", action)


def main() -> None:
    cli(obj={})


if __name__ == "__main__":
    main()

