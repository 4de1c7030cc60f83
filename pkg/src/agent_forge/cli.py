"""Command-line entry point: ``agent-forge <stage> [options]``."""

import json
import logging
import sys

import click

from .config import load_config
from .exceptions import AgentForgeError
from .pipeline import Pipeline
from .rollout.types import STRATEGIES


def _common(f):
    f = click.option("--jobs", "-j", type=int, default=1, show_default=True,
                     help="Parallel provider calls / rollouts.")(f)
    f = click.option("--force", is_flag=True, help="Overwrite outputs made with a different config.")(f)
    f = click.option("--seed", type=int, default=None, help="Override the config's global seed.")(f)
    f = click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="TOML config file (defaults apply when omitted).")(f)
    return f


def _run(ctx_args, method, *args):
    config_path, seed, force, jobs = ctx_args
    try:
        cfg = load_config(config_path, seed)
        manifest, ran = getattr(Pipeline(cfg, jobs, force), method)(*args)
    except AgentForgeError as exc:
        raise click.ClickException(str(exc)) from exc
    state = "done" if ran else "up to date"
    click.echo(f"{manifest['stage']}: {state} {json.dumps(manifest['counts'], sort_keys=True)}")


@click.group()
@click.option("-v", "--verbose", count=True, help="Log more (repeatable).")
def main(verbose):
    """Synthesize GUI-agent tasks and trajectories from explored apps."""
    level = logging.WARNING - 10 * verbose
    logging.basicConfig(level=max(level, logging.DEBUG), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@_common
def explore(config_path, seed, force, jobs):
    """Random-walk every app and store the exploration trajectories."""
    _run((config_path, seed, force, jobs), "explore")


@main.command("build-memory")
@_common
def build_memory(config_path, seed, force, jobs):
    """Deduplicate screens, annotate functionalities and build the retrieval index."""
    _run((config_path, seed, force, jobs), "build_memory")


@main.command()
@_common
def synthesize(config_path, seed, force, jobs):
    """Generate instructions from memory contexts and filter them."""
    _run((config_path, seed, force, jobs), "synthesize")


_strategy = click.option("--strategy", type=click.Choice(STRATEGIES), default=None,
                         help="Rollout strategy (defaults to rollout.strategy in the config).")


@main.command()
@_common
@_strategy
def rollout(config_path, seed, force, jobs, strategy):
    """Execute the filtered instructions under a policy-switching strategy."""
    _run((config_path, seed, force, jobs), "rollout", strategy)


@main.command("export-training")
@_common
@_strategy
def export_training(config_path, seed, force, jobs, strategy):
    """Write expert-step training samples of retained trajectories as JSONL."""
    _run((config_path, seed, force, jobs), "export_training", strategy)


@main.group()
def analyze():
    """Analyses of the synthesized instruction corpus."""


@analyze.command()
@_common
def overlap(config_path, seed, force, jobs):
    """Similarity of synthetic instructions to a test set, plus removal subsets."""
    _run((config_path, seed, force, jobs), "analyze_overlap")


@analyze.command("coverage")
@_common
def coverage_cmd(config_path, seed, force, jobs):
    """Fraction of test-required functionalities covered by the corpus."""
    _run((config_path, seed, force, jobs), "analyze_coverage")


if __name__ == "__main__":  # pragma: no cover
    main()
