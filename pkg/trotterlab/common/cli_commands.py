"""
Flask CLI Command Extensions
"""
import json

import click

from trotterlab import app, experiments
from trotterlab.models import DataValidationError
from . import error_handlers, status, writers


def _load(path):
    if path is None:
        return {}
    with open(path, encoding="utf-8") as handle:
        try:
            return json.load(handle)
        except json.JSONDecodeError as error:
            raise DataValidationError(f"Config {path} is not valid JSON: {error}") from error


def _run(command: str, config_path, seed, out, fmt, jobs, **fields) -> int:
    try:
        document = _load(config_path)
        if isinstance(document, dict):
            document.update({key: value for key, value in fields.items() if value is not None})
        config = experiments.resolve(command, document, seed=seed, fmt=fmt, jobs=jobs, out=out)
        text = experiments.execute(config)
        writers.write_artifact(text, config.out, click.get_text_stream("stdout"))
        if config.out is not None:
            app.logger.info("Wrote %s artifact to %s", command, config.out)
    except Exception as error:  # pylint: disable=broad-except
        return error_handlers.handle(error)
    return status.EXIT_0_OK


def experiment_options(function):
    """Options shared by every experiment command"""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON config document"),
        click.option("--seed", type=click.IntRange(0, 2**64 - 1), help="Random seed (u64)"),
        click.option("--out", type=click.Path(dir_okay=False), help="Artifact path (default: stdout)"),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), help="Artifact format"),
        click.option("--jobs", type=click.IntRange(min=1), help="Parallel workers"),
    ]
    for option in reversed(options):
        function = option(function)
    return function


######################################################################
# Experiment commands
# Usage:
#   flask <command> [--config PATH] [--seed N] [--out PATH] [--format csv|json] [--jobs K]
######################################################################
@app.cli.command("error")
@experiment_options
@click.pass_context
def error_sweep(ctx, config_path, seed, out, fmt, jobs):
    """Trotter-error sweep over orders, times and step counts"""
    ctx.exit(_run("error", config_path, seed, out, fmt, jobs))


@app.cli.command("bound")
@experiment_options
@click.pass_context
def bound_report(ctx, config_path, seed, out, fmt, jobs):
    """Bound families next to the measured error"""
    ctx.exit(_run("bound", config_path, seed, out, fmt, jobs))


@app.cli.command("commutator")
@experiment_options
@click.pass_context
def commutator_table(ctx, config_path, seed, out, fmt, jobs):
    """Seminorms of every nested commutator up to an order"""
    ctx.exit(_run("commutator", config_path, seed, out, fmt, jobs))


@app.cli.command("pathcount")
@experiment_options
@click.pass_context
def pathcount_table(ctx, config_path, seed, out, fmt, jobs):
    """Degree tables and path-counting bounds"""
    ctx.exit(_run("pathcount", config_path, seed, out, fmt, jobs))


@app.cli.command("tightness")
@experiment_options
@click.option("--family", type=click.Choice(["T_first", "V_first", "sparse_T", "sparse_V"]),
              help="Lower-bound family")
@click.pass_context
def tightness_report(ctx, config_path, seed, out, fmt, jobs, family):
    """Ratio report of a lower-bound construction"""
    ctx.exit(_run("tightness", config_path, seed, out, fmt, jobs, family=family))


@app.cli.command("hamiltonian")
@experiment_options
@click.pass_context
def hamiltonian_dump(ctx, config_path, seed, out, fmt, jobs):
    """Builds and serializes a coefficient pair"""
    ctx.exit(_run("hamiltonian", config_path, seed, out, fmt, jobs))


@app.cli.command("selfcheck")
@experiment_options
@click.pass_context
def selfcheck(ctx, config_path, seed, out, fmt, jobs):
    """Runs the invariant suites"""
    ctx.exit(_run("selfcheck", config_path, seed, out, fmt, jobs))
