import logging
from dataclasses import dataclass
from functools import wraps

import click
from flask import current_app

from resetq.common.errors import handle_error
from resetq.common.normalizer import render, to_json
from resetq.distributions.rng import MAX_SEED
from resetq.extensions import pool

logger = logging.getLogger(__name__)


@dataclass
class CommandContext:
    """What every scenario command receives: the parsed scenario plus output settings."""
    scenario: object
    out: str
    seed: int
    fmt: str

    @property
    def config(self):
        return current_app.config

    @property
    def rel_tol(self) -> float:
        return float(self.config['QUAD_REL_TOL'])

    @property
    def mapper(self):
        return pool.map

    def effective_seed(self) -> int:
        if self.seed is not None:
            return self.seed
        return int(self.scenario.sim.get('seed', self.config['DEFAULT_SEED']))

    def emit(self, text: str):
        write_output(text, self.out)

    def emit_rows(self, rows, header):
        self.emit(render(rows, header, self.fmt))


def write_output(text: str, out: str = None):
    if out:
        with open(out, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
        logger.info(f'Wrote {out}')
    else:
        click.echo(text, nl=False)


def error_cell(error: Exception) -> str:
    return getattr(error, 'name', type(error).__name__)


def scenario_command(default_format: str):
    """
    Shared options of every subcommand: --scenario, --out, --seed, --format
    and --print-config. Domain errors are reported on stderr and mapped to
    the process exit code.
    """
    def decorator(fn):
        @wraps(fn)
        def wrapper(scenario_ref, out, seed, fmt, print_config, **kwargs):
            from resetq.scenarios.schema import load_scenario

            try:
                scenario = load_scenario(scenario_ref)
                if print_config:
                    write_output(to_json(scenario.to_dict()), out)
                    return
                fn(CommandContext(scenario, out, seed, fmt), **kwargs)
            except click.ClickException:
                raise
            except Exception as e:
                raise SystemExit(handle_error(e))

        options = [
            click.option('--scenario', 'scenario_ref', required=True,
                         help='Scenario file (JSON or YAML) or bundled:NAME. Times are in seconds, '
                              'except bundled:web_page which is in milliseconds'),
            click.option('--out', type=click.Path(dir_okay=False), default=None,
                         help='Write the result to this file instead of stdout'),
            click.option('--seed', type=click.IntRange(0, MAX_SEED), default=None,
                         help='Master seed for simulations'),
            click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default=default_format,
                         show_default=True),
            click.option('--print-config', is_flag=True, help='Echo the parsed scenario and exit'),
        ]
        for option in reversed(options):
            wrapper = option(wrapper)
        return wrapper

    return decorator


def parse_grid(text: str, allow_zero: bool = False):
    """Comma-separated strictly ascending grid of non-negative numbers."""
    try:
        values = [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise click.BadParameter(f'grid must be comma-separated numbers, got {text!r}')
    if not values:
        raise click.BadParameter('grid is empty')
    for value in values:
        if value < 0.0 or (value == 0.0 and not allow_zero):
            raise click.BadParameter(f'grid values must be positive, got {value:g}')
    if any(b <= a for a, b in zip(values, values[1:])):
        raise click.BadParameter('grid must be strictly ascending')
    return values
