import logging

import click

from resetq.analytics import analytics_bp
from resetq.analytics.benefit import benefit_diagnosis
from resetq.analytics.models import ResetPolicy
from resetq.analytics.optimize import optimal_poisson_rate, optimal_sharp_period
from resetq.analytics.service import mean_under
from resetq.common.errors import ResetQError, ValidationError
from resetq.common.normalizer import report_rows, to_json
from resetq.common.utils import error_cell, parse_grid, scenario_command

logger = logging.getLogger(__name__)

CURVE_COLUMNS = ['param_value', 'mean_analytic', 'mean_sim', 'sim_ci']
CONDITION_COLUMNS = ['beneficial', 'slope_at_zero', 'condition_lhs', 'condition_rhs', 'mean_no_reset']
OPTIMUM_COLUMNS = ['policy', 'parameter', 'optimum', 'mean', 'mean_no_reset', 'monotone', 'note']
MAX_SWEEPS = 2


def _policy_for(param: str, value: float) -> ResetPolicy:
    if param == 'rate':
        return ResetPolicy.poisson(value) if value > 0.0 else ResetPolicy.none()
    return ResetPolicy.sharp(value)


@analytics_bp.cli.command('mean-curve')
@scenario_command('csv')
@click.option('--param', type=click.Choice(['rate', 'period']), default='rate', show_default=True,
              help='Poisson resetting rate or sharp resetting period')
@click.option('--grid', required=True, help='Comma-separated ascending values, e.g. 0,0.1,0.2')
@click.option('--simulate', is_flag=True, help='Add simulated means with 95% confidence half-widths')
@click.option('--draws', type=click.IntRange(20), default=None, help='Jobs per simulated row')
def mean_curve(ctx, param, grid, simulate, draws):
    """Mean service time along a grid of resetting rates or periods."""
    values = parse_grid(grid, allow_zero=(param == 'rate'))
    model = ctx.scenario.model
    rel_tol = ctx.rel_tol
    seed = ctx.effective_seed()
    draws = draws or int(ctx.config['SIM_SERVICE_DRAWS'])

    def row(item):
        index, value = item
        rv = {'param_value': value}
        try:
            policy = _policy_for(param, value)
            rv['mean_analytic'] = mean_under(model, policy, rel_tol)
        except ResetQError as e:
            logger.warning(f'{param}={value:g}: {e.name}: {e.message}')
            rv['mean_analytic'] = error_cell(e)
            policy = None
        if simulate and policy is not None:
            rv.update(_simulated_mean(model, policy, seed, index, draws))
        return rv

    rows = ctx.mapper(row, list(enumerate(values)))
    logger.info(f'Mean curve over {len(values)} {param} values done')
    ctx.emit_rows(rows, CURVE_COLUMNS)


def _simulated_mean(model, policy, seed, index, draws):
    from resetq.distributions import RngStream
    from resetq.simulation.engine import estimate_service

    try:
        service, _ = estimate_service(model, policy, RngStream(seed, index), draws)
    except ResetQError as e:
        logger.warning(f'Simulation of row {index} failed: {e.message}')
        return {'mean_sim': error_cell(e)}
    return {'mean_sim': service.mean, 'sim_ci': service.half_width}


def _parse_sweep(text: str):
    path, sep, values = text.partition('=')
    if not sep:
        raise click.BadParameter(f'sweep must look like PATH=v1,v2,..., got {text!r}')
    return path.strip(), parse_grid(values)


@analytics_bp.cli.command('condition')
@scenario_command('json')
@click.option('--sweep', 'sweeps', multiple=True,
              help='PATH=v1,v2,... with PATH like slowdown.shape; at most two')
@click.option('--keep-mean', is_flag=True, help='Rescale swept laws back to their original mean')
def condition(ctx, sweeps, keep_mean):
    """Whether a small amount of resetting lowers the mean service time."""
    model = ctx.scenario.model
    if not sweeps:
        report = benefit_diagnosis(model)
        if ctx.fmt == 'json':
            ctx.emit(to_json(report.to_dict()))
        else:
            ctx.emit_rows(report_rows(report.to_dict()), ['quantity', 'value'])
        return

    if len(sweeps) > MAX_SWEEPS:
        raise click.BadParameter(f'at most {MAX_SWEEPS} --sweep options')
    axes = [_parse_sweep(text) for text in sweeps]
    if len({path for path, _ in axes}) != len(axes):
        raise click.BadParameter('each --sweep must name a different parameter')

    points = [{}]
    for path, values in axes:
        points = [dict(point, **{path: value}) for point in points for value in values]

    def row(point):
        swept = model
        for path, value in point.items():
            swept = swept.with_parameter(path, value, keep_mean)
        report = benefit_diagnosis(swept).to_dict()
        return dict(point, **{name: report[name] for name in CONDITION_COLUMNS})

    rows = ctx.mapper(row, points)
    beneficial = sum(1 for r in rows if r['beneficial'])
    logger.info(f'Condition sweep: {beneficial} of {len(rows)} points benefit from resetting')
    ctx.emit_rows(rows, [path for path, _ in axes] + CONDITION_COLUMNS)


@analytics_bp.cli.command('optimize')
@scenario_command('json')
@click.option('--policy', 'which', type=click.Choice(['poisson', 'sharp', 'both']), default='both',
              show_default=True)
@click.option('--tol', type=float, default=1e-6, show_default=True,
              help='Relative tolerance of the optimal parameter')
def optimize(ctx, which, tol):
    """Optimal Poisson resetting rate and/or sharp resetting period."""
    if not tol > 0.0:
        raise ValidationError(f'--tol must be positive, got {tol}')
    model = ctx.scenario.model
    searches = {'poisson': optimal_poisson_rate, 'sharp': optimal_sharp_period}
    names = ['poisson', 'sharp'] if which == 'both' else [which]

    results = {}
    for name in names:
        try:
            report = searches[name](model, tol=tol, mapper=ctx.mapper, rel_tol=ctx.rel_tol)
        except ResetQError as e:
            if which != 'both':
                raise
            logger.warning(f'{name} optimization failed: {e.name}: {e.message}')
            results[name] = e.to_dict()
            continue
        results[name] = report.to_dict()

    if ctx.fmt == 'csv':
        rows = []
        for name, result in results.items():
            rows.append(dict(result, policy=name, note=result.get('note') or result.get('message', '')))
        ctx.emit_rows(rows, OPTIMUM_COLUMNS)
        return

    benefit = benefit_diagnosis(model)
    document = {'mean_no_reset': benefit.mean_no_reset, 'beneficial': benefit.beneficial}
    document.update(results)
    ctx.emit(to_json(document))
