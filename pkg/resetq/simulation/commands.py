import logging

import click

from resetq.common.normalizer import to_json
from resetq.common.utils import scenario_command
from resetq.simulation import simulation_bp
from resetq.simulation.engine import simulate
from resetq.simulation.stats import SCALAR_QUANTITIES, compare

logger = logging.getLogger(__name__)

STATS_COLUMNS = ['quantity', 'mean', 'half_width', 'n']
COMPARISON_COLUMNS = ['quantity', 'analytic', 'simulated', 'half_width', 'z_score', 'passed']


def analytic_counterparts(scenario, rel_tol):
    """Analytic values of the simulated quantities that have closed forms for this scenario."""
    from resetq.analytics.models import POLICY_NONE, POLICY_POISSON
    from resetq.analytics.service import mean_under
    from resetq.mg1.pk import mean_queue_length, mean_sojourn, queue_length_pmf

    values = {'mean_service': mean_under(scenario.model, scenario.policy, rel_tol)}
    if scenario.policy.kind == POLICY_NONE:
        values['attempts_per_job'] = 1.0
    if scenario.arrival.kind == 'poisson' and scenario.policy.kind in (POLICY_NONE, POLICY_POISSON):
        queue = scenario.queue_spec()
        values['mean_queue_length'] = mean_queue_length(queue, rel_tol)
        values['mean_sojourn'] = mean_sojourn(queue, rel_tol)
        values['queue_length_pmf'] = queue_length_pmf(queue, rel_tol=rel_tol).probs
    return values


@simulation_bp.cli.command('simulate')
@scenario_command('json')
@click.option('--replications', type=click.IntRange(1), default=None)
@click.option('--compare', 'with_comparison', is_flag=True,
              help='Check analytic values against the simulated confidence intervals')
def simulate_command(ctx, replications, with_comparison):
    """Discrete-event simulation of the queue described by the scenario."""
    cfg = ctx.scenario.sim_config(int(ctx.config['DEFAULT_SEED']),
                                  replications or int(ctx.config['SIM_REPLICATIONS']), ctx.seed)
    stats = simulate(cfg, ctx.mapper)
    logger.info(f'Simulated {stats.jobs_observed} jobs in {stats.replications} replications')

    report = None
    if with_comparison:
        report = compare(stats, analytic_counterparts(ctx.scenario, ctx.rel_tol))
        if report.chi_square is not None:
            logger.info(f'Queue-length chi-square {report.chi_square.statistic:.4g} '
                        f'on {report.chi_square.dof} levels, p = {report.chi_square.p_value:.3g}')

    if ctx.fmt == 'csv':
        if report is not None:
            ctx.emit_rows([row.to_dict() for row in report.rows], COMPARISON_COLUMNS)
        else:
            rows = [dict(getattr(stats, name).to_dict(), quantity=name) for name in SCALAR_QUANTITIES]
            ctx.emit_rows(rows, STATS_COLUMNS)
        return

    document = {'config': cfg.to_dict(), 'stats': stats.to_dict()}
    if report is not None:
        document['comparison'] = report.to_dict()
    ctx.emit(to_json(document))
