import logging

import click

from resetq.common.errors import ResetQError
from resetq.common.utils import error_cell, scenario_command
from resetq.mg1 import mg1_bp
from resetq.mg1.pk import mean_queue_length, queue_length_pmf

logger = logging.getLogger(__name__)

PMF_COLUMNS = ['n', 'p_analytic', 'p_sim', 'sim_ci']


@mg1_bp.cli.command('queue-pmf')
@scenario_command('csv')
@click.option('--N', 'truncation', type=click.IntRange(0), default=None,
              help='Largest n to report; chosen from the tail mass when omitted')
@click.option('--simulate', is_flag=True, help='Add time-averaged simulated probabilities')
@click.option('--replications', type=click.IntRange(1), default=None)
def queue_pmf(ctx, truncation, simulate, replications):
    """Stationary distribution of the number of jobs in the system."""
    queue = ctx.scenario.queue_spec()
    pmf = queue_length_pmf(queue, truncation, float(ctx.config['PMF_TAIL_TARGET']), ctx.rel_tol)
    logger.info(f'Mean queue length {mean_queue_length(queue, ctx.rel_tol):.6g} '
                f'({pmf.mean_truncated:.6g} up to N={pmf.N}), tail mass {pmf.tail_mass:.3g}')

    rows = [{'n': n, 'p_analytic': float(p)} for n, p in enumerate(pmf.probs)]
    if simulate:
        _add_simulated(ctx, rows, replications)
    ctx.emit_rows(rows, PMF_COLUMNS)


def _add_simulated(ctx, rows, replications):
    from resetq.simulation.engine import simulate

    cfg = ctx.scenario.sim_config(int(ctx.config['DEFAULT_SEED']),
                                  replications or int(ctx.config['SIM_REPLICATIONS']), ctx.seed)
    try:
        stats = simulate(cfg, ctx.mapper)
    except ResetQError as e:
        logger.warning(f'Simulation failed: {e.name}: {e.message}')
        for row in rows:
            row['p_sim'] = error_cell(e)
        return

    histogram, half_width = stats.queue_length_histogram, stats.histogram_half_width
    for row in rows:
        n = row['n']
        inside = n < histogram.size
        row['p_sim'] = float(histogram[n]) if inside else 0.0
        row['sim_ci'] = float(half_width[n]) if inside else 0.0
