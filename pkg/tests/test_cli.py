import json

import pytest

from resetq.scenarios.schema import load_scenario, parse_scenario


def invoke(runner, *args):
    return runner.invoke(args=list(args))


def test_condition_report(runner):
    result = invoke(runner, 'condition', '--scenario', 'bundled:ig_multiplicative')
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report['beneficial'] is True
    assert report['condition_rhs'] == 1.0


def test_condition_sweep(runner):
    result = invoke(runner, 'condition', '--scenario', 'bundled:ig_multiplicative',
                    '--sweep', 'slowdown.shape=1.4,1.6', '--format', 'csv')
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[0] == 'slowdown.shape,beneficial,slope_at_zero,condition_lhs,condition_rhs,mean_no_reset'
    assert lines[1].startswith('1.4,true,')
    assert lines[2].startswith('1.6,false,')


def test_condition_sweep_keeps_mean(runner):
    result = invoke(runner, 'condition', '--scenario', 'bundled:gamma_additive',
                    '--sweep', 'slowdown.shape=0.17,0.2', '--keep-mean')
    assert result.exit_code == 0, result.output
    rows = json.loads(result.output)
    assert [row['beneficial'] for row in rows] == [True, False]
    assert rows[0]['mean_no_reset'] == pytest.approx(0.5 + 2.0 / 3.0)


def test_condition_sweep_unknown_parameter(runner):
    result = invoke(runner, 'condition', '--scenario', 'bundled:mm1', '--sweep', 'slowdown.shape=1,2')
    assert result.exit_code == 2
    assert 'ValidationError' in result.output


def test_mean_curve(runner):
    result = invoke(runner, 'mean-curve', '--scenario', 'bundled:gamma_additive', '--grid', '0,0.2424,1')
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[0] == 'param_value,mean_analytic,mean_sim,sim_ci'
    assert lines[1] == '0,1.16666666667,,'
    values = [float(line.split(',')[1]) for line in lines[1:]]
    assert values[1] < values[0] and values[1] < values[2]


def test_mean_curve_error_cells(runner):
    # periods not above the job size never complete in the additive model
    result = invoke(runner, 'mean-curve', '--scenario', 'bundled:gamma_additive', '--param', 'period',
                    '--grid', '0.5,2')
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[1] == '0.5,NonCompleting,,'
    assert float(lines[2].split(',')[1]) > 0.0


def test_mean_curve_overflowing_rate(runner):
    result = invoke(runner, 'mean-curve', '--scenario', 'bundled:gamma_additive', '--grid', '0.2424,2000')
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert float(lines[1].split(',')[1]) > 0.0
    assert lines[2] == '2000,NonFinite,,'


def test_scenario_help_names_time_units(runner):
    result = invoke(runner, 'mean-curve', '--help')
    assert result.exit_code == 0, result.output
    assert 'milliseconds' in result.output


def test_mean_curve_with_simulation(runner):
    result = invoke(runner, 'mean-curve', '--scenario', 'bundled:ig_multiplicative', '--grid', '1.372',
                    '--simulate', '--draws', '20000', '--format', 'json')
    assert result.exit_code == 0, result.output
    [row] = json.loads(result.output)
    assert abs(row['mean_sim'] - row['mean_analytic']) < 4.0 * row['sim_ci']


@pytest.mark.parametrize('grid', ['', '1,0.5', '0.1,abc'])
def test_mean_curve_bad_grid(runner, grid):
    result = invoke(runner, 'mean-curve', '--scenario', 'bundled:mm1', '--grid', grid)
    assert result.exit_code == 2


def test_optimize(runner):
    result = invoke(runner, 'optimize', '--scenario', 'bundled:ig_multiplicative', '--policy', 'poisson')
    assert result.exit_code == 0, result.output
    document = json.loads(result.output)
    assert document['poisson']['optimum'] == pytest.approx(1.372, rel=1e-2)
    assert document['beneficial'] is True
    assert 'sharp' not in document


def test_optimize_without_benefit(runner):
    result = invoke(runner, 'optimize', '--scenario', 'bundled:mm1')
    assert result.exit_code == 0, result.output
    document = json.loads(result.output)
    assert document['poisson']['optimum'] == 0.0
    assert document['poisson']['note']
    assert document['sharp']['optimum'] == 'inf'


def test_queue_pmf_geometric(runner):
    result = invoke(runner, 'queue-pmf', '--scenario', 'bundled:mm1', '--N', '3')
    assert result.exit_code == 0, result.output
    assert result.output.splitlines() == [
        'n,p_analytic,p_sim,sim_ci',
        '0,0.5,,',
        '1,0.25,,',
        '2,0.125,,',
        '3,0.0625,,',
    ]


def test_queue_pmf_unstable(runner, tmp_path):
    document = load_scenario('bundled:mm1').to_dict()
    document['arrival']['rate'] = 1.5
    path = tmp_path / 'unstable.json'
    path.write_text(json.dumps(document))
    result = invoke(runner, 'queue-pmf', '--scenario', str(path))
    assert result.exit_code == 3
    assert 'Unstable' in result.output


def test_simulate_is_deterministic(runner, tmp_path):
    args = ['simulate', '--scenario', 'bundled:mm1', '--replications', '2', '--seed', '123']
    first = invoke(runner, *args, '--out', str(tmp_path / 'a.json'))
    second = invoke(runner, *args, '--out', str(tmp_path / 'b.json'))
    assert first.exit_code == 0 and second.exit_code == 0
    assert (tmp_path / 'a.json').read_bytes() == (tmp_path / 'b.json').read_bytes()
    document = json.loads((tmp_path / 'a.json').read_text())
    assert document['config']['seed'] == 123
    assert document['stats']['attempts_per_job']['mean'] == 1.0


def test_simulate_compare_csv(runner):
    result = invoke(runner, 'simulate', '--scenario', 'bundled:mm1', '--replications', '3', '--compare',
                    '--format', 'csv')
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[0] == 'quantity,analytic,simulated,half_width,z_score,passed'
    assert any(line.startswith('mean_queue_length,1,') for line in lines)
    assert any(line.startswith('P_L(0),0.5,') for line in lines)


def test_print_config_round_trip(runner):
    result = invoke(runner, 'optimize', '--scenario', 'bundled:web_page', '--print-config')
    assert result.exit_code == 0, result.output
    assert parse_scenario(result.output).to_dict() == load_scenario('bundled:web_page').to_dict()


def test_missing_scenario(runner, tmp_path):
    result = invoke(runner, 'condition', '--scenario', str(tmp_path / 'absent.yaml'))
    assert result.exit_code == 2
    assert 'ValidationError' in result.output


def test_seed_range(runner):
    result = invoke(runner, 'simulate', '--scenario', 'bundled:mm1', '--seed', str(2 ** 64))
    assert result.exit_code == 2
