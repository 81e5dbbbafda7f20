import re
from pathlib import Path

import pytest

from PyNav.Cli import EXIT_ERROR, EXIT_FAILED_GOALS, EXIT_OK, main, parser
from PyNav.Geometry import DriveCommand, Pose2D
from PyNav.GridFile import write_grid
from PyNav.RunLog import RunLog, StepRecord, compute_metrics

SCENARIOS = Path(__file__).resolve().parent.parent / 'scenarios'


# reference_room.ini with its mission lines replaced.
def _scenario_file(tmp_path, mapping, goals):
    text = (SCENARIOS / 'reference_room.ini').read_text()
    text = re.sub(r'(?m)^mapping = .*$', 'mapping = ' + mapping, text)
    text = re.sub(r'(?m)^goals = .*$', 'goals = ' + goals, text)
    path = tmp_path / 'scenario.ini'
    path.write_text(text)
    return str(path)


def _log_file(tmp_path):
    log = RunLog()
    for k in range(4):
        pose = Pose2D(0.5 * k, 1.0, 0.0)
        log.add_step(StepRecord(0.05 * (k + 1), pose, pose, pose, DriveCommand(0.5, 0.0), 0.3))
    path = tmp_path / 'run.csv'
    log.write(path)
    return log, str(path)


def test_subcommands_need_their_files():
    with pytest.raises(SystemExit):
        parser().parse_args(['navigate', '--scenario', 'a.ini'])
    args = parser().parse_args(['map', '--scenario', 'a.ini', '--out', 'm.grid'])
    assert args.every == 10 and args.seed is None


def test_metrics_prints_the_summary(tmp_path, capsys):
    log, path = _log_file(tmp_path)
    assert main(['metrics', '--log', path]) == EXIT_OK
    assert capsys.readouterr().out.splitlines() == compute_metrics(log).lines()


def test_metrics_of_an_empty_log(tmp_path, capsys):
    path = tmp_path / 'empty.csv'
    RunLog().write(path)
    assert main(['metrics', '--log', str(path)]) == EXIT_ERROR
    assert 'pynav:' in capsys.readouterr().err


def test_missing_map_is_an_error(tmp_path):
    scenario = _scenario_file(tmp_path, '0.5 0 1', '3 2 0')
    code = main(['navigate', '--scenario', scenario, '--map', str(tmp_path / 'none.grid'), '--out', str(tmp_path / 'log.csv')])
    assert code == EXIT_ERROR


def test_missing_scenario_is_an_error(tmp_path):
    assert main(['map', '--scenario', str(tmp_path / 'none.ini'), '--out', str(tmp_path / 'm.grid')]) == EXIT_ERROR


def test_failed_goal_exit_code(tmp_path, room_grid, capsys):
    scenario = _scenario_file(tmp_path, '0.5 0 1', '4.2 4.5 0')
    map_path = tmp_path / 'room.grid'
    write_grid(map_path, room_grid)
    log_path = tmp_path / 'log.csv'

    code = main(['navigate', '--scenario', scenario, '--map', str(map_path), '--out', str(log_path), '--seed', '3'])
    assert code == EXIT_FAILED_GOALS
    out = capsys.readouterr().out
    assert 'failed: no path' in out
    assert '0 of 1 goals reached' in out
    assert RunLog.read(log_path).goals[0].reason == 'no path'


def test_map_writes_the_map(tmp_path):
    scenario = _scenario_file(tmp_path, '0.5 0 1', '3 2 0')
    out = tmp_path / 'm.grid'
    assert main(['map', '--scenario', scenario, '--out', str(out)]) == EXIT_OK
    assert out.read_text().startswith('NAVGRID 1 occupancy\n')
    assert Path(str(out) + '.trajectory.csv').exists()


@pytest.mark.slow
def test_run_is_deterministic(tmp_path):
    scenario = _scenario_file(tmp_path, '0.5 0 4; 0.5 0.4 2.25', '3.5 2 0')
    outputs = []
    for name in ('a', 'b'):
        map_path = tmp_path / (name + '.grid')
        log_path = tmp_path / (name + '.csv')
        code = main(['run', '--scenario', scenario, '--map', str(map_path), '--out', str(log_path)])
        assert code == EXIT_OK
        outputs.append((map_path.read_bytes(), log_path.read_bytes()))
    assert outputs[0] == outputs[1]


@pytest.mark.slow
def test_render_writes_frames(tmp_path):
    scenario = _scenario_file(tmp_path, '0.5 0 1', '3 2 0')
    render = tmp_path / 'frames'
    code = main(['map', '--scenario', scenario, '--out', str(tmp_path / 'm.grid'), '--render', str(render), '--every', '5'])
    assert code == EXIT_OK
    assert len(list((render / 'mapping').glob('*.svg'))) == 5


def test_metrics_of_a_malformed_log(tmp_path, capsys):
    _, path = _log_file(tmp_path)
    with open(path, 'a') as handle:
        handle.write('0.3,1,2,not-a-number\n')
    assert main(['metrics', '--log', path]) == EXIT_ERROR
    assert 'pynav:' in capsys.readouterr().err
