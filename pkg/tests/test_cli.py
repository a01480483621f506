import json
from unittest.mock import patch

import numpy as np

import main_cli
from oto_clock.acceptance import CheckResult


def test_run_with_preset_writes_csv(tmp_path, capsys):
    out = tmp_path / 'dimer.csv'
    status = main_cli.main(['run', '--preset', 'fig6_dimer', '--experiment', 'spectra', '--out', str(out)])
    assert status == main_cli.EXIT_OK
    assert out.exists()
    assert '✅ spectra' in capsys.readouterr().out


def test_run_with_config_and_overrides(tmp_path):
    config = {
        'experiment': 'oracle',
        'model': {'preset': 'fig4_chain', 'params': {'L': 4}},
        'time': {'start': 0.0, 'stop': 1.0, 'points': 2},
    }
    path = tmp_path / 'exp.json'
    path.write_text(json.dumps(config))
    out = tmp_path / 'out.json'
    status = main_cli.main(['run', '--config', str(path), '--format', 'json', '--out', str(out), '--seed', '3'])
    assert status == main_cli.EXIT_OK
    document = json.loads(out.read_text())
    assert document['metadata']['seed'] == 3
    assert document['metadata']['experiment'] == 'oracle'


def test_invalid_config_exits_with_config_status(tmp_path, capsys):
    path = tmp_path / 'bad.json'
    path.write_text('{\n  "experiment": "oracle",\n  "bogus": 1\n}\n')
    status = main_cli.main(['run', '--config', str(path)])
    assert status == main_cli.EXIT_CONFIG
    assert f"{path}:3:3" in capsys.readouterr().out


def test_unknown_preset_is_a_config_error():
    assert main_cli.main(['run', '--preset', 'nope']) == main_cli.EXIT_CONFIG


def test_numerical_failure_exit_status(tmp_path):
    config = {
        'experiment': 'spectra',
        'model': {'kind': 'local', 'params': {'N': 2, 'g_site': [5.0], 'omega_b': 10.0, 'epsilon': 10.0}},
    }
    path = tmp_path / 'singular.json'
    path.write_text(json.dumps(config))
    assert main_cli.main(['run', '--config', str(path), '--out', str(tmp_path / 'x.csv')]) == main_cli.EXIT_NUMERICAL


def test_verify_reports_each_check(capsys):
    results = [CheckResult('a', True, 'fine'), CheckResult('b', True, 'also fine')]
    with patch.object(main_cli, 'run_acceptance', return_value=results) as mock_run:
        status = main_cli.main(['verify', '--quick'])
    assert status == main_cli.EXIT_OK
    assert mock_run.call_args.kwargs['quick'] is True
    assert 'All 2 criteria passed' in capsys.readouterr().out


def test_verify_failure_exit_status():
    results = [CheckResult('a', True, 'fine'), CheckResult('b', False, 'broken')]
    with patch.object(main_cli, 'run_acceptance', return_value=results):
        assert main_cli.main(['verify']) == main_cli.EXIT_VERIFY_FAILED


def test_presets_list_json(capsys):
    assert main_cli.main(['presets', 'list', '--json']) == main_cli.EXIT_OK
    names = {entry['name'] for entry in json.loads(capsys.readouterr().out)}
    assert names == {'fig6_dimer', 'fig7_ring', 'fig4_chain'}


def test_model_parameter_error_reports_file_position(tmp_path, capsys):
    path = tmp_path / 'bad.json'
    path.write_text('{\n  "model": {"preset": "fig6_dimer", "params": {"bogus": 1}}\n}\n')
    status = main_cli.main(['run', '--config', str(path)])
    assert status == main_cli.EXIT_CONFIG
    out = capsys.readouterr().out
    assert f"{path}:2:" in out
    assert 'bogus' in out


def test_linear_algebra_failure_exits_with_numerical_status(capsys):
    with patch.object(main_cli, 'run_experiment', side_effect=np.linalg.LinAlgError('eigh did not converge')):
        status = main_cli.main(['run', '--preset', 'fig6_dimer'])
    assert status == main_cli.EXIT_NUMERICAL
    assert 'eigh did not converge' in capsys.readouterr().out
