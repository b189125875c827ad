import json

import pytest

from tstat.cli import build_parser, main
from tstat.utils import read_table


def last_json(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_dist_list(capsys):
    assert main(['dist', 'list']) == 0
    entries = json.loads(capsys.readouterr().out)
    assert len(entries) == 7
    assert entries[0]['name'] == 'rademacher'


def test_functionals_rademacher(capsys):
    assert main(['functionals', '--dist', 'rademacher', '--n', '100', '--alpha', '1']) == 0
    row = last_json(capsys)
    assert row['b_n'] == pytest.approx(10.0, rel=1e-12)
    assert row['delta_n'] == pytest.approx(0.01, rel=1e-10)


def test_functionals_csv(tmp_path):
    out = tmp_path / 'f.csv'
    assert main(['functionals', '--dist', 'uniform', '--n', '10', '100', '--format', 'csv', '--out', str(out)]) == 0
    meta, frame = read_table(str(out))
    assert meta['kind'] == 'functionals'
    assert list(frame['n']) == [10, 100]


def test_functionals_json_out(tmp_path, capsys):
    out = tmp_path / 'f.jsonl'
    assert main(['functionals', '--dist', 'rademacher', '--n', '16', '64', '--alpha', '1', '--out', str(out)]) == 0
    assert capsys.readouterr().out == ''
    lines = out.read_text().splitlines()
    meta = json.loads(lines[0])
    assert meta['kind'] == 'functionals'
    assert meta['dist'] == 'rademacher'
    rows = [json.loads(line) for line in lines[1:]]
    assert [row['n'] for row in rows] == [16, 64]
    assert rows[0]['b_n'] == pytest.approx(4.0, rel=1e-12)


def test_unknown_distribution(capsys):
    assert main(['functionals', '--dist', 'cauchy', '--n', '10']) == 1
    record = last_json(capsys)
    assert record['status'] == 'error'
    assert record['field'] == 'distribution'


def test_numerical_failure_exit_code(capsys):
    assert main(['functionals', '--dist', 'uniform', '--n', '2']) == 2
    assert last_json(capsys)['error'] == 'NumericalError'


def test_bad_flag_is_a_validation_error(capsys):
    assert main(['leading-term', '--dist', 'uniform', '--n', '10', '--term', 'zz']) == 1
    assert last_json(capsys)['field'] == 'argv'
    assert main(['frobnicate']) == 1


def test_oracle_out(tmp_path):
    out = tmp_path / 'oracle.csv'
    assert main(['oracle', '--dist', 'rademacher', '--n', '3', '--out', str(out)]) == 0
    meta, frame = read_table(str(out))
    assert meta['kind'] == 'oracle'
    assert meta['n'] == 3
    assert frame['probability'].sum() == pytest.approx(1.0)


def test_oracle_too_large(capsys):
    assert main(['oracle', '--dist', 'rademacher', '--n', '20']) == 1
    assert last_json(capsys)['field'] == 'n'


def test_simulate_writes_metadata(tmp_path):
    out = tmp_path / 'sim.csv'
    args = ['simulate', '--dist', 'three_point', '--n', '10', '--replicates', '2000', '--seed', '7',
            '--out', str(out)]
    assert main(args) == 0
    meta, frame = read_table(str(out))
    assert meta['seed'] == 7
    assert meta['replicates'] == 2000
    assert frame['probability'].sum() == pytest.approx(1.0)


def test_leading_term_curve(tmp_path):
    out = tmp_path / 'ln.csv'
    args = ['leading-term', '--dist', 'rademacher', '--n', '100', '--term', 'ln',
            '--grid-min', '-3', '--grid-max', '3', '--grid-step', '0.5', '--out', str(out)]
    assert main(args) == 0
    meta, frame = read_table(str(out))
    assert meta['term'] == 'L_n'
    assert list(frame.columns) == ['x', 'value']
    assert len(frame) == 13


def test_rates_summary(tmp_path):
    out, summary = tmp_path / 'r.csv', tmp_path / 'r.json'
    args = ['rates', '--dist', 'rademacher', '--n-list', '6', '8', '--seed', '1', '--replicates', '100',
            '--grid-min', '-4', '--grid-max', '4', '--grid-step', '0.05', '--out', str(out),
            '--summary', str(summary)]
    assert main(args) == 0
    _, frame = read_table(str(out))
    assert list(frame['n']) == [6, 8]
    assert json.loads(summary.read_text())['rows'] == 2


def test_run_manifest(tmp_path, capsys):
    manifest = tmp_path / 'm.json'
    manifest.write_text(json.dumps({
        'distribution': {'name': 'rademacher'},
        'n_list': [6],
        'seed': 3,
        'grid': {'min': -3, 'max': 3, 'step': 0.1},
        'steps': ['functionals', 'rates'],
    }))
    assert main(['run', str(manifest), '--output-dir', str(tmp_path / 'out')]) == 0
    result = last_json(capsys)
    assert result['status'] == 'success'
    assert (tmp_path / 'out' / 'summary.json').exists()


def test_rates_help_lists_flags(capsys):
    with pytest.raises(SystemExit) as exit_info:
        build_parser().parse_args(['rates', '--help'])
    assert exit_info.value.code == 0
    text = capsys.readouterr().out
    for flag in ('--n-list', '--replicates', '--seed', '--x0', '--x1', '--variant', '--statistic'):
        assert flag in text


def test_bad_config(monkeypatch, capsys):
    monkeypatch.setenv('TSTAT_THREADS', '0')
    assert main(['dist', 'list']) == 1
    assert last_json(capsys)['field'] == 'config'
