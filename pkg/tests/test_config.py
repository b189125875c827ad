import io
import json

import pandas as pd
import pytest

from tstat.config import Config
from tstat.utils import (csv_body, manifest_hash, metadata_line, read_table, save_error_record, setup_logging,
                         write_table)


def test_defaults_are_valid():
    config = Config()
    assert config.validate() == []
    assert config.DEFAULT_ALPHA == 0.25
    assert 'Threads' in str(config)


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv('TSTAT_THREADS', '3')
    monkeypatch.setenv('TSTAT_GRID_STEP', '0.01')
    config = Config()
    assert config.THREADS == 3
    assert config.GRID_STEP == 0.01


def test_invalid_environment(monkeypatch):
    monkeypatch.setenv('TSTAT_THREADS', '0')
    monkeypatch.setenv('TSTAT_X0', '1.5')
    monkeypatch.setenv('TSTAT_ALPHA', '2')
    errors = Config().validate()
    assert len(errors) == 3
    assert any('TSTAT_THREADS' in e for e in errors)
    assert any('TSTAT_X0' in e for e in errors)


def test_manifest_hash_ignores_key_order():
    assert manifest_hash({'a': 1, 'b': [1, 2]}) == manifest_hash({'b': [1, 2], 'a': 1})
    assert manifest_hash({'a': 1}) != manifest_hash({'a': 2})


def test_table_round_trip(tmp_path):
    frame = pd.DataFrame({'x': [0.1, 1 / 3], 'value': [-1e-17, 2.5]})
    path = tmp_path / 'nested' / 't.csv'
    write_table(str(path), frame, metadata_line('curve', 'abc', 5, term='L_n'))
    meta, back = read_table(str(path))
    assert meta['kind'] == 'curve' and meta['seed'] == 5 and meta['term'] == 'L_n'
    assert list(back["x"]) == pytest.approx([0.1, 1 / 3], rel=1e-15)
    assert list(back["value"]) == pytest.approx([-1e-17, 2.5], rel=1e-15)
    assert csv_body(str(path)).splitlines()[0] == 'x,value'


def test_write_table_to_stream():
    buffer = io.StringIO()
    write_table(buffer, pd.DataFrame({'n': [1]}), '{"kind": "test"}')
    assert buffer.getvalue() == '{"kind": "test"}\nn\n1\n'


def test_error_record(tmp_path, capsys):
    record = {'status': 'error', 'exit_code': 2, 'error': 'NumericalError', 'field': None, 'message': 'x'}
    save_error_record(record, str(tmp_path))
    assert json.loads(capsys.readouterr().out) == record
    assert json.loads((tmp_path / 'error.json').read_text()) == record


def test_setup_logging_does_not_stack_handlers():
    logger = setup_logging('tstat.test_config', log_to_file=False)
    again = setup_logging('tstat.test_config', log_to_file=False)
    assert logger is again
    assert len(logger.handlers) == 1
    assert logger.propagate is False
