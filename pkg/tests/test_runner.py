import json
import os

import pytest

from tstat.exceptions import ValidationError
from tstat.manifest import ExperimentManifest
from tstat.runner import ExperimentRunner, run_manifest
from tstat.utils import csv_body, read_table

SMALL_GRID = {'min': -4, 'max': 4, 'step': 0.05}


def manifest_dict(**overrides):
    data = {
        'schema_version': 1,
        'distributions': [{'name': 'rademacher', 'params': {}}],
        'n_list': [6, 8],
        'alpha': 0.25,
        'replicates': 2000,
        'seed': 7,
        'variant': 'divisor_n',
        'grid': dict(SMALL_GRID),
        'x0': 2.0,
        'x1': 0.0,
        'steps': ['functionals', 'curves', 'rates'],
    }
    data.update(overrides)
    return data


# -- manifest ------------------------------------------------------------------------

def test_manifest_round_trip():
    manifest = ExperimentManifest.from_dict(manifest_dict())
    again = ExperimentManifest.from_dict(json.loads(manifest.to_json()))
    assert again.to_dict() == manifest.to_dict()
    assert again.digest() == manifest.digest()


def test_single_distribution_key():
    data = manifest_dict(distribution={'name': 'uniform', 'params': {'scale': 2.0}})
    del data['distributions']
    manifest = ExperimentManifest.from_dict(data)
    assert manifest.distributions == [{'name': 'uniform', 'params': {'scale': 2.0}}]
    assert manifest.build_distributions()[0].scale == 2.0


def test_manifest_loads_from_file(tmp_path):
    path = tmp_path / 'm.json'
    path.write_text(json.dumps(manifest_dict()))
    assert ExperimentManifest.load(str(path)).n_list == [6, 8]


def test_shipped_manifests_are_valid():
    root = os.path.join(os.path.dirname(__file__), '..', 'manifests')
    for name in ('default_suite.json', 'rademacher_exact.json'):
        manifest = ExperimentManifest.load(os.path.join(root, name))
        assert manifest.seed is not None
    suite = ExperimentManifest.load(os.path.join(root, 'default_suite.json'))
    assert len(suite.build_distributions()) == 7


@pytest.mark.parametrize('overrides, field', [
    ({'distributions': [{'name': 'cauchy'}]}, 'distributions[0].name'),
    ({'distributions': [{'name': 'uniform', 'params': {'width': 2}}]}, 'distributions[0].params.width'),
    ({'n_list': [6, 1]}, 'n_list[1]'),
    ({'n_list': []}, 'n_list'),
    ({'alpha': 0.0}, 'alpha'),
    ({'seed': None}, 'seed'),
    ({'seed': -3}, 'seed'),
    ({'variant': 'jackknife'}, 'variant'),
    ({'grid': {'min': 1, 'max': -1, 'step': 0.1}}, 'grid.min'),
    ({'grid': {'min': -1, 'max': 1}}, 'grid.step'),
    ({'x0': 1.5}, 'x0'),
    ({'x1': -2.0}, 'x1'),
    ({'steps': ['plots']}, 'steps'),
    ({'schema_version': 2}, 'schema_version'),
    ({'colour': 'red'}, 'colour'),
])
def test_manifest_validation_names_the_field(overrides, field):
    with pytest.raises(ValidationError) as err:
        ExperimentManifest.from_dict(manifest_dict(**overrides))
    assert err.value.field == field


def test_seed_optional_without_monte_carlo():
    manifest = ExperimentManifest.from_dict(manifest_dict(seed=None, steps=['functionals']))
    assert manifest.seed is None


def test_missing_file():
    with pytest.raises(ValidationError) as err:
        ExperimentManifest.load('/nonexistent/manifest.json')
    assert err.value.field == 'manifest'


# -- runner --------------------------------------------------------------------------

def test_run_writes_every_output(tmp_path):
    code, paths = run_manifest(manifest_dict(), str(tmp_path))
    assert code == 0
    names = sorted(os.path.basename(p) for p in paths)
    assert names == ['rademacher_curves.csv', 'rademacher_functionals.csv', 'rademacher_rates.csv',
                     'summary.json']
    meta, frame = read_table(str(tmp_path / 'rademacher_rates.csv'))
    assert meta['kind'] == 'rates'
    assert meta['seed'] == 7
    assert meta['manifest_hash'] == ExperimentManifest.from_dict(manifest_dict()).digest()
    assert list(frame['n']) == [6, 8]
    with open(tmp_path / 'summary.json') as f:
        summary = json.load(f)
    assert summary['status'] == 'success'
    assert summary['suite_min_ratio_3pt'] > 0


def test_curves_file_is_long_format(tmp_path):
    run_manifest(manifest_dict(steps=['curves'], n_list=[6]), str(tmp_path))
    _, frame = read_table(str(tmp_path / 'rademacher_curves.csv'))
    assert list(frame.columns) == ['term', 'n', 'alpha', 'x', 'value']
    assert set(frame['term']) == {'L_n', 'M_n1', 'M_n2', 'Q_n1', 'L_n1', 'L_n2', 'edgeworth_student',
                                  'edgeworth_plain'}


def test_rerun_reproduces_csv_bodies(tmp_path):
    data = manifest_dict(distributions=[{'name': 'three_point', 'params': {}}, {'name': 'uniform', 'params': {}}],
                         n_list=[10])
    first, second = tmp_path / 'a', tmp_path / 'b'
    assert run_manifest(data, str(first))[0] == 0
    assert run_manifest(data, str(second))[0] == 0
    for name in ('three_point_functionals.csv', 'three_point_curves.csv', 'three_point_rates.csv',
                 'uniform_functionals.csv', 'uniform_curves.csv', 'uniform_rates.csv'):
        assert csv_body(str(first / name)) == csv_body(str(second / name))


def test_thread_count_does_not_change_outputs(tmp_path):
    data = manifest_dict(distributions=[{'name': 'uniform', 'params': {}}], n_list=[20], steps=['rates'])
    run_manifest(data, str(tmp_path / 'one'), threads=1)
    run_manifest(data, str(tmp_path / 'four'), threads=4)
    assert csv_body(str(tmp_path / 'one' / 'uniform_rates.csv')) == \
        csv_body(str(tmp_path / 'four' / 'uniform_rates.csv'))


def test_unknown_distribution_exits_1(tmp_path, capsys):
    code, paths = run_manifest(manifest_dict(distributions=[{'name': 'cauchy'}]), str(tmp_path))
    assert code == 1 and paths == []
    record = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert record['field'] == 'distributions[0].name'
    assert record['exit_code'] == 1
    assert (tmp_path / 'error.json').exists()


def test_numerical_failure_exits_2(tmp_path, capsys):
    # b_n does not exist for the uniform law at n = 2
    data = manifest_dict(distributions=[{'name': 'uniform', 'params': {}}], n_list=[2], steps=['functionals'])
    code, _ = run_manifest(data, str(tmp_path))
    assert code == 2
    record = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert record['error'] == 'NumericalError'


def test_output_directory_from_manifest(tmp_path):
    data = manifest_dict(steps=['functionals'], outputs={'directory': str(tmp_path / 'from_manifest')})
    runner = ExperimentRunner(ExperimentManifest.from_dict(data))
    runner.run()
    assert (tmp_path / 'from_manifest' / 'rademacher_functionals.csv').exists()


@pytest.mark.slow
def test_default_suite_end_to_end(tmp_path):
    root = os.path.join(os.path.dirname(__file__), '..', 'manifests', 'default_suite.json')
    manifest = ExperimentManifest.load(root)
    manifest.replicates = 20000
    manifest.n_list = [100, 1000]
    code, paths = run_manifest(manifest, str(tmp_path))
    assert code == 0
    assert len(paths) == 3 * 7 + 1
