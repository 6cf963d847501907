import json

import numpy as np
import pandas as pd
import pytest

from berezin_lab import cli, config
from berezin_lab.cli import RunConfig, build_parser, config_from_args, main
from berezin_lab.errors import ConfigError


def test_defaults():
    cfg = config_from_args(build_parser().parse_args(['verify']))
    assert cfg.command == 'verify'
    assert cfg.n_list == config.DEFAULT_N_LIST
    assert cfg.beta == 1.0 and cfg.s == 0.3 and cfg.seed == 7 and cfg.seed_defaulted
    assert cfg.fmt == 'csv' and cfg.method == 'sweep'


def test_list_flags_are_parsed():
    cfg = config_from_args(build_parser().parse_args(['decay', '--beta-list', '1,2.5', '--n-list', '8,16']))
    assert cfg.beta_list == (1.0, 2.5)
    assert cfg.n_list == (8, 16)


@pytest.mark.parametrize('field, value', [('epsilon', 2.0), ('beta', -1.0), ('grid_u2', 32), ('samples', 0),
                                          ('l_list', (1, 2, 0))])
def test_validation_names_the_field(field, value):
    with pytest.raises(ConfigError) as info:
        RunConfig(command='decay', **{field: value}).validate()
    assert info.value.context['field'] == field


def test_invalid_flag_value_exits_with_two(tmp_path):
    assert main(['decay', '--epsilon', '2', '--out', str(tmp_path)]) == 2
    failure = json.loads((tmp_path / 'failure.json').read_text())
    assert failure['failure']['error'] == 'ConfigError'


def test_missing_model_exits_with_two(tmp_path):
    code = main(['genfunc', '--model', str(tmp_path / 'missing.json'), '--out', str(tmp_path)])
    assert code == 2
    failure = json.loads((tmp_path / 'failure.json').read_text())
    assert failure['failure']['exit_code'] == 2
    assert failure['config']['command'] == 'genfunc'


def test_coarse_grid_exits_with_one(tmp_path):
    assert main(['covariance', '--n-list', '1', '--out', str(tmp_path)]) == 1
    failure = json.loads((tmp_path / 'failure.json').read_text())
    assert failure['failure']['error'] == 'GridTooCoarse'


def test_covariance_report(tmp_path):
    assert main(['covariance', '--n-list', '4,8', '--out', str(tmp_path)]) == 0
    table = pd.read_csv(tmp_path / 'covariance.csv')
    assert list(table['n']) == [4, 8]
    assert table['passed'].all()


def test_bundled_model_by_name(tmp_path):
    assert main(['covariance', '--model', 'two_spin', '--n-list', '4,8', '--out', str(tmp_path)]) == 0
    assert pd.read_csv(tmp_path / 'covariance.csv')['passed'].all()


def test_genfunc_json_is_deterministic(tmp_path):
    argv = ['genfunc', '--n-list', '4,8', '--format', 'json', '--out', str(tmp_path)]
    assert main(argv) == 0
    first = (tmp_path / 'genfunc.json').read_bytes()
    assert main(argv) == 0
    assert (tmp_path / 'genfunc.json').read_bytes() == first
    payload = json.loads(first)
    assert [r['n'] for r in payload['records']] == [4, 8]
    assert payload['config']['command'] == 'genfunc'
    assert 'PATH_AGREEMENT_TOL' in payload['tolerances']


def test_genfunc_lattice_mode(tmp_path):
    assert main(['genfunc', '--l-list', '0,0,0', '--out', str(tmp_path)]) == 0
    table = pd.read_csv(tmp_path / 'genfunc.csv')
    assert len(table) == 5
    assert table['J'].iloc[2] == pytest.approx(0.0, abs=1e-12)


def test_pfbound_report(tmp_path):
    assert main(['pfbound', '--n-list', '4', '--samples', '50', '--out', str(tmp_path)]) == 0
    table = pd.read_csv(tmp_path / 'pfbound.csv')
    assert set(table['check']) == {'determinant', 'pfaffian', 'pfaffian-weighted', 'sharpness'}


def test_decay_report(tmp_path):
    assert main(['decay', '--beta-list', '1,2', '--out', str(tmp_path)]) == 0
    table = pd.read_csv(tmp_path / 'decay.csv')
    assert list(table['beta']) == [1.0, 2.0]
    assert table['satisfied'].all()
    assert 'projection_drift' in table.columns


def test_verify_passes_on_the_single_mode(tmp_path):
    assert main(['verify', '--beta-list', '1,2', '--out', str(tmp_path)]) == 0
    table = pd.read_csv(tmp_path / 'verify.csv')
    assert table['passed'].all()
    assert {'pfaffian_squared', 'car', 'trace_formula', 'covariance_agreement'} <= set(table['name'])
    assert {'approximant_ratio', 'combes_thomas', 'resolvent_difference', 'summability_bound',
            'fermi_exponent', 'decay_exponent', 'gapped_bound', 'gapped_uniformity'} <= set(table['name'])
    meta = json.loads((tmp_path / 'verify.meta.json').read_text())
    assert meta['metadata']['lattice_model'] == 'chain'
    assert meta['metadata']['gapped_model'] == 'pairing_chain'


def test_csv_report_has_a_meta_sidecar(tmp_path):
    assert main(['covariance', '--n-list', '4', '--out', str(tmp_path)]) == 0
    meta = json.loads((tmp_path / 'covariance.meta.json').read_text())
    assert meta['config']['command'] == 'covariance'
    assert meta['tolerances']['GRID_MARGIN'] == config.GRID_MARGIN
    assert meta['metadata']['model'] == 'single_mode'


def test_directory_as_model_exits_with_two(tmp_path):
    out = tmp_path / 'out'
    assert main(['covariance', '--model', str(tmp_path), '--out', str(out)]) == 2
    failure = json.loads((out / 'failure.json').read_text())
    assert failure['failure']['error'] == 'IsADirectoryError'
    assert failure['failure']['exit_code'] == 2


def test_unexpected_error_exits_with_one(tmp_path, monkeypatch):
    def broken(cfg, model):
        raise np.linalg.LinAlgError('Singular matrix')

    monkeypatch.setitem(cli.RUNNERS, 'covariance', broken)
    assert main(['covariance', '--out', str(tmp_path)]) == 1
    failure = json.loads((tmp_path / 'failure.json').read_text())
    assert failure['failure']['error'] == 'LinAlgError'
    assert failure['failure']['exit_code'] == 1


@pytest.mark.parametrize('argv, defaulted', [([], True), (['--seed', '3'], False)])
def test_seed_provenance_is_recorded(tmp_path, argv, defaulted):
    assert main(['pfbound', '--n-list', '4', '--samples', '50', '--out', str(tmp_path)] + argv) == 0
    meta = json.loads((tmp_path / 'pfbound.meta.json').read_text())
    assert meta['config']['seed_defaulted'] is defaulted
    assert meta['config']['seed'] == (7 if defaulted else 3)
