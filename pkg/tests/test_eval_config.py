import json

import pytest

from utils.errors import ConfigError, UsageError
from utils.eval_config import (
    DEFAULT_PARAMS,
    get_file_safe_name,
    get_max_workers,
    get_strategy_config,
    load_params_file,
    resolve_strategy_name,
    run_label,
)


@pytest.mark.parametrize('alias, name', [
    ('shuffle', 'random'),
    ('max-utility', 'maxutil'),
    ('fair', 'controller'),
    ('controller', 'controller'),
])
def test_aliases(alias, name):
    assert resolve_strategy_name(alias) == name


def test_unknown_strategy():
    with pytest.raises(ValueError, match='oracle'):
        get_strategy_config('oracle')


def test_run_labels():
    assert run_label('controller', 0.25) == 'controller-0.25'
    assert run_label('random', 0.25) == 'random'
    assert get_file_safe_name('controller-0.25') == 'controller-0-25'


def test_worker_count(monkeypatch):
    monkeypatch.delenv('FAIRRANK_THREADS', raising=False)
    assert get_max_workers() == 4
    monkeypatch.setenv('FAIRRANK_THREADS', '2')
    assert get_max_workers() == 2
    monkeypatch.setenv('FAIRRANK_THREADS', 'zero')
    with pytest.raises(UsageError):
        get_max_workers()


def test_params_file_overrides(tmp_path):
    path = tmp_path / 'params.json'
    path.write_text(json.dumps({'gamma': 0.8}))
    params = load_params_file(str(path))
    assert params['gamma'] == 0.8
    assert params['stop_coefficient'] == DEFAULT_PARAMS['stop_coefficient']
    assert load_params_file(None) == DEFAULT_PARAMS


def test_params_file_unknown_key(tmp_path):
    path = tmp_path / 'params.json'
    path.write_text(json.dumps({'gama': 0.8}))
    with pytest.raises(UsageError, match='gama'):
        load_params_file(str(path))


@pytest.mark.parametrize('overrides', [
    {'seed': 'x'},
    {'seed': 1.5},
    {'n_sequences': True},
    {'gamma': '0.5'},
    {'lambda': None},
    {'amortization': 1},
    {'strategy': ['random']},
])
def test_params_file_wrong_type(tmp_path, overrides):
    path = tmp_path / 'params.json'
    path.write_text(json.dumps(overrides))
    key = next(iter(overrides))
    with pytest.raises(ConfigError, match=key):
        load_params_file(str(path))


def test_params_file_accepts_integers_for_numbers(tmp_path):
    path = tmp_path / 'params.json'
    path.write_text(json.dumps({'gamma': 0, 'lambda': 1, 'seed': 7, 'strategy': 'random'}))
    params = load_params_file(str(path))
    assert (params['gamma'], params['lambda'], params['seed']) == (0, 1, 7)


def test_params_file_not_an_object(tmp_path):
    path = tmp_path / 'params.json'
    path.write_text('[0.5]')
    with pytest.raises(ConfigError):
        load_params_file(str(path))


def test_config_error_is_a_usage_error():
    assert issubclass(ConfigError, UsageError)
    assert ConfigError('bad').exit_code == 1
