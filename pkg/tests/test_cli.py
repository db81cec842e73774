import json
import logging
import os

import pytest

import fair_ranking

from conftest import fixture_path


@pytest.fixture(autouse=True)
def restore_logging():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    monkeypatch.setenv('FAIRRANK_THREADS', '1')


def run_cli(*argv):
    return fair_ranking.main([str(a) for a in argv])


def fixture_data_flags():
    return ['--queries', fixture_path('queries.jsonl'), '--corpus', fixture_path('corpus.jsonl')]


def read(path):
    with open(path, 'rb') as f:
        return f.read()


class TestEvaluate:
    def test_fixture_report(self, tmp_path, golden):
        prefix = tmp_path / 'report'
        code = run_cli(
            'evaluate', fixture_path('run.jsonl'), *fixture_data_flags(),
            '--groups', fixture_path('groups.csv'), '--groups', fixture_path('single_group.csv'),
            '--out', prefix,
        )
        assert code == 0
        assert (tmp_path / 'report.csv').read_text() == (
            'run,utility,unfairness,mode,group_def\n'
            'run,0.7875000000,0.1000819319,micro,groups\n'
            'run,0.7875000000,0.0000000000,micro,single_group\n'
        )
        report = json.loads((tmp_path / 'report.json').read_text())
        first = report['results'][0]
        assert first['group_def'] == 'groups'
        assert first['unfairness'] == pytest.approx(golden['micro']['unfairness'], abs=golden['tolerance'])
        assert report['parameters']['gamma'] == 0.5

    def test_macro(self, tmp_path, golden):
        code = run_cli(
            'evaluate', fixture_path('run.jsonl'), *fixture_data_flags(),
            '--groups', fixture_path('groups.csv'), '--amortization', 'macro', '--out', tmp_path / 'macro',
        )
        assert code == 0
        report = json.loads((tmp_path / 'macro.json').read_text())
        assert report['results'][0]['unfairness'] == pytest.approx(golden['macro']['unfairness'], abs=golden['tolerance'])
        assert report['results'][0]['mode'] == 'macro'

    def test_inadmissible_run(self, tmp_path, capsys):
        code = run_cli(
            'evaluate', fixture_path('run_invalid.jsonl'), *fixture_data_flags(),
            '--groups', fixture_path('groups.csv'), '--out', tmp_path / 'report',
        )
        assert code == 3
        assert 'q_num 0.1' in capsys.readouterr().out
        assert not (tmp_path / 'report.csv').exists()

    def test_no_assigned_author_is_undefined(self, tmp_path):
        groups = tmp_path / 'nobody.csv'
        groups.write_text('author_id,group_id\nzz,g\n')
        code = run_cli(
            'evaluate', fixture_path('run.jsonl'), *fixture_data_flags(),
            '--groups', groups, '--out', tmp_path / 'report',
        )
        assert code == 4
        assert (tmp_path / 'report.csv').read_text().splitlines()[1] == 'run,0.7875000000,undefined,micro,nobody'

    def test_missing_corpus_document(self, tmp_path):
        corpus = tmp_path / 'corpus.jsonl'
        corpus.write_text('\n'.join(open(fixture_path('corpus.jsonl')).read().splitlines()[:4]) + '\n')
        code = run_cli(
            'evaluate', fixture_path('run.jsonl'), '--queries', fixture_path('queries.jsonl'), '--corpus', corpus,
            '--groups', fixture_path('groups.csv'), '--out', tmp_path / 'report',
        )
        assert code == 2

    def test_parameter_out_of_range(self, tmp_path):
        code = run_cli(
            'evaluate', fixture_path('run.jsonl'), *fixture_data_flags(),
            '--groups', fixture_path('groups.csv'), '--gamma', '1.5', '--out', tmp_path / 'report',
        )
        assert code == 1

    def test_config_file_defaults(self, tmp_path):
        config = tmp_path / 'params.json'
        config.write_text(json.dumps({'amortization': 'macro'}))
        code = run_cli(
            'evaluate', fixture_path('run.jsonl'), *fixture_data_flags(), '--config', config,
            '--groups', fixture_path('groups.csv'), '--out', tmp_path / 'report',
        )
        assert code == 0
        assert ',macro,' in (tmp_path / 'report.csv').read_text()


class TestUsage:
    def test_no_arguments(self):
        assert run_cli() == 1

    def test_tradeoff_without_runs(self, tmp_path):
        code = run_cli('tradeoff', *fixture_data_flags(), '--groups', fixture_path('groups.csv'), '--out', tmp_path / 't.csv')
        assert code == 1

    def test_unknown_strategy(self, tmp_path):
        code = run_cli(
            'rerank', *fixture_data_flags(), '--sequences', fixture_path('sequences.csv'),
            '--strategy', 'oracle', '--out', tmp_path / 'run.jsonl',
        )
        assert code == 1

    def test_controller_needs_groups(self, tmp_path):
        code = run_cli(
            'rerank', *fixture_data_flags(), '--sequences', fixture_path('sequences.csv'),
            '--strategy', 'controller', '--out', tmp_path / 'run.jsonl',
        )
        assert code == 1

    def test_unknown_config_key(self, tmp_path):
        config = tmp_path / 'params.json'
        config.write_text(json.dumps({'gama': 0.4}))
        assert run_cli('validate', fixture_path('run.jsonl'), '--queries', fixture_path('queries.jsonl'), '--config', config) == 1

    def test_wrongly_typed_config_value(self, tmp_path, capsys):
        config = tmp_path / 'params.json'
        config.write_text(json.dumps({'seed': 'x'}))
        assert run_cli('validate', fixture_path('run.jsonl'), '--queries', fixture_path('queries.jsonl'), '--config', config) == 1
        assert 'ConfigError' in capsys.readouterr().err

    def test_negative_rerank_seed(self, tmp_path, capsys):
        code = run_cli(
            'rerank', *fixture_data_flags(), '--sequences', fixture_path('sequences.csv'),
            '--strategy', 'random', '--seed', '-1', '--out', tmp_path / 'run.jsonl',
        )
        assert code == 1
        assert 'Seed must be' in capsys.readouterr().err
        assert not (tmp_path / 'run.jsonl').exists()

    def test_negative_seed_from_config(self, tmp_path):
        config = tmp_path / 'params.json'
        config.write_text(json.dumps({'seed': -3}))
        code = run_cli(
            'rerank', *fixture_data_flags(), '--sequences', fixture_path('sequences.csv'),
            '--strategy', 'random', '--config', config, '--out', tmp_path / 'run.jsonl',
        )
        assert code == 1


def help_text(capsys, *argv):
    with pytest.raises(SystemExit) as excinfo:
        run_cli(*argv, '--help')
    assert excinfo.value.code == 0
    return ' '.join(capsys.readouterr().out.split())


class TestHelp:
    def test_model_defaults_name_their_source(self, capsys):
        for command in ('evaluate', 'tradeoff', 'rerank'):
            text = help_text(capsys, command)
            assert 'default: 0.5, the TREC 2019 Fair Ranking Track evaluation setting' in text
            assert 'default: 0.7, the TREC 2019 Fair Ranking Track evaluation setting' in text

    def test_sequence_defaults_name_their_source(self, capsys):
        text = help_text(capsys, 'seqgen')
        assert 'default: 5, as in the TREC 2019 Fair Ranking Track evaluation' in text
        assert 'default: 25000, as in the TREC 2019 Fair Ranking Track evaluation' in text

    def test_lambda_is_marked_as_toolkit_choice(self, capsys):
        assert 'default: 0.5, a toolkit choice' in help_text(capsys, 'rerank')

    def test_group_thresholds_name_their_source(self, capsys):
        text = help_text(capsys, 'groups')
        assert 'default: 5 15 30, the' in text
        assert 'groups of the TREC 2019 Fair Ranking Track evaluation' in text


class TestValidate:
    def test_fixture(self, capsys):
        code = run_cli(
            'validate', fixture_path('run.jsonl'), '--queries', fixture_path('queries.jsonl'),
            '--sequences', fixture_path('sequences.csv'),
        )
        assert code == 0
        assert '✓' in capsys.readouterr().out

    def test_invalid(self):
        assert run_cli('validate', fixture_path('run_invalid.jsonl'), '--queries', fixture_path('queries.jsonl')) == 3

    def test_malformed_run(self, tmp_path):
        run = tmp_path / 'run.jsonl'
        run.write_text('{"q_num": "0.1", "qid": "q1"\n')
        assert run_cli('validate', run, '--queries', fixture_path('queries.jsonl')) == 2

    def test_non_ascii_q_num(self, tmp_path, capsys):
        run = tmp_path / 'run.jsonl'
        run.write_text(json.dumps({'q_num': '0.\u00b2', 'qid': 'q1', 'ranking': ['d1', 'd2', 'd3']}) + '\n')
        assert run_cli('validate', run, '--queries', fixture_path('queries.jsonl')) == 2
        assert f"{run}:1:" in capsys.readouterr().err


def test_seqgen_is_reproducible(tmp_path):
    for name in ('a.csv', 'b.csv'):
        code = run_cli(
            'seqgen', '--queries', fixture_path('queries.jsonl'),
            '--n-sequences', 3, '--length', 500, '--seed', 11, '--out', tmp_path / name,
        )
        assert code == 0
    assert read(tmp_path / 'a.csv') == read(tmp_path / 'b.csv')
    assert read(tmp_path / 'a.csv.meta.json') == read(tmp_path / 'b.csv.meta.json')
    lines = (tmp_path / 'a.csv').read_text().splitlines()
    assert lines[0] == 'q_num,qid'
    assert len(lines) == 1 + 3 * 500


def test_groups_from_hindex(tmp_path, capsys):
    out = tmp_path / 'groups.csv'
    assert run_cli('groups', '--stats', fixture_path('hindex.csv'), '--out', out) == 0
    assert out.read_text(encoding='utf-8').splitlines() == [
        'author_id,group_id',
        'a1,h<5',
        'a2,5≤h<15',
        'a3,5≤h<15',
        'a4,15≤h<30',
        'a5,h≥30',
        'a6,15≤h<30',
    ]
    assert 'h≥30: 1 authors' in capsys.readouterr().out


def test_groups_negative_statistic(tmp_path):
    stats = tmp_path / 'stats.csv'
    stats.write_text('author_id,h_index\nx,-2\n')
    assert run_cli('groups', '--stats', stats, '--out', tmp_path / 'groups.csv') == 3


def pipeline(workdir):
    """synth -> seqgen -> rerank (three strategies) -> validate -> evaluate -> tradeoff."""
    data = workdir / 'data'
    assert run_cli('synth', '--n-queries', 8, '--pool-size', 5, '--seed', 3, '--out-dir', data) == 0
    flags = ['--queries', data / 'queries.jsonl', '--corpus', data / 'corpus.jsonl']
    sequences = workdir / 'sequences.csv'
    assert run_cli('seqgen', '--queries', data / 'queries.jsonl', '--n-sequences', 5, '--length', 1000,
                   '--seed', 1, '--out', sequences) == 0

    runs = []
    for strategy in ('random', 'maxutil', 'controller'):
        out = workdir / 'runs' / f"{strategy}.jsonl"
        assert run_cli('rerank', *flags, '--sequences', sequences, '--strategy', strategy,
                       '--groups', data / 'groups.csv', '--seed', 5, '--out', out) == 0
        assert run_cli('validate', out, '--queries', data / 'queries.jsonl', '--sequences', sequences) == 0
        runs.append(out)

    assert run_cli('evaluate', *runs, *flags, '--groups', data / 'groups.csv', '--sequences', sequences,
                   '--out', workdir / 'evaluation') == 0
    assert run_cli('tradeoff', *runs, *flags, '--groups', data / 'groups.csv', '--out', workdir / 'tradeoff.csv') == 0
    return runs


def test_end_to_end_is_byte_stable(tmp_path):
    first = pipeline(tmp_path / 'first')
    second = pipeline(tmp_path / 'second')
    for a, b in zip(first, second):
        assert read(a) == read(b)
    for name in ('evaluation.csv', 'evaluation.json', 'tradeoff.csv'):
        assert read(tmp_path / 'first' / name) == read(tmp_path / 'second' / name)

    rows = (tmp_path / 'first' / 'tradeoff.csv').read_text().splitlines()
    assert [row.split(',')[0] for row in rows[1:]] == ['controller', 'maxutil', 'random']
    assert sum(1 for _ in open(first[0])) == 5 * 1000


def test_default_rerank_output_name(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    os.makedirs('work')
    monkeypatch.chdir(tmp_path / 'work')
    code = run_cli(
        'rerank', *fixture_data_flags(), '--sequences', fixture_path('sequences.csv'),
        '--strategy', 'controller', '--lambda', '0.5', '--groups', fixture_path('groups.csv'),
    )
    assert code == 0
    assert (tmp_path / 'results' / 'runs' / 'controller-0-5.jsonl').exists()
