import gzip
import json
import logging

import pytest

from utils.data_loaders import (
    file_label,
    load_author_statistics,
    load_corpus,
    load_groups,
    load_queries,
    missing_pool_documents,
    write_corpus,
    write_groups,
    write_queries,
)
from utils.errors import DataFormatError
from utils.model import Document, GroupAssignment, QueryRequest

from conftest import fixture_path, write_lines


def paper(doc_id, *author_ids, **extra):
    record = {
        'id': doc_id,
        'title': extra.get('title', f"Title of {doc_id}"),
        'paperAbstract': extra.get('abstract', ''),
        'authors': [{'name': f"Name {a}", 'ids': [a]} for a in author_ids],
    }
    record.update(extra.get('raw', {}))
    return record


class TestLoadCorpus:
    def test_one_paper_two_authors(self, tmp_path):
        path = write_lines(tmp_path / 'corpus.jsonl', [paper('d1', 'a1', 'a2')])
        documents = load_corpus(path)
        assert list(documents) == ['d1']
        assert documents['d1'].authors == ('a1', 'a2')
        assert documents['d1'].title == 'Title of d1'

    def test_empty_file(self, tmp_path):
        path = tmp_path / 'corpus.jsonl'
        path.write_text('')
        assert load_corpus(str(path)) == {}

    def test_duplicate_id_names_both_lines(self, tmp_path):
        path = write_lines(tmp_path / 'corpus.jsonl', [paper('d1', 'a1'), paper('d2'), paper('d1', 'a2')])
        with pytest.raises(DataFormatError) as excinfo:
            load_corpus(path)
        message = str(excinfo.value)
        assert "'d1'" in message
        assert 'line 1' in message
        assert excinfo.value.line == 3
        assert message.startswith(f"{path}:3:")

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = write_lines(tmp_path / 'corpus.jsonl', [paper('d1'), '{"id": "d2",'])
        with pytest.raises(DataFormatError) as excinfo:
            load_corpus(path)
        assert excinfo.value.line == 2
        assert excinfo.value.path == path

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataFormatError):
            load_corpus(str(tmp_path / 'nope.jsonl'))

    def test_gzip_corpus(self, tmp_path):
        path = tmp_path / 'corpus.jsonl.gz'
        with gzip.open(path, 'wt', encoding='utf-8') as f:
            f.write(json.dumps(paper('d1', 'a1')) + '\n')
        assert load_corpus(str(path))['d1'].authors == ('a1',)

    def test_multi_id_author_collapses_to_first_id(self, tmp_path, caplog):
        record = paper('d1')
        record['authors'] = [{'name': 'Ada', 'ids': ['a7', 'a8']}, {'name': 'No Id', 'ids': []}]
        path = write_lines(tmp_path / 'corpus.jsonl', [record])
        with caplog.at_level(logging.WARNING):
            documents = load_corpus(path)
        assert documents['d1'].authors == ('a7',)
        assert 'using the first (a7)' in caplog.text
        assert 'has no id' in caplog.text

    def test_citations_are_accepted(self, tmp_path):
        record = paper('d1', 'a1', raw={'inCitations': ['x'], 'outCitations': ['y', 'z']})
        path = write_lines(tmp_path / 'corpus.jsonl', [record])
        assert load_corpus(path)['d1'].authors == ('a1',)

    def test_order_preserved(self):
        assert list(load_corpus(fixture_path('corpus.jsonl'))) == ['d1', 'd2', 'd3', 'd4', 'd5']


def query(qid, docs, frequency=0.5, text='some query'):
    return {'qid': qid, 'query': text, 'frequency': frequency, 'documents': docs}


class TestLoadQueries:
    def test_training_style_line(self, tmp_path):
        docs = [{'doc_id': f"d{i}", 'relevance': int(i < 2)} for i in range(5)]
        requests = load_queries(write_lines(tmp_path / 'q.jsonl', [query('q1', docs)]))
        assert len(requests) == 1
        assert len(requests[0].relevance) == 5
        assert sum(requests[0].relevance.values()) == 2
        assert requests[0].frequency == 0.5

    def test_evaluation_style_line(self, tmp_path):
        requests = load_queries(write_lines(tmp_path / 'q.jsonl', [query('q1', [{'doc_id': 'd1'}, {'doc_id': 'd2'}])]))
        assert requests[0].relevance is None
        assert requests[0].pool == ('d1', 'd2')

    @pytest.mark.parametrize('record, message', [
        (query('q1', [{'doc_id': 'd1', 'relevance': 2}]), '0 or 1'),
        (query('q1', [{'doc_id': 'd1', 'relevance': 1}], frequency=-1), '>= 0'),
        (query('q1', []), 'empty'),
        (query('q1', [{'doc_id': 'd1', 'relevance': 1}, {'doc_id': 'd2'}]), 'mixes'),
        (query('q1', [{'doc_id': 'd1'}, {'doc_id': 'd1'}]), 'repeats'),
        ({'query': 'x', 'documents': [{'doc_id': 'd1'}]}, "'qid'"),
    ])
    def test_bad_lines(self, tmp_path, record, message):
        path = write_lines(tmp_path / 'q.jsonl', [query('q0', [{'doc_id': 'd0'}]), record])
        with pytest.raises(DataFormatError, match=message) as excinfo:
            load_queries(path)
        assert excinfo.value.line == 2

    def test_duplicate_qid(self, tmp_path):
        path = write_lines(tmp_path / 'q.jsonl', [query('q1', [{'doc_id': 'd1'}]), query('q1', [{'doc_id': 'd2'}])])
        with pytest.raises(DataFormatError, match='Duplicate query id'):
            load_queries(path)

    def test_fixture(self):
        requests = load_queries(fixture_path('queries.jsonl'))
        assert [r.qid for r in requests] == ['q1', 'q2']
        assert requests[0].judgments() == {'d1': 1, 'd2': 0, 'd3': 1}


class TestLoadGroups:
    def test_csv(self):
        groups = load_groups(fixture_path('groups.csv'))
        assert len(groups) == 5
        assert groups.universe == frozenset({'advanced', 'developing'})

    def test_three_authors_two_groups(self, tmp_path):
        path = tmp_path / 'groups.csv'
        path.write_text('author_id,group_id\nx,g1\ny,g2\nz,g1\n')
        groups = load_groups(str(path))
        assert len(groups) == 3
        assert len(groups.universe) == 2

    def test_consistent_duplicates_are_dropped(self, tmp_path):
        path = tmp_path / 'groups.csv'
        path.write_text('author_id,group_id\nx,g1\nx,g1\ny,g2\n')
        assert len(load_groups(str(path))) == 2

    def test_conflicting_duplicates_name_author(self, tmp_path):
        path = tmp_path / 'groups.csv'
        path.write_text('author_id,group_id\nx,g1\ny,g2\nx,g2\n')
        with pytest.raises(DataFormatError, match="Author 'x'") as excinfo:
            load_groups(str(path))
        assert excinfo.value.line == 4

    def test_malformed_csv_reports_line(self, tmp_path):
        path = tmp_path / 'groups.csv'
        path.write_text('author_id,group_id\nx,g1\ny,g2,extra\n')
        with pytest.raises(DataFormatError, match='Malformed CSV') as excinfo:
            load_groups(str(path))
        assert excinfo.value.line == 3
        assert str(excinfo.value).startswith(f"{path}:3: ")

    def test_empty_group_file_has_path_only(self, tmp_path):
        path = tmp_path / 'groups.csv'
        path.write_text('author_id,group_id\n')
        with pytest.raises(DataFormatError, match='assigns no authors') as excinfo:
            load_groups(str(path))
        assert excinfo.value.line is None
        assert str(excinfo.value) == f"{path}: Group file assigns no authors"

    def test_json_lines(self, tmp_path):
        path = write_lines(tmp_path / 'groups.jsonl', [
            {'author_id': 'x', 'group_id': 'g1'},
            {'author_id': 'y', 'group_id': 'g2'},
        ])
        assert load_groups(path).group_of('y') == 'g2'

    def test_missing_column(self, tmp_path):
        path = tmp_path / 'groups.csv'
        path.write_text('author,group\nx,g1\n')
        with pytest.raises(DataFormatError, match='missing column'):
            load_groups(str(path))


class TestAuthorStatistics:
    def test_first_statistic_column_by_default(self):
        values = load_author_statistics(fixture_path('hindex.csv'))
        assert values['a1'] == 4
        assert values['a5'] == 30

    def test_non_integer_value(self, tmp_path):
        path = tmp_path / 'stats.csv'
        path.write_text('author_id,h_index\nx,many\n')
        with pytest.raises(DataFormatError, match='integer') as excinfo:
            load_author_statistics(str(path))
        assert excinfo.value.line == 2


class TestWriters:
    def test_written_files_load_back(self, tmp_path):
        documents = [Document('d1', ('a1', 'a2'), 'T1', 'A1'), Document('d2', (), 'T2', None)]
        requests = [
            QueryRequest('q1', 'text one', 0.25, ('d1', 'd2'), {'d1': 1, 'd2': 0}),
            QueryRequest('q2', 'text two', 0.75, ('d2',)),
        ]
        groups = GroupAssignment.from_pairs([('a2', 'g2'), ('a1', 'g1')])
        write_corpus(str(tmp_path / 'c.jsonl'), documents)
        write_queries(str(tmp_path / 'q.jsonl'), requests)
        write_groups(str(tmp_path / 'g.csv'), groups)

        assert list(load_corpus(str(tmp_path / 'c.jsonl')).values()) == documents
        assert load_queries(str(tmp_path / 'q.jsonl')) == requests
        assert load_groups(str(tmp_path / 'g.csv')).groups == groups.groups
        assert (tmp_path / 'g.csv').read_text() == 'author_id,group_id\na1,g1\na2,g2\n'


def test_missing_pool_documents():
    documents = {'d1': Document('d1')}
    requests = [QueryRequest('q1', 't', 1.0, ('d1', 'd2')), QueryRequest('q2', 't', 1.0, ('d2', 'd3'))]
    assert missing_pool_documents(documents, requests) == ['d2', 'd3']


@pytest.mark.parametrize('path, label', [
    ('runs/controller-0.5.jsonl', 'controller-0.5'),
    ('/tmp/groups.csv', 'groups'),
    ('corpus.jsonl.gz', 'corpus'),
])
def test_file_label(path, label):
    assert file_label(path) == label
