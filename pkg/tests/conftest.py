import json
import os

import pytest

from utils.data_loaders import load_corpus, load_groups, load_queries, queries_by_id
from utils.model import Document, EvalParams, GroupAssignment, QueryRequest, Ranking

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURE_DIR = os.path.join(REPO_ROOT, 'config', 'fixture')


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURE_DIR, name)


def write_lines(path, records):
    with open(path, 'w', encoding='utf-8') as f:
        for record in records:
            f.write((record if isinstance(record, str) else json.dumps(record)) + '\n')
    return str(path)


@pytest.fixture
def params():
    return EvalParams()


@pytest.fixture(scope='session')
def golden():
    with open(fixture_path('golden.json')) as f:
        return json.load(f)


@pytest.fixture(scope='session')
def fixture_documents():
    return load_corpus(fixture_path('corpus.jsonl'))


@pytest.fixture(scope='session')
def fixture_queries():
    return queries_by_id(load_queries(fixture_path('queries.jsonl')))


@pytest.fixture(scope='session')
def fixture_groups():
    return load_groups(fixture_path('groups.csv'))


@pytest.fixture
def two_doc_collection():
    """d1 (relevant, author x) and d2 (not relevant, author y) for query q."""
    documents = {
        'd1': Document('d1', ('x',)),
        'd2': Document('d2', ('y',)),
    }
    request = QueryRequest('q', 'text', 1.0, ('d1', 'd2'), {'d1': 1, 'd2': 0})
    groups = GroupAssignment.from_pairs([('x', 'g1'), ('y', 'g2')])
    return documents, request, groups


@pytest.fixture
def ranking_d1_d2():
    return Ranking('q', ('d1', 'd2'))
