"""
Loaders and writers for corpus, query and group-definition files.

Formats:
- Corpus: JSON-lines (plain or gzip), one S2 paper per line:
  {"id": ..., "title": ..., "paperAbstract": ..., "authors": [{"name": ..., "ids": [...]}],
   "inCitations": [...], "outCitations": [...]}
- Queries: JSON-lines, one query per line:
  {"qid": ..., "query": ..., "frequency": ..., "documents": [{"doc_id": ..., "relevance": 0|1}]}
  ("relevance" present on every document for training queries, on none for evaluation queries)
- Groups: CSV with header author_id,group_id, or JSON-lines {"author_id": ..., "group_id": ...}
"""

import io
import json
import logging
import os
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

import pandas as pd

from .errors import DataFormatError, ValidationError
from .model import Document, GroupAssignment, QueryRequest
from .file_io import atomic_write_text, read_csv, read_json_lines


logger = logging.getLogger(__name__)

GROUP_COLUMNS = ['author_id', 'group_id']


@dataclass(frozen=True)
class AuthorEntry:
    name: str
    ids: Tuple[str, ...]


@dataclass(frozen=True)
class CorpusRecord:
    """One S2 paper as it appears in the corpus file. Citations are kept but unused."""

    id: str
    title: Optional[str]
    abstract: Optional[str]
    authors: Tuple[AuthorEntry, ...]
    in_citations: Tuple[str, ...] = ()
    out_citations: Tuple[str, ...] = ()


def _as_id(value, what: str, path: str, line_num: int) -> str:
    if isinstance(value, bool) or not isinstance(value, (str, int)) or str(value) == '':
        raise DataFormatError(f"{what} must be a non-empty string, got {value!r}", path, line_num)
    return str(value)


def _optional_text(record: dict, *keys: str) -> Optional[str]:
    for key in keys:
        value = record.get(key)
        if value is not None:
            return str(value)
    return None


def parse_corpus_record(record: dict, path: str, line_num: int) -> CorpusRecord:
    """Parse one corpus line into a CorpusRecord."""
    if 'id' not in record:
        raise DataFormatError("Corpus record has no 'id'", path, line_num)
    doc_id = _as_id(record['id'], "Document id", path, line_num)

    raw_authors = record.get('authors') or []
    if not isinstance(raw_authors, list):
        raise DataFormatError(f"'authors' of '{doc_id}' must be a list", path, line_num)
    authors = []
    for raw in raw_authors:
        if not isinstance(raw, dict):
            raise DataFormatError(f"Author entry of '{doc_id}' must be an object", path, line_num)
        ids = raw.get('ids') or []
        if not isinstance(ids, list):
            raise DataFormatError(f"Author 'ids' of '{doc_id}' must be a list", path, line_num)
        authors.append(AuthorEntry(
            name=str(raw.get('name', '')),
            ids=tuple(_as_id(i, "Author id", path, line_num) for i in ids),
        ))

    return CorpusRecord(
        id=doc_id,
        title=_optional_text(record, 'title'),
        abstract=_optional_text(record, 'paperAbstract', 'abstract'),
        authors=tuple(authors),
        in_citations=tuple(str(c) for c in record.get('inCitations') or []),
        out_citations=tuple(str(c) for c in record.get('outCitations') or []),
    )


def record_to_document(record: CorpusRecord, path: str = None, line_num: int = None) -> Document:
    """Flatten each author entry to its first id; entries without ids are skipped."""
    author_ids = []
    for author in record.authors:
        if not author.ids:
            logger.warning(f"{path}:{line_num}: author '{author.name}' of '{record.id}' has no id; skipped")
            continue
        if len(author.ids) > 1:
            logger.warning(
                f"{path}:{line_num}: author '{author.name}' of '{record.id}' has {len(author.ids)} ids; "
                f"using the first ({author.ids[0]})"
            )
        author_ids.append(author.ids[0])
    try:
        return Document(record.id, tuple(author_ids), record.title, record.abstract)
    except ValidationError as e:
        raise DataFormatError(str(e), path, line_num) from e


def load_corpus(path: str) -> Dict[str, Document]:
    """
    Load a corpus file into a map of document id to Document.

    Args:
        path: JSON-lines file, optionally gzip-compressed

    Returns:
        dict: Documents in file order

    Raises:
        DataFormatError: On malformed lines or duplicate document ids
    """
    documents: Dict[str, Document] = {}
    first_seen: Dict[str, int] = {}
    for line_num, raw in read_json_lines(path):
        record = parse_corpus_record(raw, path, line_num)
        if record.id in first_seen:
            raise DataFormatError(
                f"Duplicate document id '{record.id}' (first seen on line {first_seen[record.id]})",
                path, line_num
            )
        first_seen[record.id] = line_num
        documents[record.id] = record_to_document(record, path, line_num)

    logger.info(f"Loaded {len(documents)} documents from {path}")
    return documents


def parse_query_record(record: dict, path: str, line_num: int) -> QueryRequest:
    """Parse one query line into a QueryRequest."""
    for key in ('qid', 'documents'):
        if key not in record:
            raise DataFormatError(f"Query record has no '{key}'", path, line_num)
    qid = _as_id(record['qid'], "Query id", path, line_num)

    frequency = record.get('frequency', 0.0)
    if isinstance(frequency, bool) or not isinstance(frequency, (int, float)):
        raise DataFormatError(f"Query '{qid}' frequency must be a number, got {frequency!r}", path, line_num)
    if frequency < 0:
        raise DataFormatError(f"Query '{qid}' frequency must be >= 0, got {frequency}", path, line_num)

    entries = record['documents']
    if not isinstance(entries, list) or not entries:
        raise DataFormatError(f"Query '{qid}' has an empty reranking pool", path, line_num)

    pool = []
    relevance = {}
    for entry in entries:
        if not isinstance(entry, dict) or 'doc_id' not in entry:
            raise DataFormatError(f"Query '{qid}' document entries need a 'doc_id'", path, line_num)
        doc_id = _as_id(entry['doc_id'], "Document id", path, line_num)
        pool.append(doc_id)
        if 'relevance' in entry:
            value = entry['relevance']
            if isinstance(value, bool) or value not in (0, 1):
                raise DataFormatError(
                    f"Query '{qid}' relevance for '{doc_id}' must be 0 or 1, got {value!r}", path, line_num
                )
            relevance[doc_id] = int(value)

    if relevance and len(relevance) != len(entries):
        raise DataFormatError(
            f"Query '{qid}' mixes judged and unjudged documents ({len(relevance)} of {len(entries)} judged)",
            path, line_num
        )

    try:
        return QueryRequest(
            qid=qid,
            text=str(record.get('query', '')),
            frequency=float(frequency),
            pool=tuple(pool),
            relevance=relevance if relevance else None,
        )
    except ValidationError as e:
        raise DataFormatError(str(e), path, line_num) from e


def load_queries(path: str) -> List[QueryRequest]:
    """
    Load a query file.

    Args:
        path: JSON-lines query file

    Returns:
        list: QueryRequest per line, in file order

    Raises:
        DataFormatError: On malformed lines, bad relevance values, negative
            frequency, empty pools or duplicate query ids
    """
    requests = []
    first_seen: Dict[str, int] = {}
    for line_num, raw in read_json_lines(path):
        request = parse_query_record(raw, path, line_num)
        if request.qid in first_seen:
            raise DataFormatError(
                f"Duplicate query id '{request.qid}' (first seen on line {first_seen[request.qid]})",
                path, line_num
            )
        first_seen[request.qid] = line_num
        requests.append(request)

    logger.info(f"Loaded {len(requests)} queries from {path}")
    return requests


def queries_by_id(requests: Iterable[QueryRequest]) -> Dict[str, QueryRequest]:
    return {request.qid: request for request in requests}


def _group_rows(path: str) -> Iterator[Tuple[int, str, str]]:
    if path.lower().endswith('.csv'):
        df = read_csv(path)
        missing = [col for col in GROUP_COLUMNS if col not in df.columns]
        if missing:
            raise DataFormatError(f"Group file missing column(s): {', '.join(missing)}", path, 1)
        for index, row in enumerate(df[GROUP_COLUMNS].itertuples(index=False)):
            yield index + 2, row.author_id.strip(), row.group_id.strip()
    else:
        for line_num, record in read_json_lines(path):
            missing = [col for col in GROUP_COLUMNS if col not in record]
            if missing:
                raise DataFormatError(f"Group record missing key(s): {', '.join(missing)}", path, line_num)
            yield line_num, str(record['author_id']).strip(), str(record['group_id']).strip()


def load_groups(path: str) -> GroupAssignment:
    """
    Load a group-definition file.

    Consistent duplicate rows are dropped; an author listed with two different
    groups is an error.

    Args:
        path: CSV (author_id,group_id) or JSON-lines file

    Returns:
        GroupAssignment: Single-valued assignment over the groups seen in the file
    """
    assigned: Dict[str, Tuple[str, int]] = {}
    duplicates = 0
    for line_num, author, group in _group_rows(path):
        if not author or not group:
            raise DataFormatError("author_id and group_id must be non-empty", path, line_num)
        if author in assigned:
            previous, previous_line = assigned[author]
            if previous != group:
                raise DataFormatError(
                    f"Author '{author}' assigned to '{previous}' on line {previous_line} and to '{group}'",
                    path, line_num
                )
            duplicates += 1
            continue
        assigned[author] = (group, line_num)

    if not assigned:
        raise DataFormatError("Group file assigns no authors", path)
    if duplicates:
        logger.debug(f"{path}: dropped {duplicates} duplicate group row(s)")

    groups = GroupAssignment.from_pairs((author, group) for author, (group, _) in assigned.items())
    logger.info(f"Loaded {len(groups)} author assignments over {len(groups.universe)} groups from {path}")
    return groups


def load_author_statistics(path: str, column: Optional[str] = None) -> Dict[str, int]:
    """
    Load a per-author integer statistic (h-index, i-10 index) from CSV.

    Args:
        path: CSV with an author_id column and a statistic column
        column: Statistic column; defaults to the first column after author_id

    Returns:
        dict: author id → statistic
    """
    df = read_csv(path)
    if 'author_id' not in df.columns:
        raise DataFormatError("Statistics file has no 'author_id' column", path, 1)
    if column is None:
        others = [col for col in df.columns if col != 'author_id']
        if not others:
            raise DataFormatError("Statistics file has no statistic column", path, 1)
        column = others[0]
    elif column not in df.columns:
        raise DataFormatError(f"Statistics file has no '{column}' column", path, 1)

    values: Dict[str, int] = {}
    for index, (author, raw) in enumerate(zip(df['author_id'], df[column])):
        line_num = index + 2
        try:
            value = int(raw)
        except ValueError:
            raise DataFormatError(f"'{column}' for author '{author}' must be an integer, got '{raw}'", path, line_num) from None
        if author in values and values[author] != value:
            raise DataFormatError(f"Author '{author}' listed twice with different '{column}' values", path, line_num)
        values[author] = value
    return values


def write_corpus(path: str, documents: Iterable[Document]):
    """Write documents in the S2 corpus line format (one id per author)."""
    lines = []
    for doc in documents:
        record = {
            'id': doc.id,
            'title': doc.title,
            'paperAbstract': doc.abstract_text,
            'authors': [{'name': author, 'ids': [author]} for author in doc.authors],
        }
        lines.append(json.dumps(record) + '\n')
    atomic_write_text(path, ''.join(lines))


def write_queries(path: str, requests: Iterable[QueryRequest]):
    """Write queries in the query-file line format."""
    lines = []
    for request in requests:
        entries = []
        for doc_id in request.pool:
            entry = {'doc_id': doc_id}
            if request.relevance is not None:
                entry['relevance'] = request.relevance.get(doc_id, 0)
            entries.append(entry)
        record = {
            'qid': request.qid,
            'query': request.text,
            'frequency': request.frequency,
            'documents': entries,
        }
        lines.append(json.dumps(record) + '\n')
    atomic_write_text(path, ''.join(lines))


def write_groups(path: str, groups: GroupAssignment):
    """Write a group assignment as CSV (author_id,group_id), sorted by author."""
    df = pd.DataFrame(sorted(groups.groups.items()), columns=GROUP_COLUMNS)
    buffer = io.StringIO()
    df.to_csv(buffer, index=False, lineterminator='\n')
    atomic_write_text(path, buffer.getvalue())


def missing_pool_documents(documents: Mapping[str, Document], requests: Iterable[QueryRequest]) -> List[str]:
    """Pool document ids with no corpus entry, in first-seen order."""
    missing = []
    seen = set()
    for request in requests:
        for doc_id in request.pool:
            if doc_id not in documents and doc_id not in seen:
                seen.add(doc_id)
                missing.append(doc_id)
    return missing


def file_label(path: str) -> str:
    """Label a run or group file by its base name without extension."""
    name = os.path.basename(path)
    for suffix in ('.gz', '.jsonl', '.json', '.ndjson', '.csv'):
        if name.endswith(suffix):
            name = name[:-len(suffix)]
    return name
