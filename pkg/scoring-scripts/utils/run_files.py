"""
Run files and query-sequence files.

Run files are JSON-lines with exactly the keys q_num, qid and ranking, where
q_num is "<sequence id>.<query number in sequence>":

    {"q_num": "0.1", "qid": "q17", "ranking": ["d3", "d1"]}

Sequence files are CSV with header q_num,qid and a JSON sidecar
(<file>.meta.json) recording how they were generated.
"""

import io
import json
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import pandas as pd

from .errors import DataFormatError, ValidationError
from .file_io import atomic_write_text, read_csv, read_json_lines
from .model import Ranking, RankingSequence, sequence_sort_key


logger = logging.getLogger(__name__)

RUN_KEYS = ('q_num', 'qid', 'ranking')
SEQUENCE_COLUMNS = ['q_num', 'qid']


def format_q_num(sequence_id: str, query_number: int) -> str:
    return f"{sequence_id}.{query_number}"


def parse_q_num(q_num, path: Optional[str] = None, line_num: Optional[int] = None) -> Tuple[str, int]:
    """
    Split a q_num into (sequence id, query number).

    Raises:
        DataFormatError: Unless q_num is two dot-separated non-negative integers
    """
    parts = q_num.split('.') if isinstance(q_num, str) else []
    if len(parts) != 2 or not all(part.isascii() and part.isdigit() for part in parts):
        raise DataFormatError(
            f"q_num must look like '<sequence id>.<query number>', got {q_num!r}", path, line_num
        )
    return str(int(parts[0])), int(parts[1])


@dataclass(frozen=True)
class RunRecord:
    q_num: str
    qid: str
    ranking: Tuple[str, ...]

    def to_json(self) -> str:
        return json.dumps({'q_num': self.q_num, 'qid': self.qid, 'ranking': list(self.ranking)})


def load_run_records(path: str) -> List[Tuple[int, RunRecord]]:
    """Read a run file into (line number, RunRecord) pairs, checking only the record shape."""
    records = []
    for line_num, raw in read_json_lines(path):
        missing = [key for key in RUN_KEYS if key not in raw]
        if missing:
            raise DataFormatError(f"Run record missing key(s): {', '.join(missing)}", path, line_num)
        ranking = raw['ranking']
        if not isinstance(ranking, list) or not all(isinstance(d, str) and d for d in ranking):
            raise DataFormatError("'ranking' must be a list of document id strings", path, line_num)
        if not isinstance(raw['qid'], (str, int)) or isinstance(raw['qid'], bool) or str(raw['qid']) == '':
            raise DataFormatError(f"'qid' must be a non-empty string, got {raw['qid']!r}", path, line_num)
        if not isinstance(raw['q_num'], str):
            raise DataFormatError(f"'q_num' must be a string, got {raw['q_num']!r}", path, line_num)
        records.append((line_num, RunRecord(raw['q_num'], str(raw['qid']), tuple(ranking))))
    return records


def load_run(path: str) -> Dict[str, RankingSequence]:
    """
    Load a run file into one RankingSequence per sequence id.

    Query numbers must be strictly increasing within a sequence; gaps are
    allowed and logged.

    Returns:
        dict: sequence id → RankingSequence, ordered by sequence id
    """
    grouped: Dict[str, List[Tuple[int, Ranking]]] = {}
    seen_at: Dict[Tuple[str, int], int] = {}
    for line_num, record in load_run_records(path):
        sequence_id, number = parse_q_num(record.q_num, path, line_num)
        key = (sequence_id, number)
        if key in seen_at:
            raise DataFormatError(
                f"Duplicate q_num '{record.q_num}' (first seen on line {seen_at[key]})", path, line_num
            )
        seen_at[key] = line_num

        entries = grouped.setdefault(sequence_id, [])
        if entries:
            previous = entries[-1][0]
            if number < previous:
                raise DataFormatError(
                    f"Query numbers in sequence {sequence_id} must increase; {number} follows {previous}",
                    path, line_num
                )
            if number != previous + 1:
                logger.warning(f"{path}:{line_num}: sequence {sequence_id} skips from {previous} to {number}")
        try:
            ranking = Ranking(record.qid, record.ranking)
        except ValidationError as e:
            raise DataFormatError(str(e), path, line_num) from e
        entries.append((number, ranking))

    sequences = {}
    for sequence_id in sorted(grouped, key=sequence_sort_key):
        numbers = [number for number, _ in grouped[sequence_id]]
        rankings = [ranking for _, ranking in grouped[sequence_id]]
        sequences[sequence_id] = RankingSequence.from_rankings(sequence_id, rankings, numbers)

    logger.info(f"Loaded {sum(len(s) for s in sequences.values())} rankings in {len(sequences)} sequence(s) from {path}")
    return sequences


def records_from_sequences(sequences: Iterable[RankingSequence]) -> List[RunRecord]:
    records = []
    for sequence in sorted(sequences, key=lambda s: sequence_sort_key(s.sequence_id)):
        for entry in sequence:
            records.append(RunRecord(
                format_q_num(sequence.sequence_id, entry.query_number),
                entry.qid,
                entry.ranking.order,
            ))
    return records


def write_run(path: str, records: Iterable[RunRecord]):
    """Write run records in canonical form: one JSON object per line, keys q_num, qid, ranking."""
    atomic_write_text(path, ''.join(record.to_json() + '\n' for record in records))


@dataclass(frozen=True)
class QuerySequence:
    """An evaluation query sequence: the qids a system must rank, in order."""

    sequence_id: str
    query_numbers: Tuple[int, ...]
    qids: Tuple[str, ...]

    def __len__(self) -> int:
        return len(self.qids)

    def items(self) -> List[Tuple[int, str]]:
        return list(zip(self.query_numbers, self.qids))


def write_sequences(path: str, sequences: Iterable[QuerySequence], metadata: Optional[Mapping[str, object]] = None):
    """Write sequences as CSV (q_num,qid) plus a <path>.meta.json sidecar."""
    rows = [
        (format_q_num(sequence.sequence_id, number), qid)
        for sequence in sequences
        for number, qid in sequence.items()
    ]
    buffer = io.StringIO()
    pd.DataFrame(rows, columns=SEQUENCE_COLUMNS).to_csv(buffer, index=False, lineterminator='\n')
    atomic_write_text(path, buffer.getvalue())
    if metadata is not None:
        atomic_write_text(f"{path}.meta.json", json.dumps(dict(metadata), indent=2, sort_keys=True) + '\n')


def load_sequences(path: str) -> Dict[str, QuerySequence]:
    """Load a sequence file; the same ordering rules as run files apply."""
    df = read_csv(path)
    missing = [col for col in SEQUENCE_COLUMNS if col not in df.columns]
    if missing:
        raise DataFormatError(f"Sequence file missing column(s): {', '.join(missing)}", path, 1)

    grouped: Dict[str, List[Tuple[int, str]]] = {}
    for index, row in enumerate(df[SEQUENCE_COLUMNS].itertuples(index=False)):
        line_num = index + 2
        sequence_id, number = parse_q_num(row.q_num, path, line_num)
        if not row.qid:
            raise DataFormatError("qid must be non-empty", path, line_num)
        items = grouped.setdefault(sequence_id, [])
        if items and number <= items[-1][0]:
            raise DataFormatError(
                f"Query numbers in sequence {sequence_id} must strictly increase; {number} follows {items[-1][0]}",
                path, line_num
            )
        items.append((number, row.qid))

    return {
        sequence_id: QuerySequence(
            sequence_id,
            tuple(number for number, _ in grouped[sequence_id]),
            tuple(qid for _, qid in grouped[sequence_id]),
        )
        for sequence_id in sorted(grouped, key=sequence_sort_key)
    }
