"""
Run validation against queries and, optionally, the evaluation query sequences.

Violations are returned as data; nothing here raises on a bad run.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Union

from .model import QueryRequest, RankingSequence, permutation_problems, sequence_sort_key
from .run_files import QuerySequence, format_q_num


@dataclass(frozen=True)
class Violation:
    """One problem with one run entry; `q_num` is None for whole-sequence problems."""

    kind: str
    sequence_id: str
    q_num: Optional[str]
    message: str

    def __str__(self) -> str:
        where = f"q_num {self.q_num}" if self.q_num else f"sequence {self.sequence_id}"
        return f"{where}: {self.message}"


@dataclass
class ValidationReport:
    rankings_checked: int = 0
    sequences_checked: int = 0
    violations: List[Violation] = field(default_factory=list)

    @property
    def is_admissible(self) -> bool:
        return not self.violations

    def counts_by_kind(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for violation in self.violations:
            counts[violation.kind] = counts.get(violation.kind, 0) + 1
        return dict(sorted(counts.items()))

    def summary(self) -> Dict[str, object]:
        return {
            'sequences_checked': self.sequences_checked,
            'rankings_checked': self.rankings_checked,
            'violations': len(self.violations),
            'violations_by_kind': self.counts_by_kind(),
            'admissible': self.is_admissible,
        }


def _as_sequences(run: Union[Mapping[str, RankingSequence], Iterable[RankingSequence]]) -> List[RankingSequence]:
    sequences = list(run.values()) if isinstance(run, Mapping) else list(run)
    return sorted(sequences, key=lambda s: sequence_sort_key(s.sequence_id))


def validate_run(
    run: Union[Mapping[str, RankingSequence], Iterable[RankingSequence]],
    queries: Mapping[str, QueryRequest],
    expected: Optional[Mapping[str, QuerySequence]] = None,
    allow_partial: bool = False
) -> ValidationReport:
    """
    Check a run for admissibility.

    Every entry must name a known query and rank an exact permutation of its
    pool. With `expected` sequences, every (sequence, query number) must carry
    the expected qid and no expected entry may be missing. Without them,
    query numbers must run 1..N. `allow_partial` tolerates omitted entries.

    Args:
        run: Ranking sequences keyed by sequence id (as from load_run)
        queries: qid → QueryRequest
        expected: Sequence file contents, if available
        allow_partial: Do not report omitted queries

    Returns:
        ValidationReport: Empty violation list means the run is admissible
    """
    report = ValidationReport()
    sequences = _as_sequences(run)
    by_id = {sequence.sequence_id: sequence for sequence in sequences}

    for sequence in sequences:
        report.sequences_checked += 1
        wanted = None
        if expected is not None:
            wanted = expected.get(sequence.sequence_id)
            if wanted is None:
                report.violations.append(Violation(
                    'unexpected_sequence', sequence.sequence_id, None,
                    "sequence is not in the query sequence file"
                ))
            else:
                wanted = dict(wanted.items())

        for entry in sequence:
            report.rankings_checked += 1
            q_num = format_q_num(sequence.sequence_id, entry.query_number)
            if wanted is not None:
                expected_qid = wanted.get(entry.query_number)
                if expected_qid is None:
                    report.violations.append(Violation(
                        'unexpected_entry', sequence.sequence_id, q_num,
                        f"query number {entry.query_number} is not in the query sequence"
                    ))
                elif expected_qid != entry.qid:
                    report.violations.append(Violation(
                        'sequence_mismatch', sequence.sequence_id, q_num,
                        f"ranking is for '{entry.qid}' but the sequence asks for '{expected_qid}'"
                    ))

            request = queries.get(entry.qid)
            if request is None:
                report.violations.append(Violation(
                    'unknown_qid', sequence.sequence_id, q_num,
                    f"unknown query id '{entry.qid}' at position {entry.position}"
                ))
                continue
            problems = permutation_problems(entry.ranking.order, request.pool)
            if problems:
                kind = 'empty_ranking' if not entry.ranking.order else 'not_a_permutation'
                report.violations.append(Violation(
                    kind, sequence.sequence_id, q_num,
                    f"ranking for '{entry.qid}' is not a permutation of its pool: {'; '.join(problems)}"
                ))

        if allow_partial:
            continue
        if wanted is not None:
            present = {entry.query_number for entry in sequence}
            for number, qid in sorted(wanted.items()):
                if number not in present:
                    report.violations.append(Violation(
                        'omitted_query', sequence.sequence_id, format_q_num(sequence.sequence_id, number),
                        f"no ranking for '{qid}'"
                    ))
        elif expected is None:
            for position, entry in enumerate(sequence, 1):
                if entry.query_number != position:
                    report.violations.append(Violation(
                        'omitted_query', sequence.sequence_id, format_q_num(sequence.sequence_id, entry.query_number),
                        f"query numbers must run 1..N; expected {position} here"
                    ))
                    break

    if expected is not None and not allow_partial:
        for sequence_id in sorted(set(expected) - set(by_id), key=sequence_sort_key):
            report.violations.append(Violation(
                'omitted_sequence', sequence_id, None, "no rankings for this sequence"
            ))

    return report
