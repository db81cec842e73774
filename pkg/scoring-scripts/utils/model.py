"""
Domain types shared by the loaders, metrics, rerankers and the CLI.

All types are immutable after construction. Identifiers (documents, authors,
queries, groups) are opaque non-empty strings compared by exact equality.
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .errors import (
    DataIntegrityError,
    InvalidParameterError,
    InvalidRankingError,
    ValidationError,
)


def _require_id(value, kind: str) -> str:
    if not isinstance(value, str) or not value:
        raise ValidationError(f"{kind} must be a non-empty string, got {value!r}")
    return value


@dataclass(frozen=True)
class Document:
    """A paper in the corpus. Unannotated papers have an empty author list."""

    id: str
    authors: Tuple[str, ...] = ()
    title: Optional[str] = None
    abstract_text: Optional[str] = None

    def __post_init__(self):
        _require_id(self.id, "DocumentId")
        authors = tuple(self.authors)
        for author in authors:
            _require_id(author, "AuthorId")
        duplicated = [a for a, n in Counter(authors).items() if n > 1]
        if duplicated:
            raise ValidationError(
                f"Document '{self.id}' lists author(s) more than once: {', '.join(duplicated)}"
            )
        object.__setattr__(self, 'authors', authors)


@dataclass(frozen=True)
class QueryRequest:
    """
    A query with its reranking pool.

    `pool` keeps file order so seeded shuffles are reproducible, but carries set
    semantics: duplicates are rejected. `relevance` is None for evaluation-style
    queries; when present, pool documents absent from it are non-relevant.
    """

    qid: str
    text: str
    frequency: float
    pool: Tuple[str, ...]
    relevance: Optional[Mapping[str, int]] = None

    def __post_init__(self):
        _require_id(self.qid, "QueryId")
        pool = tuple(self.pool)
        if not pool:
            raise ValidationError(f"Query '{self.qid}' has an empty reranking pool")
        for doc_id in pool:
            _require_id(doc_id, "DocumentId")
        if len(set(pool)) != len(pool):
            duplicated = sorted(d for d, n in Counter(pool).items() if n > 1)
            raise ValidationError(f"Query '{self.qid}' pool repeats document(s): {', '.join(duplicated)}")
        if not isinstance(self.frequency, (int, float)) or not math.isfinite(self.frequency) or self.frequency < 0:
            raise ValidationError(f"Query '{self.qid}' frequency must be a finite value >= 0, got {self.frequency!r}")
        object.__setattr__(self, 'pool', pool)

        if self.relevance is not None:
            members = set(pool)
            judged = {}
            for doc_id, value in self.relevance.items():
                if doc_id not in members:
                    raise ValidationError(f"Query '{self.qid}' judges document '{doc_id}' which is not in its pool")
                if isinstance(value, bool) or value not in (0, 1):
                    raise ValidationError(
                        f"Query '{self.qid}' relevance for '{doc_id}' must be 0 or 1, got {value!r}"
                    )
                judged[doc_id] = int(value)
            object.__setattr__(self, 'relevance', MappingProxyType(judged))

    @property
    def has_relevance(self) -> bool:
        return self.relevance is not None

    def judgments(self) -> Dict[str, int]:
        """Binary relevance for every pool document."""
        if self.relevance is None:
            raise DataIntegrityError(f"Query '{self.qid}' has no relevance judgments")
        return {doc_id: self.relevance.get(doc_id, 0) for doc_id in self.pool}


def permutation_problems(order: Sequence[str], pool: Iterable[str]) -> List[str]:
    """
    Describe how `order` fails to be an exact permutation of `pool`.

    Returns:
        list: Human-readable problems; empty when `order` is admissible
    """
    problems = []
    if not order:
        problems.append("ranking is empty")
    counts = Counter(order)
    duplicated = sorted(d for d, n in counts.items() if n > 1)
    if duplicated:
        problems.append(f"duplicate documents: {', '.join(duplicated)}")
    members = set(pool)
    missing = sorted(members - counts.keys())
    if missing:
        problems.append(f"missing pool documents: {', '.join(missing)}")
    extraneous = sorted(counts.keys() - members)
    if extraneous:
        problems.append(f"documents not in pool: {', '.join(extraneous)}")
    return problems


@dataclass(frozen=True)
class Ranking:
    """One system output for one request."""

    qid: str
    order: Tuple[str, ...]

    def __post_init__(self):
        _require_id(self.qid, "QueryId")
        order = tuple(self.order)
        for doc_id in order:
            _require_id(doc_id, "DocumentId")
        object.__setattr__(self, 'order', order)

    def __len__(self) -> int:
        return len(self.order)

    def validate_against(self, request: QueryRequest) -> 'Ranking':
        """Raise InvalidRankingError unless this ranking permutes the request's pool."""
        if self.qid != request.qid:
            raise InvalidRankingError(f"ranking for '{self.qid}' checked against query '{request.qid}'")
        problems = permutation_problems(self.order, request.pool)
        if problems:
            raise InvalidRankingError(f"ranking for '{self.qid}' is not a permutation of its pool: {'; '.join(problems)}")
        return self

    @classmethod
    def for_request(cls, request: QueryRequest, order: Sequence[str]) -> 'Ranking':
        return cls(request.qid, tuple(order)).validate_against(request)


def sequence_sort_key(sequence_id: str) -> Tuple[int, int, str]:
    """Order numeric sequence ids numerically, ahead of any non-numeric ones."""
    if sequence_id.isdigit():
        return (0, int(sequence_id), sequence_id)
    return (1, 0, sequence_id)


@dataclass(frozen=True)
class SequenceEntry:
    """A ranking at a 1-based position; `query_number` is the number written in q_num."""

    position: int
    ranking: Ranking
    query_number: int

    @property
    def qid(self) -> str:
        return self.ranking.qid


@dataclass(frozen=True)
class RankingSequence:
    """The sequence Π of rankings a system produced for one query sequence."""

    sequence_id: str
    entries: Tuple[SequenceEntry, ...]

    def __post_init__(self):
        _require_id(self.sequence_id, "sequence id")
        entries = tuple(self.entries)
        for expected, entry in enumerate(entries, 1):
            if entry.position != expected:
                raise ValidationError(
                    f"Sequence '{self.sequence_id}' positions must be 1..N contiguous; "
                    f"found {entry.position} where {expected} was expected"
                )
        object.__setattr__(self, 'entries', entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[SequenceEntry]:
        return iter(self.entries)

    @property
    def qids(self) -> List[str]:
        return [entry.qid for entry in self.entries]

    @classmethod
    def from_rankings(
        cls,
        sequence_id: str,
        rankings: Sequence[Ranking],
        query_numbers: Optional[Sequence[int]] = None
    ) -> 'RankingSequence':
        if query_numbers is None:
            query_numbers = range(1, len(rankings) + 1)
        entries = tuple(
            SequenceEntry(position, ranking, number)
            for position, (ranking, number) in enumerate(zip(rankings, query_numbers), 1)
        )
        return cls(sequence_id, entries)


@dataclass(frozen=True)
class GroupAssignment:
    """Total map author → exactly one group, plus the group universe."""

    groups: Mapping[str, str]
    universe: FrozenSet[str]

    def __post_init__(self):
        for author, group in self.groups.items():
            _require_id(author, "AuthorId")
            _require_id(group, "GroupId")
        universe = frozenset(self.universe)
        if not universe:
            raise ValidationError("Group universe must not be empty")
        unknown = sorted(set(self.groups.values()) - universe)
        if unknown:
            raise ValidationError(f"Group universe is missing assigned group(s): {', '.join(unknown)}")
        object.__setattr__(self, 'groups', MappingProxyType(dict(self.groups)))
        object.__setattr__(self, 'universe', universe)

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[Tuple[str, str]],
        universe: Optional[Iterable[str]] = None
    ) -> 'GroupAssignment':
        """Build from (author, group) pairs; a second pair for the same author is rejected."""
        groups: Dict[str, str] = {}
        for author, group in pairs:
            if author in groups:
                raise ValidationError(
                    f"Author '{author}' is assigned twice ('{groups[author]}' and '{group}')"
                )
            groups[author] = group
        if universe is None:
            universe = groups.values()
        return cls(groups, frozenset(universe))

    def __len__(self) -> int:
        return len(self.groups)

    def __contains__(self, author: str) -> bool:
        return author in self.groups

    def group_of(self, author: str) -> Optional[str]:
        return self.groups.get(author)

    def authors_in(self, group: str) -> List[str]:
        return sorted(a for a, g in self.groups.items() if g == group)


class Amortization(str, Enum):
    MICRO = 'micro'
    MACRO = 'macro'


@dataclass(frozen=True)
class EvalParams:
    """
    Browsing-model and aggregation parameters.

    gamma is the continuation probability; stop_coefficient is c in p(s|d) = c * r_d.
    """

    gamma: float = 0.5
    stop_coefficient: float = 0.7
    amortization: Amortization = Amortization.MICRO

    def __post_init__(self):
        if not (isinstance(self.gamma, (int, float)) and 0.0 <= self.gamma < 1.0):
            raise InvalidParameterError(f"gamma must satisfy 0 <= gamma < 1, got {self.gamma!r}")
        if not (isinstance(self.stop_coefficient, (int, float)) and 0.0 <= self.stop_coefficient <= 1.0):
            raise InvalidParameterError(
                f"stop coefficient must satisfy 0 <= c <= 1, got {self.stop_coefficient!r}"
            )
        try:
            object.__setattr__(self, 'amortization', Amortization(self.amortization))
        except ValueError:
            raise InvalidParameterError(
                f"amortization must be one of {[m.value for m in Amortization]}, got {self.amortization!r}"
            ) from None


@dataclass(frozen=True)
class EvalResult:
    """
    Amortized evaluation of one run.

    `unfairness` is None when it is undefined (zero total exposure or relevance).
    In macro mode the share fields describe the pooled run and `unfairness` is the
    unweighted mean of per-query values, so it generally differs from the L2
    norm of `deviation`. In micro mode the two are equal.
    """

    exposure_share: Mapping[str, float]
    relevance_share: Mapping[str, float]
    deviation: Mapping[str, float]
    unfairness: Optional[float]
    mean_utility: float
    rankings_evaluated: int
    amortization: Amortization = Amortization.MICRO
    metadata: Mapping[str, object] = field(default_factory=dict)

    @property
    def is_defined(self) -> bool:
        return self.unfairness is not None

    def to_dict(self) -> Dict[str, object]:
        groups = {
            group: {
                'exposure_share': self.exposure_share[group],
                'relevance_share': self.relevance_share[group],
                'deviation': self.deviation[group],
            }
            for group in sorted(self.exposure_share)
        }
        return {
            'mode': self.amortization.value,
            'utility': self.mean_utility,
            'unfairness': self.unfairness,
            'rankings_evaluated': self.rankings_evaluated,
            'groups': groups,
            'metadata': dict(self.metadata),
        }
