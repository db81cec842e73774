"""
Sequence-aware rerankers.

Each reranker turns a query's pool into a Ranking. Predicted relevance comes
from a lexical overlap scorer; true relevance judgments are never read here.

Strategies:
- random: uniform shuffle of the pool
- maxutil: descending predicted relevance (ties by document id)
- controller: greedy position-by-position construction trading expected
  utility against the unfairness of projected group exposure, carrying group
  totals across the sequence
"""

import logging
import math
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import DataIntegrityError, InvalidParameterError, ProtocolError
from .eval_config import get_strategy_config, resolve_strategy_name
from .model import Document, EvalParams, GroupAssignment, QueryRequest, Ranking, RankingSequence, sequence_sort_key
from .run_files import QuerySequence


logger = logging.getLogger(__name__)

TOKEN_PATTERN = re.compile(r'\w+')


@dataclass(frozen=True)
class ScoredDocument:
    doc_id: str
    score: float
    predicted_relevance: float


@dataclass(frozen=True)
class ScoredPool:
    """A query's pool with a score and a predicted relevance in [0, 1] per document."""

    qid: str
    items: Tuple[ScoredDocument, ...]

    def __post_init__(self):
        for item in self.items:
            if not math.isfinite(item.score) or not 0.0 <= item.predicted_relevance <= 1.0:
                raise InvalidParameterError(
                    f"Scored document '{item.doc_id}' needs a finite score and predicted relevance in [0, 1]"
                )
        object.__setattr__(self, 'items', tuple(self.items))

    def __len__(self) -> int:
        return len(self.items)

    @property
    def doc_ids(self) -> List[str]:
        return [item.doc_id for item in self.items]

    def predicted(self) -> Dict[str, float]:
        return {item.doc_id: item.predicted_relevance for item in self.items}


def tokenize(text: Optional[str]) -> set:
    if not text:
        return set()
    return set(TOKEN_PATTERN.findall(text.lower()))


def _document(documents: Mapping[str, Document], doc_id: str) -> Document:
    try:
        return documents[doc_id]
    except KeyError:
        raise DataIntegrityError(f"No corpus metadata for document '{doc_id}'") from None


def score_pool(request: QueryRequest, documents: Mapping[str, Document]) -> ScoredPool:
    """
    Score each pool document by lexical overlap with the query.

    The score is the number of distinct query tokens found in the document's
    title or abstract; predicted relevance is that count over the number of
    distinct query tokens (0 for a query with no tokens).

    Args:
        request: Query with its pool
        documents: Corpus lookup

    Returns:
        ScoredPool: One entry per pool document, in pool order
    """
    query_tokens = tokenize(request.text)
    items = []
    for doc_id in request.pool:
        doc = _document(documents, doc_id)
        overlap = len(query_tokens & (tokenize(doc.title) | tokenize(doc.abstract_text)))
        predicted = overlap / len(query_tokens) if query_tokens else 0.0
        items.append(ScoredDocument(doc_id, float(overlap), predicted))
    return ScoredPool(request.qid, tuple(items))


def rerank_random(request: QueryRequest, rng: np.random.Generator) -> Ranking:
    """Uniformly random permutation of the pool, drawn from `rng`."""
    order = rng.permutation(len(request.pool))
    return Ranking(request.qid, tuple(request.pool[i] for i in order))


def _utility_order(items: Sequence[ScoredDocument]) -> List[ScoredDocument]:
    return sorted(items, key=lambda item: (-item.predicted_relevance, item.doc_id))


def rerank_max_utility(scored: ScoredPool) -> Ranking:
    """Descending predicted relevance; ties broken by ascending document id."""
    return Ranking(scored.qid, tuple(item.doc_id for item in _utility_order(scored.items)))


@dataclass(frozen=True)
class RerankerState:
    """
    What the fairness controller remembers between queries of one sequence.

    Group totals are built from predicted relevance and only change after a
    ranking has been emitted.
    """

    lam: float = 0.5
    group_exposure: Mapping[str, float] = field(default_factory=dict)
    group_relevance: Mapping[str, float] = field(default_factory=dict)
    rankings_emitted: int = 0

    def __post_init__(self):
        if not (isinstance(self.lam, (int, float)) and 0.0 <= self.lam <= 1.0):
            raise InvalidParameterError(f"lambda must satisfy 0 <= lambda <= 1, got {self.lam!r}")
        for totals in (self.group_exposure, self.group_relevance):
            negative = sorted(g for g, v in totals.items() if v < 0)
            if negative:
                raise InvalidParameterError(f"Group totals must be non-negative: {', '.join(negative)}")


def _document_groups(doc: Document, groups: GroupAssignment) -> Counter:
    """Groups credited by one document: one count per assigned author."""
    return Counter(g for g in (groups.group_of(a) for a in doc.authors) if g is not None)


def _projected_unfairness(exposure: Mapping[str, float], relevance: Mapping[str, float], universe: Sequence[str]) -> float:
    total_exposure = math.fsum(exposure.get(g, 0.0) for g in universe)
    total_relevance = math.fsum(relevance.get(g, 0.0) for g in universe)
    if total_exposure <= 0.0 or total_relevance <= 0.0:
        return 0.0
    return math.sqrt(math.fsum(
        (exposure.get(g, 0.0) / total_exposure - relevance.get(g, 0.0) / total_relevance) ** 2
        for g in universe
    ))


def rerank_fairness_controller(
    scored: ScoredPool,
    state: RerankerState,
    groups: GroupAssignment,
    documents: Mapping[str, Document],
    params: EvalParams
) -> Tuple[Ranking, RerankerState]:
    """
    Greedy fairness-aware ranking for one query.

    At each position the unplaced document minimizing
        lam * unfairness(projected group shares if placed here)
        - (1 - lam) * (examination weight * c * predicted relevance)
    is placed, ties broken like rerank_max_utility. Projected relevance is the
    state's group relevance plus this pool's predicted relevance; projected
    exposure is the state's group exposure plus the ranking built so far plus
    the candidate at the current examination weight.

    Args:
        scored: Pool with predicted relevance
        state: Group totals carried from earlier queries of the sequence
        groups: Author to group assignment
        documents: Corpus lookup
        params: Browsing model (gamma, stop coefficient)

    Returns:
        tuple: (Ranking, state with this ranking's exposure and relevance folded in)
    """
    lam = state.lam
    c = params.stop_coefficient
    universe = sorted(groups.universe)
    credited = {item.doc_id: _document_groups(_document(documents, item.doc_id), groups) for item in scored.items}

    relevance = dict(state.group_relevance)
    for item in scored.items:
        for group, count in credited[item.doc_id].items():
            relevance[group] = relevance.get(group, 0.0) + count * c * item.predicted_relevance

    exposure = dict(state.group_exposure)
    remaining = list(scored.items)
    order = []
    weight = 1.0
    while remaining:
        def objective(item: ScoredDocument) -> Tuple[float, float, str]:
            projected = dict(exposure)
            for group, count in credited[item.doc_id].items():
                projected[group] = projected.get(group, 0.0) + count * weight
            gain = weight * c * item.predicted_relevance
            cost = lam * _projected_unfairness(projected, relevance, universe) if lam > 0.0 else 0.0
            return (cost - (1.0 - lam) * gain, -item.predicted_relevance, item.doc_id)

        chosen = min(remaining, key=objective)
        remaining.remove(chosen)
        order.append(chosen.doc_id)
        for group, count in credited[chosen.doc_id].items():
            exposure[group] = exposure.get(group, 0.0) + count * weight
        weight *= params.gamma * (1.0 - c * chosen.predicted_relevance)

    new_state = RerankerState(lam, exposure, relevance, state.rankings_emitted + 1)
    return Ranking(scored.qid, tuple(order)), new_state


def check_seed(seed: int):
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise InvalidParameterError(f"Seed must be an integer >= 0, got {seed!r}")


def sequence_rng(seed: int, sequence_index: int) -> np.random.Generator:
    """PCG64 stream for one sequence, derived from (seed, sequence index)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, sequence_index])))


class SequenceReranker:
    """
    Rerank one query sequence strictly in order.

    One instance per sequence: the controller's state and the random stream
    advance with every query.
    """

    def __init__(
        self,
        strategy: str,
        documents: Mapping[str, Document],
        params: EvalParams,
        groups: Optional[GroupAssignment] = None,
        lam: float = 0.5,
        seed: int = 0,
        sequence_index: int = 0,
        scorer: Callable[[QueryRequest, Mapping[str, Document]], ScoredPool] = score_pool
    ):
        self.strategy = resolve_strategy_name(strategy)
        self.config = get_strategy_config(self.strategy)
        if self.config['uses_groups'] and groups is None:
            raise InvalidParameterError(f"Strategy '{self.strategy}' needs a group assignment")
        self.documents = documents
        self.params = params
        self.groups = groups
        self.scorer = scorer
        check_seed(seed)
        self.rng = sequence_rng(seed, sequence_index)
        self.state = RerankerState(lam) if self.config['stateful'] else None

    def rerank(self, request: QueryRequest) -> Ranking:
        if not self.config['uses_scores']:
            ranking = rerank_random(request, self.rng)
        elif self.state is None:
            ranking = rerank_max_utility(self.scorer(request, self.documents))
        else:
            ranking, self.state = rerank_fairness_controller(
                self.scorer(request, self.documents), self.state, self.groups, self.documents, self.params
            )
        return ranking.validate_against(request)

    def run(self, sequence: QuerySequence, queries: Mapping[str, QueryRequest]) -> RankingSequence:
        rankings = []
        for position, (_, qid) in enumerate(sequence.items(), 1):
            request = queries.get(qid)
            if request is None:
                raise ProtocolError(f"unknown query id '{qid}'", sequence.sequence_id, position)
            rankings.append(self.rerank(request))
        return RankingSequence.from_rankings(sequence.sequence_id, rankings, sequence.query_numbers)


def rerank_sequences(
    sequences: Sequence[QuerySequence],
    queries: Mapping[str, QueryRequest],
    documents: Mapping[str, Document],
    params: EvalParams,
    strategy: str,
    groups: Optional[GroupAssignment] = None,
    lam: float = 0.5,
    seed: int = 0,
    max_workers: int = 1
) -> List[RankingSequence]:
    """
    Rerank every sequence with its own SequenceReranker.

    The i-th sequence in sequence-id order draws from the stream (seed, i), so
    output does not depend on the number of workers.
    """
    check_seed(seed)
    ordered = sorted(sequences, key=lambda s: sequence_sort_key(s.sequence_id))

    def run_one(indexed: Tuple[int, QuerySequence]) -> RankingSequence:
        index, sequence = indexed
        logger.info(f"Reranking sequence {sequence.sequence_id} ({len(sequence)} queries) with {strategy}")
        reranker = SequenceReranker(strategy, documents, params, groups, lam, seed, index)
        return reranker.run(sequence, queries)

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        return list(executor.map(run_one, enumerate(ordered)))
