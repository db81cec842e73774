"""
Exposure-based group fairness and utility metrics.

The browsing model is the cascade behind Expected Reciprocal Rank: the user
examines rank 1, stops there with probability p(s|d) = c * r_d, and otherwise
moves on to the next rank with probability gamma. Exposure and utility share
this model; both are amortized over a sequence of rankings before group
fairness is computed.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import (
    ContractViolation,
    DataIntegrityError,
    DegenerateTotalsError,
    InvalidRankingError,
    ProtocolError,
)
from .model import (
    Amortization,
    Document,
    EvalParams,
    EvalResult,
    GroupAssignment,
    QueryRequest,
    Ranking,
    RankingSequence,
    sequence_sort_key,
)


logger = logging.getLogger(__name__)

UNKNOWN_GROUP = 'unknown'
MACRO_AGGREGATION = 'unweighted mean over distinct queries'


def stop_probability(relevance: int, params: EvalParams) -> float:
    """p(s|d) = c * r_d for binary relevance r_d."""
    return params.stop_coefficient * relevance


def examination_weight(position: int, prefix_stop_probs: Sequence[float], params: EvalParams) -> float:
    """
    Probability that the user examines rank `position`.

    Args:
        position: 1-based rank
        prefix_stop_probs: Stop probabilities of the documents above it
        params: Evaluation parameters (gamma)

    Returns:
        float: gamma^(position-1) * prod(1 - p_j) over the prefix
    """
    if position < 1 or len(prefix_stop_probs) != position - 1:
        raise ContractViolation(
            f"position {position} needs exactly {position - 1} prefix stop probabilities, "
            f"got {len(prefix_stop_probs)}"
        )
    weight = params.gamma ** (position - 1)
    for p in prefix_stop_probs:
        weight *= 1.0 - p
    return weight


def examination_weights(stop_probs: Sequence[float], gamma: float) -> List[float]:
    """Examination probability of every rank of a ranking, top to bottom."""
    weights = []
    weight = 1.0
    for p in stop_probs:
        weights.append(weight)
        weight *= gamma * (1.0 - p)
    return weights


def cascade_utility(stop_probs: Sequence[float], gamma: float) -> float:
    """Expected stopping reward: sum over ranks of examination weight times p(s|d)."""
    weights = examination_weights(stop_probs, gamma)
    return math.fsum(w * p for w, p in zip(weights, stop_probs))


def _lookup(documents: Mapping[str, Document], doc_id: str) -> Document:
    try:
        return documents[doc_id]
    except KeyError:
        raise DataIntegrityError(f"No corpus metadata for document '{doc_id}'") from None


def _stop_probabilities(order: Sequence[str], relevance: Mapping[str, int], params: EvalParams) -> List[float]:
    probs = []
    for doc_id in order:
        if doc_id not in relevance:
            raise DataIntegrityError(f"No relevance judgment for document '{doc_id}'")
        probs.append(stop_probability(relevance[doc_id], params))
    return probs


def ranking_exposure(
    ranking: Ranking,
    documents: Mapping[str, Document],
    relevance: Mapping[str, int],
    params: EvalParams
) -> Dict[str, float]:
    """
    Exposure of every author of a ranked document in a single ranking.

    A document counts toward each of its authors. Authors of no ranked
    document are absent from the result.
    """
    stop_probs = _stop_probabilities(ranking.order, relevance, params)
    weights = examination_weights(stop_probs, params.gamma)

    exposure: Dict[str, float] = {}
    for doc_id, weight in zip(ranking.order, weights):
        for author in _lookup(documents, doc_id).authors:
            exposure[author] = exposure.get(author, 0.0) + weight
    return exposure


def author_relevance(
    request: QueryRequest,
    documents: Mapping[str, Document],
    params: EvalParams
) -> Dict[str, float]:
    """
    Relevance of every author with a document in the query's pool.

    Independent of the ranking: each author receives the full stop probability
    of each of their pool documents.
    """
    judgments = request.judgments()
    relevance: Dict[str, float] = {}
    for doc_id in request.pool:
        p = stop_probability(judgments[doc_id], params)
        for author in _lookup(documents, doc_id).authors:
            relevance[author] = relevance.get(author, 0.0) + p
    return relevance


def ranking_utility(ranking: Ranking, relevance: Mapping[str, int], params: EvalParams) -> float:
    """Expected utility of a ranking under the same browsing model."""
    return cascade_utility(_stop_probabilities(ranking.order, relevance, params), params.gamma)


def _compensated_add(table: Dict[str, List[float]], key: str, value: float):
    # Neumaier summation: entry is [running sum, compensation]
    entry = table.get(key)
    if entry is None:
        table[key] = [value, 0.0]
        return
    total = entry[0] + value
    if abs(entry[0]) >= abs(value):
        entry[1] += (entry[0] - total) + value
    else:
        entry[1] += (value - total) + entry[0]
    entry[0] = total


@dataclass
class ExposureAccumulator:
    """
    Per-author exposure and relevance summed over a sequence of rankings.

    Single-owner: folding mutates in place. Sums are compensated so the result
    does not depend on how a sequence was split before merging.
    """

    rankings_seen: int = 0
    _exposure: Dict[str, List[float]] = field(default_factory=dict, repr=False)
    _relevance: Dict[str, List[float]] = field(default_factory=dict, repr=False)

    @property
    def exposure(self) -> Dict[str, float]:
        return {author: s + c for author, (s, c) in self._exposure.items()}

    @property
    def relevance(self) -> Dict[str, float]:
        return {author: s + c for author, (s, c) in self._relevance.items()}

    def add(self, exposure: Mapping[str, float], relevance: Mapping[str, float]) -> 'ExposureAccumulator':
        for author, value in exposure.items():
            _compensated_add(self._exposure, author, value)
        for author, value in relevance.items():
            _compensated_add(self._relevance, author, value)
        self.rankings_seen += 1
        return self

    def merge(self, other: 'ExposureAccumulator') -> 'ExposureAccumulator':
        for author, (s, c) in other._exposure.items():
            _compensated_add(self._exposure, author, s)
            _compensated_add(self._exposure, author, c)
        for author, (s, c) in other._relevance.items():
            _compensated_add(self._relevance, author, s)
            _compensated_add(self._relevance, author, c)
        self.rankings_seen += other.rankings_seen
        return self

    def copy(self) -> 'ExposureAccumulator':
        return ExposureAccumulator(
            self.rankings_seen,
            {a: list(v) for a, v in self._exposure.items()},
            {a: list(v) for a, v in self._relevance.items()},
        )


def fold_ranking(
    acc: ExposureAccumulator,
    ranking: Ranking,
    request: QueryRequest,
    documents: Mapping[str, Document],
    params: EvalParams
) -> ExposureAccumulator:
    """Add one ranking's author exposure and its query's author relevance to `acc`."""
    if ranking.qid != request.qid:
        raise ProtocolError(f"ranking for query '{ranking.qid}' folded with request '{request.qid}'")
    exposure = ranking_exposure(ranking, documents, request.judgments(), params)
    return acc.add(exposure, author_relevance(request, documents, params))


def group_shares(
    acc: ExposureAccumulator,
    groups: GroupAssignment,
    unknown_as_group: bool = False
) -> Tuple[Dict[str, float], Dict[str, float]]:
    """
    Each group's share of total exposure and of total relevance.

    Authors without a group are left out of numerators and denominators,
    unless `unknown_as_group` puts them in an extra 'unknown' group.

    Returns:
        tuple: (exposure share per group, relevance share per group)

    Raises:
        DegenerateTotalsError: If total exposure or total relevance is zero
    """
    universe = set(groups.universe)
    if unknown_as_group:
        universe.add(UNKNOWN_GROUP)
    universe = sorted(universe)

    def totals(per_author: Mapping[str, float]) -> Dict[str, float]:
        terms: Dict[str, List[float]] = {g: [] for g in universe}
        skipped = 0
        for author, value in per_author.items():
            group = groups.group_of(author)
            if group is None:
                if not unknown_as_group:
                    skipped += 1
                    continue
                group = UNKNOWN_GROUP
            terms[group].append(value)
        if skipped:
            logger.debug(f"{skipped} author(s) without a group left out of group totals")
        return {g: math.fsum(values) for g, values in terms.items()}

    exposure_totals = totals(acc.exposure)
    relevance_totals = totals(acc.relevance)
    total_exposure = math.fsum(exposure_totals.values())
    total_relevance = math.fsum(relevance_totals.values())
    if total_exposure <= 0.0:
        raise DegenerateTotalsError("total group exposure is zero")
    if total_relevance <= 0.0:
        raise DegenerateTotalsError("total group relevance is zero")

    exposure_share = {g: exposure_totals[g] / total_exposure for g in universe}
    relevance_share = {g: relevance_totals[g] / total_relevance for g in universe}
    return exposure_share, relevance_share


def group_deviations(exposure_share: Mapping[str, float], relevance_share: Mapping[str, float]) -> Dict[str, float]:
    if set(exposure_share) != set(relevance_share):
        raise ContractViolation(
            f"exposure groups {sorted(exposure_share)} differ from relevance groups {sorted(relevance_share)}"
        )
    return {g: exposure_share[g] - relevance_share[g] for g in sorted(exposure_share)}


def unfairness(exposure_share: Mapping[str, float], relevance_share: Mapping[str, float]) -> float:
    """L2 norm of the per-group deviation of exposure share from relevance share."""
    deviation = group_deviations(exposure_share, relevance_share)
    return math.sqrt(math.fsum(d * d for d in deviation.values()))


@dataclass
class SequenceTally:
    """Everything needed to summarize one or more sequences in either amortization mode."""

    micro: ExposureAccumulator = field(default_factory=ExposureAccumulator)
    per_query: Dict[str, ExposureAccumulator] = field(default_factory=dict)
    utilities: List[float] = field(default_factory=list)

    def merge(self, other: 'SequenceTally') -> 'SequenceTally':
        self.micro.merge(other.micro)
        for qid, acc in other.per_query.items():
            if qid in self.per_query:
                self.per_query[qid].merge(acc)
            else:
                self.per_query[qid] = acc.copy()
        self.utilities.extend(other.utilities)
        return self


def tally_sequence(
    run: RankingSequence,
    queries: Mapping[str, QueryRequest],
    documents: Mapping[str, Document],
    params: EvalParams
) -> SequenceTally:
    """Fold a sequence in order, keeping a whole-run and a per-query accumulator."""
    tally = SequenceTally()
    for entry in run:
        request = queries.get(entry.qid)
        if request is None:
            raise ProtocolError(f"unknown query id '{entry.qid}'", run.sequence_id, entry.position)
        try:
            entry.ranking.validate_against(request)
            judgments = request.judgments()
            exposure = ranking_exposure(entry.ranking, documents, judgments, params)
            relevance = author_relevance(request, documents, params)
            utility = ranking_utility(entry.ranking, judgments, params)
        except InvalidRankingError as e:
            raise ProtocolError(str(e), run.sequence_id, entry.position) from e
        except DataIntegrityError as e:
            raise DataIntegrityError(
                f"sequence {run.sequence_id} position {entry.position}: {e.message}", e.path, e.line
            ) from e

        tally.micro.add(exposure, relevance)
        tally.per_query.setdefault(entry.qid, ExposureAccumulator()).add(exposure, relevance)
        tally.utilities.append(utility)
    return tally


def summarize_tally(
    tally: SequenceTally,
    groups: GroupAssignment,
    params: EvalParams,
    unknown_as_group: bool = False
) -> EvalResult:
    """Turn a tally into an EvalResult for the configured amortization mode."""
    n = len(tally.utilities)
    mean_utility = math.fsum(tally.utilities) / n if n else 0.0
    metadata: Dict[str, object] = {'unknown_as_group': unknown_as_group}

    try:
        exposure_share, relevance_share = group_shares(tally.micro, groups, unknown_as_group)
        deviation = group_deviations(exposure_share, relevance_share)
        pooled = unfairness(exposure_share, relevance_share)
    except DegenerateTotalsError as e:
        exposure_share, relevance_share, deviation = {}, {}, {}
        pooled = None
        metadata['undefined_reason'] = str(e)

    if params.amortization is Amortization.MICRO:
        value = pooled
    else:
        per_query: Dict[str, Optional[float]] = {}
        for qid, acc in tally.per_query.items():
            try:
                per_query[qid] = unfairness(*group_shares(acc, groups, unknown_as_group))
            except DegenerateTotalsError:
                per_query[qid] = None
        defined = [u for u in per_query.values() if u is not None]
        value = math.fsum(defined) / len(defined) if defined else None
        if value is None:
            metadata['undefined_reason'] = 'no query has non-zero exposure and relevance'
        metadata.update({
            'aggregation': MACRO_AGGREGATION,
            'queries': len(per_query),
            'undefined_queries': len(per_query) - len(defined),
            'per_query_unfairness': per_query,
        })

    return EvalResult(
        exposure_share=exposure_share,
        relevance_share=relevance_share,
        deviation=deviation,
        unfairness=value,
        mean_utility=mean_utility,
        rankings_evaluated=n,
        amortization=params.amortization,
        metadata=metadata,
    )


def evaluate_run(
    run: RankingSequence,
    queries: Mapping[str, QueryRequest],
    documents: Mapping[str, Document],
    groups: GroupAssignment,
    params: EvalParams,
    unknown_as_group: bool = False
) -> EvalResult:
    """
    Evaluate one ranking sequence.

    Micro: one accumulator over the whole sequence. Macro: one accumulator per
    distinct query id, reporting the unweighted mean of per-query unfairness.
    Mean utility is the same in both modes.
    """
    return summarize_tally(tally_sequence(run, queries, documents, params), groups, params, unknown_as_group)


def evaluate_sequences(
    sequences: Sequence[RankingSequence],
    queries: Mapping[str, QueryRequest],
    documents: Mapping[str, Document],
    groups: GroupAssignment,
    params: EvalParams,
    unknown_as_group: bool = False,
    max_workers: int = 1
) -> EvalResult:
    """
    Evaluate all sequences of a run as one amortized sequence.

    Sequences are tallied in parallel and merged in sequence-id order, so the
    result does not depend on the number of workers. A per-sequence breakdown
    is kept in the result metadata.
    """
    ordered = sorted(sequences, key=lambda s: sequence_sort_key(s.sequence_id))

    def tally(sequence: RankingSequence) -> SequenceTally:
        logger.info(f"Tallying sequence {sequence.sequence_id} ({len(sequence)} rankings)")
        return tally_sequence(sequence, queries, documents, params)

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        tallies = list(executor.map(tally, ordered))

    merged = SequenceTally()
    breakdown = {}
    for sequence, part in zip(ordered, tallies):
        merged.merge(part)
        summary = summarize_tally(part, groups, params, unknown_as_group)
        breakdown[sequence.sequence_id] = {
            'utility': summary.mean_utility,
            'unfairness': summary.unfairness,
            'rankings_evaluated': summary.rankings_evaluated,
        }

    result = summarize_tally(merged, groups, params, unknown_as_group)
    metadata = dict(result.metadata)
    metadata['sequences'] = breakdown
    return EvalResult(
        exposure_share=result.exposure_share,
        relevance_share=result.relevance_share,
        deviation=result.deviation,
        unfairness=result.unfairness,
        mean_utility=result.mean_utility,
        rankings_evaluated=result.rankings_evaluated,
        amortization=result.amortization,
        metadata=metadata,
    )
