"""
Utility/unfairness points for comparing runs.

Upper-left points (high utility, low unfairness) are preferred.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import UsageError
from .metrics import evaluate_sequences
from .model import Document, EvalParams, EvalResult, GroupAssignment, QueryRequest, RankingSequence


logger = logging.getLogger(__name__)

RunInput = Union[RankingSequence, Sequence[RankingSequence]]


@dataclass(frozen=True)
class TradeoffPoint:
    label: str
    utility: float
    unfairness: Optional[float]
    result: EvalResult


def tradeoff_points(
    runs: Sequence[Tuple[str, RunInput]],
    queries: Mapping[str, QueryRequest],
    documents: Mapping[str, Document],
    groups: GroupAssignment,
    params: EvalParams,
    unknown_as_group: bool = False,
    max_workers: int = 1
) -> List[TradeoffPoint]:
    """
    Evaluate each labelled run and return its (utility, unfairness) point.

    Args:
        runs: (label, run) pairs; a run is one RankingSequence or all of a run's sequences
        queries: qid → QueryRequest shared by all runs
        documents: Corpus lookup
        groups: Group definition
        params: Evaluation parameters
        unknown_as_group: Put unassigned authors in an 'unknown' group
        max_workers: Runs evaluated in parallel

    Returns:
        list: One TradeoffPoint per run, ordered by label

    Raises:
        UsageError: If no runs are given or a label repeats
    """
    if not runs:
        raise UsageError("No runs to compare")
    labels = [label for label, _ in runs]
    repeated = sorted({label for label in labels if labels.count(label) > 1})
    if repeated:
        raise UsageError(f"Run labels must be unique: {', '.join(repeated)}")

    def evaluate(label: str, run: RunInput) -> TradeoffPoint:
        sequences = [run] if isinstance(run, RankingSequence) else list(run)
        result = evaluate_sequences(sequences, queries, documents, groups, params, unknown_as_group)
        return TradeoffPoint(label, result.mean_utility, result.unfairness, result)

    points: Dict[str, TradeoffPoint] = {}
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        futures = {executor.submit(evaluate, label, run): label for label, run in runs}
        for future in as_completed(futures):
            point = future.result()
            points[point.label] = point
            logger.info(f"Evaluated {point.label}: utility {point.utility:.4f}, unfairness {point.unfairness}")

    return [points[label] for label in sorted(points)]
