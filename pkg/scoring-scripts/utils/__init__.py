"""
Utilities for exposure-based fair ranking evaluation.

This package provides:
- Domain types and the error hierarchy
- Cascade exposure, author relevance, group fairness and utility metrics
- Loaders and writers for corpus, query, group, run and sequence files
- Run validation and evaluation reports
- Query sequence generation and baseline rerankers
- Group definitions from author statistics and synthetic collections
"""

from .errors import (
    FairRankError,
    UsageError,
    DataFormatError,
    DataIntegrityError,
    ValidationError,
    DegenerateTotalsError,
)
from .model import (
    Document,
    QueryRequest,
    Ranking,
    RankingSequence,
    GroupAssignment,
    Amortization,
    EvalParams,
    EvalResult,
)
from .metrics import (
    ExposureAccumulator,
    stop_probability,
    examination_weight,
    ranking_exposure,
    author_relevance,
    fold_ranking,
    group_shares,
    unfairness,
    ranking_utility,
    evaluate_run,
    evaluate_sequences,
)
from .data_loaders import load_corpus, load_queries, load_groups
from .run_files import load_run, write_run, load_sequences, write_sequences
from .validators import validate_run
from .tradeoff import tradeoff_points
from .sequence_generator import generate_sequences
from .rerankers import (
    ScoredPool,
    RerankerState,
    score_pool,
    rerank_random,
    rerank_max_utility,
    rerank_fairness_controller,
    SequenceReranker,
)
from .groups import group_from_thresholds, group_from_hindex

__all__ = [
    'FairRankError',
    'UsageError',
    'DataFormatError',
    'DataIntegrityError',
    'ValidationError',
    'DegenerateTotalsError',
    'Document',
    'QueryRequest',
    'Ranking',
    'RankingSequence',
    'GroupAssignment',
    'Amortization',
    'EvalParams',
    'EvalResult',
    'ExposureAccumulator',
    'stop_probability',
    'examination_weight',
    'ranking_exposure',
    'author_relevance',
    'fold_ranking',
    'group_shares',
    'unfairness',
    'ranking_utility',
    'evaluate_run',
    'evaluate_sequences',
    'load_corpus',
    'load_queries',
    'load_groups',
    'load_run',
    'write_run',
    'load_sequences',
    'write_sequences',
    'validate_run',
    'tradeoff_points',
    'generate_sequences',
    'ScoredPool',
    'RerankerState',
    'score_pool',
    'rerank_random',
    'rerank_max_utility',
    'rerank_fairness_controller',
    'SequenceReranker',
    'group_from_thresholds',
    'group_from_hindex',
]
