"""
Evaluation query sequences sampled by query frequency.

Each sequence is `length` query ids drawn i.i.d. with replacement, with
probability proportional to the query's normalized frequency. Sequence i uses
its own PCG64 stream seeded from (seed, i), so sequences can be generated in
parallel and are reproducible across platforms.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Sequence

import numpy as np

from .errors import InvalidParameterError
from .model import QueryRequest
from .run_files import QuerySequence


logger = logging.getLogger(__name__)

BIT_GENERATOR = 'PCG64'


def sampling_probabilities(queries: Sequence[QueryRequest]) -> np.ndarray:
    """Frequencies normalized to a probability vector."""
    frequencies = np.array([q.frequency for q in queries], dtype=float)
    total = frequencies.sum()
    if total <= 0.0:
        raise InvalidParameterError("At least one query must have frequency > 0 to sample sequences")
    return frequencies / total


def sample_sequence(queries: Sequence[QueryRequest], probabilities: np.ndarray, length: int, seed: int, index: int) -> List[str]:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))
    picks = rng.choice(len(queries), size=length, replace=True, p=probabilities)
    return [queries[i].qid for i in picks]


def generate_sequences(
    queries: Sequence[QueryRequest],
    n_sequences: int = 5,
    length: int = 25000,
    seed: int = 0,
    max_workers: int = 1
) -> List[List[str]]:
    """
    Sample evaluation query sequences.

    Args:
        queries: Candidate queries with their frequencies
        n_sequences: Number of sequences (default: 5)
        length: Queries per sequence (default: 25000)
        seed: Base seed; sequence i draws from SeedSequence([seed, i])
        max_workers: Parallel sequences

    Returns:
        list: One list of query ids per sequence

    Raises:
        InvalidParameterError: On no queries, all-zero frequencies, a
            non-positive length or a negative sequence count
    """
    if not queries:
        raise InvalidParameterError("No queries to sample from")
    if length < 1:
        raise InvalidParameterError(f"Sequence length must be >= 1, got {length}")
    if n_sequences < 0:
        raise InvalidParameterError(f"Number of sequences must be >= 0, got {n_sequences}")
    if seed < 0:
        raise InvalidParameterError(f"Seed must be >= 0, got {seed}")

    queries = list(queries)
    probabilities = sampling_probabilities(queries)
    logger.info(f"Sampling {n_sequences} sequence(s) of {length} from {len(queries)} queries (seed {seed})")

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        return list(executor.map(
            lambda i: sample_sequence(queries, probabilities, length, seed, i),
            range(n_sequences)
        ))


def to_query_sequences(qid_lists: Sequence[Sequence[str]]) -> List[QuerySequence]:
    """Number sequences 0..n-1 and their queries 1..N."""
    return [
        QuerySequence(str(i), tuple(range(1, len(qids) + 1)), tuple(qids))
        for i, qids in enumerate(qid_lists)
    ]


def sequence_metadata(n_sequences: int, length: int, seed: int, n_queries: int) -> Dict[str, object]:
    """Sidecar metadata identifying how a sequence file was generated."""
    return {
        'bit_generator': BIT_GENERATOR,
        'numpy_version': np.__version__,
        'seed_derivation': 'SeedSequence([seed, sequence_index])',
        'seed': seed,
        'n_sequences': n_sequences,
        'length': length,
        'queries': n_queries,
        'sampling': 'iid with replacement, proportional to frequency',
    }
