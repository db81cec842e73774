"""
Synthetic collections for desk-scale experiments.

make_synthetic_collection: two author groups, one over-represented, whose
documents also share more tokens with the queries, so predicted relevance is
correlated with group membership.

make_tradeoff_fixture: a small deterministic collection on which the fairness
controller's greedy choice changes with lambda.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from .errors import InvalidParameterError
from .model import Document, GroupAssignment, QueryRequest


logger = logging.getLogger(__name__)

MAJORITY_GROUP = 'majority'
MINORITY_GROUP = 'minority'

VOCABULARY = (
    'fair ranking exposure author group relevance query search retrieval model '
    'neural citation graph learning evaluation metric user click browsing bias '
    'sequence amortized utility cascade scholar paper corpus index embedding'
).split()


@dataclass(frozen=True)
class SyntheticCollection:
    documents: Dict[str, Document]
    queries: List[QueryRequest]
    groups: GroupAssignment


def make_synthetic_collection(
    n_queries: int = 20,
    pool_size: int = 6,
    seed: int = 0,
    majority_fraction: float = 0.7,
    authors_per_group: int = 10
) -> SyntheticCollection:
    """
    Build a two-group synthetic collection.

    Each query is three vocabulary words. Each pool document is written by one
    or two authors of a single group; majority documents have each query token
    in their title with probability 0.8, minority documents with probability
    0.3. A document is relevant with probability 0.2 + 0.6 * (overlap fraction).

    Args:
        n_queries: Number of queries
        pool_size: Documents per query pool
        seed: Seed for the PCG64 generator
        majority_fraction: Probability that a document belongs to the majority group
        authors_per_group: Size of each group's author population

    Returns:
        SyntheticCollection: Documents, training-style queries and groups
    """
    if n_queries < 1 or pool_size < 1 or authors_per_group < 1:
        raise InvalidParameterError("n_queries, pool_size and authors_per_group must be >= 1")
    if not 0.0 < majority_fraction < 1.0:
        raise InvalidParameterError(f"majority_fraction must be in (0, 1), got {majority_fraction}")

    rng = np.random.Generator(np.random.PCG64(seed))
    authors = {
        group: [f"{group[:3]}{i:03d}" for i in range(authors_per_group)]
        for group in (MAJORITY_GROUP, MINORITY_GROUP)
    }
    overlap_rate = {MAJORITY_GROUP: 0.8, MINORITY_GROUP: 0.3}

    documents: Dict[str, Document] = {}
    queries = []
    for q in range(1, n_queries + 1):
        query_words = [str(w) for w in rng.choice(VOCABULARY, size=3, replace=False)]
        pool = []
        relevance = {}
        for k in range(1, pool_size + 1):
            group = MAJORITY_GROUP if rng.random() < majority_fraction else MINORITY_GROUP
            n_authors = int(rng.integers(1, 3))
            doc_authors = tuple(str(a) for a in rng.choice(authors[group], size=n_authors, replace=False))
            shared = [w for w in query_words if rng.random() < overlap_rate[group]]
            filler = [str(w) for w in rng.choice(VOCABULARY, size=2)]
            doc_id = f"s{q:03d}{k:02d}"
            documents[doc_id] = Document(doc_id, doc_authors, ' '.join(shared + filler), None)
            pool.append(doc_id)
            relevance[doc_id] = int(rng.random() < 0.2 + 0.6 * len(shared) / len(query_words))
        queries.append(QueryRequest(
            qid=f"q{q}",
            text=' '.join(query_words),
            frequency=float(rng.uniform(0.1, 1.0)),
            pool=tuple(pool),
            relevance=relevance,
        ))

    groups = GroupAssignment.from_pairs(
        (author, group) for group, members in authors.items() for author in members
    )
    logger.info(f"Generated {n_queries} synthetic queries over {len(documents)} documents (seed {seed})")
    return SyntheticCollection(documents, queries, groups)


def make_tradeoff_fixture(n_queries: int = 4) -> SyntheticCollection:
    """
    Deterministic two-group fixture for the fairness/utility tradeoff.

    Every query is "fair ranking exposure" with a three-document pool:
        a  majority author, title matches all query tokens, relevant
        b  minority author, two of three tokens, relevant
        z  minority author, one token, not relevant
    Max-utility ranks a, b, z and over-exposes the majority group; the
    controller moves b to the top as lambda grows.
    """
    documents: Dict[str, Document] = {}
    queries = []
    pairs = []
    titles = {'a': 'fair ranking exposure', 'b': 'fair ranking', 'z': 'fair'}
    owners = {'a': MAJORITY_GROUP, 'b': MINORITY_GROUP, 'z': MINORITY_GROUP}
    judged = {'a': 1, 'b': 1, 'z': 0}
    for q in range(1, n_queries + 1):
        pool = []
        for suffix in ('a', 'b', 'z'):
            doc_id = f"t{q}{suffix}"
            author = f"{owners[suffix][:3]}-{q}{suffix}"
            documents[doc_id] = Document(doc_id, (author,), titles[suffix], None)
            pairs.append((author, owners[suffix]))
            pool.append(doc_id)
        queries.append(QueryRequest(
            qid=f"t{q}",
            text='fair ranking exposure',
            frequency=1.0,
            pool=tuple(pool),
            relevance={f"t{q}{s}": judged[s] for s in ('a', 'b', 'z')},
        ))
    return SyntheticCollection(documents, queries, GroupAssignment.from_pairs(pairs))
