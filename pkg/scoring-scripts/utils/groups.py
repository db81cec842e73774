"""
Group definitions built from per-author statistics.

Authors are bucketed by left-closed thresholds: with cut points t1 < t2 < ... < tk
the buckets are v < t1, t1 <= v < t2, ..., v >= tk.
"""

import logging
from typing import List, Mapping, Sequence

from .errors import InvalidParameterError, ValidationError
from .model import GroupAssignment


logger = logging.getLogger(__name__)

HINDEX_THRESHOLDS = (5, 15, 30)


def bucket_labels(thresholds: Sequence[int], stat_name: str = 'h') -> List[str]:
    """
    Labels for the buckets defined by `thresholds`.

    Example:
        bucket_labels([5, 15, 30]) -> ['h<5', '5≤h<15', '15≤h<30', 'h≥30']
    """
    labels = [f"{stat_name}<{thresholds[0]}"]
    for low, high in zip(thresholds, thresholds[1:]):
        labels.append(f"{low}≤{stat_name}<{high}")
    labels.append(f"{stat_name}≥{thresholds[-1]}")
    return labels


def bucket_of(value: int, thresholds: Sequence[int], labels: Sequence[str]) -> str:
    for threshold, label in zip(thresholds, labels):
        if value < threshold:
            return label
    return labels[-1]


def group_from_thresholds(values: Mapping[str, int], thresholds: Sequence[int], stat_name: str = 'h') -> GroupAssignment:
    """
    Assign every author to the bucket of their statistic.

    Args:
        values: author id → non-negative integer statistic
        thresholds: Strictly increasing cut points
        stat_name: Name used in the bucket labels

    Returns:
        GroupAssignment: Universe is every bucket, populated or not

    Raises:
        InvalidParameterError: If thresholds are empty or not strictly increasing
        ValidationError: If a statistic is negative
    """
    thresholds = list(thresholds)
    if not thresholds:
        raise InvalidParameterError("At least one threshold is required")
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise InvalidParameterError(f"Thresholds must be strictly increasing, got {thresholds}")

    labels = bucket_labels(thresholds, stat_name)
    pairs = []
    for author, value in values.items():
        if value < 0:
            raise ValidationError(f"Author '{author}' has negative {stat_name} ({value})")
        pairs.append((author, bucket_of(value, thresholds, labels)))

    logger.info(f"Bucketed {len(pairs)} authors into {len(labels)} groups by {stat_name}")
    return GroupAssignment.from_pairs(pairs, labels)


def group_from_hindex(hindex: Mapping[str, int]) -> GroupAssignment:
    """Four h-index groups: h<5, 5≤h<15, 15≤h<30, h≥30."""
    return group_from_thresholds(hindex, HINDEX_THRESHOLDS, 'h')
