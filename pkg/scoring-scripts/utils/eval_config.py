"""
Evaluation defaults and reranking strategy configurations.

Defines the default browsing-model parameters, the sequence shape, the
available reranking strategies and naming conventions for output labels.
"""

import json
import os
from typing import Any, Dict, Optional

from .errors import ConfigError, UsageError

DEFAULT_PARAMS = {
    'gamma': 0.5,               # continuation probability
    'stop_coefficient': 0.7,    # p(s|d) = 0.7 * r_d
    'amortization': 'micro',
    'n_sequences': 5,
    'sequence_length': 25000,
    'seed': 0,
    'lambda': 0.5,
    'strategy': 'controller',
}

# Accepted JSON types per parameter; bools are rejected everywhere
NUMBER = ((int, float), 'a number')
INTEGER = ((int,), 'an integer')
TEXT = ((str,), 'a string')

PARAM_TYPES = {
    'gamma': NUMBER,
    'stop_coefficient': NUMBER,
    'amortization': TEXT,
    'n_sequences': INTEGER,
    'sequence_length': INTEGER,
    'seed': INTEGER,
    'lambda': NUMBER,
    'strategy': TEXT,
}

STRATEGY_CONFIG = {
    'random': {
        'uses_scores': False,
        'uses_groups': False,
        'stateful': False,
        'display_name': 'Random shuffle',
    },
    'maxutil': {
        'uses_scores': True,
        'uses_groups': False,
        'stateful': False,
        'display_name': 'Max expected utility',
    },
    'controller': {
        'uses_scores': True,
        'uses_groups': True,
        'stateful': True,
        'display_name': 'Greedy fairness controller',
    },
}

# Strategy name aliases for CLI convenience
STRATEGY_ALIASES = {
    'shuffle': 'random',
    'max-utility': 'maxutil',
    'max_utility': 'maxutil',
    'fair': 'controller',
    'fairness-controller': 'controller',
}

DEFAULT_MAX_WORKERS = 4
THREADS_ENV_VAR = 'FAIRRANK_THREADS'


def resolve_strategy_name(name: str) -> str:
    """Map an alias onto its canonical strategy name."""
    name = STRATEGY_ALIASES.get(name, name)
    if name not in STRATEGY_CONFIG:
        available = list(STRATEGY_CONFIG.keys()) + list(STRATEGY_ALIASES.keys())
        raise ValueError(
            f"Unknown strategy '{name}'. Available strategies: {', '.join(available)}"
        )
    return name


def get_strategy_config(name: str) -> Dict[str, Any]:
    """
    Get configuration for a reranking strategy.

    Args:
        name: Strategy name or alias

    Returns:
        dict: Strategy configuration

    Raises:
        ValueError: If the strategy is not recognized
    """
    return STRATEGY_CONFIG[resolve_strategy_name(name)]


def get_all_strategy_names():
    """Get list of all supported strategy names."""
    return list(STRATEGY_CONFIG.keys())


def get_file_safe_name(label: str) -> str:
    """
    Convert a run label to file-safe format.

    Args:
        label: Run label (e.g., 'controller-0.25')

    Returns:
        str: File-safe name (e.g., 'controller-0-25')
    """
    return label.replace('.', '-').replace('/', '-').replace(' ', '_')


def run_label(strategy: str, lam: Optional[float] = None) -> str:
    """Label a run by strategy, adding lambda for the controller."""
    strategy = resolve_strategy_name(strategy)
    if STRATEGY_CONFIG[strategy]['uses_groups'] and lam is not None:
        return f"{strategy}-{lam:g}"
    return strategy


def get_max_workers() -> int:
    """Worker pool size, capped by FAIRRANK_THREADS when set."""
    raw = os.getenv(THREADS_ENV_VAR)
    if raw is None or raw.strip() == '':
        return DEFAULT_MAX_WORKERS
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV_VAR} must be a positive integer, got '{raw}'") from None
    if value < 1:
        raise UsageError(f"{THREADS_ENV_VAR} must be a positive integer, got '{raw}'")
    return value


def load_params_file(path: Optional[str]) -> Dict[str, Any]:
    """
    Merge a JSON parameter file over DEFAULT_PARAMS.

    Args:
        path: JSON file with any subset of DEFAULT_PARAMS keys, or None

    Returns:
        dict: Effective defaults

    Raises:
        ConfigError: If the file is unreadable, names an unknown key or a value has the wrong type
    """
    params = dict(DEFAULT_PARAMS)
    if path is None:
        return params
    try:
        with open(path, 'r') as f:
            overrides = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read parameter file '{path}': {e}") from e
    if not isinstance(overrides, dict):
        raise ConfigError(f"Parameter file '{path}' must hold a JSON object")
    unknown = sorted(set(overrides) - set(DEFAULT_PARAMS))
    if unknown:
        raise ConfigError(f"Unknown parameter(s) in '{path}': {', '.join(unknown)}")
    for key, value in overrides.items():
        allowed, expected = PARAM_TYPES[key]
        if isinstance(value, bool) or not isinstance(value, allowed):
            raise ConfigError(f"Parameter '{key}' in '{path}' must be {expected}, got {value!r}")
    params.update(overrides)
    return params
