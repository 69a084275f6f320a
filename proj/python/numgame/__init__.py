"""Active Bayesian concept learning in the Number Game."""

import json

from ._core import (
    BackendUnavailable,
    DomainError,
    Error,
    ParseError,
    StateError,
    UsageError,
    canonicalize,
    catalog,
    cli,
    entropy,
    eig_score,
    extension,
    predictive,
    run_trial_jsonl,
)


def run_trial(rule, policy="eig", seed=0, profile="full", budget=50, particles=20, conf=0.95):
    """Runs one trial with the grammar backend; returns (header, iterations) as dicts."""
    lines = [json.loads(l) for l in run_trial_jsonl(rule, policy, seed, profile, budget, particles, conf).splitlines()]
    return lines[0], lines[1:]


__all__ = [
    "BackendUnavailable",
    "DomainError",
    "Error",
    "ParseError",
    "StateError",
    "UsageError",
    "canonicalize",
    "catalog",
    "cli",
    "entropy",
    "eig_score",
    "extension",
    "predictive",
    "run_trial",
    "run_trial_jsonl",
]
