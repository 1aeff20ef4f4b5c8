"""Risk-aware two-slice bandwidth/CPU negotiation with digital-twin checks."""

import json

from ._core import (
    Action,
    ContractViolation,
    EstimatorDomainError,
    NegotiationStatus,
    ParameterError,
    ParseError,
    ProposerError,
    QueueState,
    Strategy,
    TrialResult,
    UndefinedLatencyError,
    confidence_score,
    empirical_cvar,
    empirical_var,
    energy_saving_fraction,
    power_w,
    predict,
    prop_fair_split,
    run_trial,
    step_queues,
)
from . import _core


def default_config():
    return json.loads(_core.default_config())


def load_config(path):
    return json.loads(_core.load_config(str(path)))


def run_experiment(config=None, output_dir=""):
    """config: dict (defaults when None). Returns (results, summary rows)."""
    text = _core.default_config() if config is None else json.dumps(config)
    return _core.run_experiment(text, str(output_dir))


__all__ = [name for name in dir() if not name.startswith("_") and name != "json"]
