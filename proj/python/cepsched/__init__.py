"""Python access to the cepsched simulator and latency model."""

import json as _json
from typing import Any, Mapping, Union

from . import _cepsched
from ._cepsched import (
    ConfigError,
    CostModelError,
    bench_scheduling_latency,
    pair_gains,
    predict_alpha_tcount,
    predict_overlap,
    queue_peak,
    run_experiment,
    selftest_worked_example,
)

Config = Union[str, Mapping[str, Any]]


def _as_text(config: Config) -> str:
    return config if isinstance(config, str) else _json.dumps(config)


def run(config: Config) -> dict:
    """Simulate a config (JSON text or dict) and return summary metrics."""
    return _cepsched.run(_as_text(config))


def generate_stream(config: Config) -> list:
    """Events of the config's workload as (seq, ts, type, key) tuples."""
    return _cepsched.generate_stream(_as_text(config))


__all__ = [
    "ConfigError",
    "CostModelError",
    "bench_scheduling_latency",
    "generate_stream",
    "pair_gains",
    "predict_alpha_tcount",
    "predict_overlap",
    "queue_peak",
    "run",
    "run_experiment",
    "selftest_worked_example",
]
