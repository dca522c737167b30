"""Python access to the benchmark core."""

import json

from ._core import (
    PROTOCOL_VERSION,
    ParseError,
    ProtocolError,
    canonical_line,
    kinematics,
    message_type,
    parse_tracks,
    path_length,
    step_unicycle,
    time_to_collision,
)
from ._core import run_benchmark as _run_benchmark


def run_benchmark(config):
    """Accepts a dict with the same keys as the JSON config file."""
    return _run_benchmark(json.dumps(config))


__all__ = [
    "PROTOCOL_VERSION",
    "ParseError",
    "ProtocolError",
    "canonical_line",
    "kinematics",
    "message_type",
    "parse_tracks",
    "path_length",
    "run_benchmark",
    "step_unicycle",
    "time_to_collision",
]
