"""Discrete-event simulator comparing SDN rule-installation strategies
for camera-to-vehicle query services."""

from ._core import (
    ParseError,
    PathError,
    Scenario,
    SimResult,
    ValidationError,
    compare,
    hop_distance,
    load_scenario,
    load_scenario_files,
    path_find,
    run,
    write_compare_report,
    write_report,
)

__all__ = [
    "ParseError",
    "PathError",
    "Scenario",
    "SimResult",
    "ValidationError",
    "compare",
    "hop_distance",
    "load_scenario",
    "load_scenario_files",
    "path_find",
    "run",
    "write_compare_report",
    "write_report",
]
