"""Scenario files, sweeps, CSV output and verification suites."""

from .config import ConfigValidationError, ParseError, ScenarioConfig, Sweep, load_config, parse_config
from .runner import CSV_COLUMNS, SweepRow, emit_csv, run_scenario, scenario_points
from .verify import SUITES, SuiteReport, run_suites

__all__ = [
    "CSV_COLUMNS", "ConfigValidationError", "ParseError", "SUITES", "ScenarioConfig", "SuiteReport",
    "Sweep", "SweepRow", "emit_csv", "load_config", "parse_config", "run_scenario", "run_suites",
    "scenario_points",
]
