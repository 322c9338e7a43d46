"""Python front end for the mixsearch core."""

import json

from . import _core
from ._core import (
    BackendError,
    ConfigError,
    ContractError,
    DataError,
    Error,
    FixtureError,
    ParetoArchive,
    dominates,
)

__all__ = [
    "BackendError",
    "ConfigError",
    "ContractError",
    "DataError",
    "Error",
    "FixtureError",
    "ParetoArchive",
    "archive",
    "dominates",
    "draw",
    "replay",
    "report",
    "run",
    "verify",
]


def verify(response, constraints):
    """Checks `response` against a list of constraint dicts."""
    return json.loads(_core.verify_json(response, json.dumps(constraints)))


def draw(pool_manifest, action, budget_tokens, seed):
    """Manifest summary for one budgeted draw."""
    return json.loads(_core.draw_json(str(pool_manifest), json.dumps(action), budget_tokens, seed))


def run(config, out, stop_after=None):
    return json.loads(_core.run_json(str(config), str(out), stop_after))


def replay(fixture, out):
    return json.loads(_core.replay_json(str(fixture), str(out)))


def report(run_dir):
    return json.loads(_core.report_json(str(run_dir)))


def archive(run_dir):
    return json.loads(_core.archive_json(str(run_dir)))
