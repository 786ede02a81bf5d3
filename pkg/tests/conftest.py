"""Shared fixtures and the per-criterion summary.

The acceptance tests live in test_acceptance.py, one test per criterion;
after the run a summary section prints one PASS/FAIL line for each.
"""

from __future__ import annotations

import re
from pathlib import Path

import pytest
from hypothesis import settings

from daesa import parse

MODELS_DIR = Path(__file__).resolve().parent.parent / "models"

settings.register_profile(
    "suite", derandomize=True, max_examples=50, deadline=None
)
settings.load_profile("suite")


def model_source(name: str) -> str:
    return (MODELS_DIR / name).read_text()


@pytest.fixture(scope="session")
def clutch():
    return parse(model_source("clutch.dae"))


@pytest.fixture(scope="session")
def pendulum():
    return parse(model_source("pendulum.dae"))


@pytest.fixture(scope="session")
def rldc2():
    return parse(model_source("rldc2.dae"))


CRITERION_TITLES = {
    1: "clutch engaged: index 1, latent e3', consistency {e3}",
    2: "clutch released: index 0, no latent equations",
    3: "clutch change F->T: conflict block, removed {e3@cur}, restart system",
    4: "offsets are the elementwise-smallest optimal duals (brute force)",
    5: "differentiation counts equal equation offsets on degree<=1 systems",
    6: "scaling every weight by M scales the offsets by M",
    7: "coarse decomposition independent of the maximum matching",
    8: "fine block partition independent of the complete matching",
    9: "dropping the overdetermined part leaves none behind",
    10: "offset solutions satisfy feasibility, slackness and duality",
    11: "smallest determining array size equals the structural index",
    12: "rldc2 parses; 4 square nonsingular modes; stable golden report",
    13: "repeated CLI runs produce byte-identical JSON",
}

_CRITERION_RE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")
_PHASE_RANK = {"setup": 1, "call": 2, "teardown": 0}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    best: dict[int, tuple[int, object]] = {}
    for reports in terminalreporter.stats.values():
        for rep in reports:
            nodeid = getattr(rep, "nodeid", "")
            when = getattr(rep, "when", None)
            match = _CRITERION_RE.search(nodeid)
            if not match or when not in _PHASE_RANK:
                continue
            num = int(match.group(1))
            rank = _PHASE_RANK[when]
            if num not in best or rank > best[num][0]:
                best[num] = (rank, rep)
    if not best:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(best):
        rep = best[num][1]
        if rep.passed:
            word = "PASS"
        elif rep.skipped:
            word = "SKIP"
        else:
            word = "FAIL"
        title = CRITERION_TITLES.get(num, "")
        terminalreporter.write_line(f"criterion {num:2d}: {word}  {title}")
