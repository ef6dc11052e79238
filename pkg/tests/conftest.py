"""Shared fixtures: cached sector spectra and the acceptance summary table."""

import os

import pytest

import scarkit

RUN_EXTENDED = os.environ.get("SCARKIT_EXTENDED", "") not in ("", "0")

extended = pytest.mark.skipif(
    not RUN_EXTENDED,
    reason="extended tier (set SCARKIT_EXTENDED=1); large-L runs take minutes")


@pytest.fixture(scope="session")
def spectrum_cache():
    """diagonalized resonant sector per L at the standard working point.

    U/g=2, g=omega=50, u=0.5 throughout; memoized because several test
    modules and most acceptance criteria share the same sectors.
    """
    cache = {}

    def get(L):
        if L not in cache:
            basis = scarkit.SectorBasis(L, L // 2)
            family = scarkit.resonant_family(0, 0, "+")
            params = family.params(g=50.0, u=0.5)
            ham = scarkit.build_effective_resonant(basis, params, 0, 0, "+")
            cache[L] = scarkit.diagonalize(ham)
        return cache[L]

    return get


@pytest.fixture(scope="session")
def standard_params():
    return scarkit.resonant_family(0, 0, "+").params(g=50.0, u=0.5)


# ------------------------------------------------- acceptance summary table

_ACCEPTANCE_RESULTS = {}


def pytest_runtest_logreport(report):
    if report.when == "setup" and report.outcome == "skipped":
        pass  # fall through: record skips too
    elif report.when != "call":
        return
    name = report.nodeid.rsplit("::", 1)[-1].split("[")[0]
    if not name.startswith("test_criterion_"):
        return
    parts = name.split("_", 3)
    number = int(parts[2])
    label = parts[3] if len(parts) > 3 else name
    outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
        report.outcome, report.outcome.upper())
    entry = _ACCEPTANCE_RESULTS.setdefault(number, ["PENDING", label])
    rank = {"FAIL": 3, "PASS": 2, "SKIP": 1, "PENDING": 0}
    if rank[outcome] > rank.get(entry[0], 0):
        entry[0] = outcome
        if outcome != "SKIP":
            entry[1] = label


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    tw = terminalreporter
    tw.ensure_newline()
    tw.section("acceptance criteria", sep="=")
    for number in sorted(_ACCEPTANCE_RESULTS):
        outcome, label = _ACCEPTANCE_RESULTS[number]
        marker = {"PASS": "green", "FAIL": "red"}.get(outcome)
        tw.write_line(f"criterion {number:2d} [{outcome}] {label}",
                      **({marker: True} if marker else {"yellow": True}))
