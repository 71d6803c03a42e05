"""Shared fixtures: one pipeline run per model, reused across modules.

Tests marked ``@pytest.mark.criterion(k, title)`` feed the acceptance table
printed at the end of the session.
"""

from fractions import Fraction
from types import SimpleNamespace

import pytest

from primform.corpus import ALGEBRAS
from primform.hochschild import compute_tpoly_and_omega
from primform.pipeline import run_pipeline
from primform.polynomial import polynomial_cy, polynomial_package
from primform.serialize import cy_from_json

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    k, title = mark.args
    entry = _criteria.setdefault(k, {"title": title, "ok": True, "tests": 0})
    if rep.when == "call":
        entry["tests"] += 1
    if rep.failed:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_criteria):
        e = _criteria[k]
        status = "PASS" if e["ok"] and e["tests"] else "FAIL"
        terminalreporter.write_line(f"criterion {k:>2}: {status}  {e['title']}")


def _run(P, cy, N=4, validation=True):
    stages = {}
    report, fr = run_pipeline(P, cy, N, validation=validation, stages=stages)
    return SimpleNamespace(report=report, fr=fr, **stages)


@pytest.fixture(scope="session")
def a2():
    P = polynomial_package(3, Fraction(8))
    return _run(P, polynomial_cy(P))


@pytest.fixture(scope="session")
def a3():
    P = polynomial_package(4, Fraction(8))
    return _run(P, polynomial_cy(P), validation=False)


@pytest.fixture(scope="session")
def trivial():
    A = ALGEBRAS["trivial"]()
    P = compute_tpoly_and_omega(A, 8)
    return _run(P, cy_from_json(P, A.cy))


@pytest.fixture(scope="session")
def small_packages():
    """Every corpus dg algebra with valid axioms at L = 3 and 4, plus A2 and A3 at W = 3."""
    out = {}
    for name in ("trivial", "exterior1", "exterior2", "dgex"):
        for L in (3, 4):
            out[f"{name}@{L}"] = compute_tpoly_and_omega(ALGEBRAS[name](), L)
    out["A2@W=3"] = polynomial_package(3, Fraction(3))
    out["A3@W=3"] = polynomial_package(4, Fraction(3))
    return out
