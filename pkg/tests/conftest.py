"""Per-criterion PASS/FAIL summary for tests marked ``acceptance``."""

from collections import defaultdict

import pytest

_RESULTS = defaultdict(list)
_META = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        n = mark.kwargs["criterion"]
        _META[n] = (mark.kwargs["title"], mark.kwargs["limit"], mark.kwargs.get("per_run", False))
        _RESULTS[n].append((item.name, rep.passed, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_RESULTS):
        title, limit, per_run = _META[n]
        runs = _RESULTS[n]
        elapsed = sum(d for _, _, d in runs)
        # per-run limits are asserted inside the tests themselves
        ok = all(p for _, p, _ in runs) and (per_run or elapsed < limit)
        failed = [name for name, p, _ in runs if not p]
        note = f"  failed: {', '.join(failed)}" if failed else ""
        if not failed and not per_run and elapsed >= limit:
            note = "  over time limit"
        tr.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {elapsed:7.2f}s / {limit:g}s{' per run' if per_run else ''}  {title}{note}")
