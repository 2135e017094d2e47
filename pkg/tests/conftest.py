import random

import pytest

ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def rng():
    return random.Random(20240601)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion this test checks")
    config.stash[ACCEPTANCE_KEY] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed or rep.skipped):
        return
    if rep.skipped and hasattr(rep, "wasxfail"):
        status = "xfail"
    elif rep.passed:
        status = "pass"
    else:
        status = "fail"
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    n, title = mark.args
    item.config.stash[ACCEPTANCE_KEY].setdefault((n, title), {})[item.name] = (status, detail)


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(ACCEPTANCE_KEY, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for (n, title), parts in sorted(results.items()):
        ok = all(s == "pass" for s, _ in parts.values())
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {n:>2}. {title}")
        for name, (status, detail) in parts.items():
            note = {"pass": "ok", "fail": "FAILED", "xfail": "expected failure"}[status]
            terminalreporter.write_line(f"        {name}: {note}" + (f"  [{detail}]" if detail else ""))
