import pytest

ACCEPTANCE = pytest.StashKey[dict]()

CRITERIA = {
    1: "base calibrated estimate within 1.5pp of truth, CI contains truth",
    2: "uncalibrated baseline within 1pp of reference",
    3: "matched-assumption target estimates within tolerance",
    4: "mismatched-assumption target estimates in stated ranges",
    5: "weak/strong CI width ratio >= 2",
    6: "property suites",
    7: "sampling-bias demonstration",
    8: "experiment tables byte-identical across runs",
}


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


@pytest.fixture
def acceptance(request):
    """Record (criterion, name, passed, detail) for the terminal summary."""
    log = request.config.stash[ACCEPTANCE]

    def record(criterion, name, passed, detail=""):
        log.setdefault(criterion, []).append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(ACCEPTANCE, {})
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        entries = log.get(k)
        if entries is None:
            terminalreporter.write_line(f"SKIP criterion {k}: {CRITERIA[k]} (not run)")
            continue
        ok = all(p for _, p, _ in entries)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {k}: {CRITERIA[k]}")
        for name, p, detail in entries:
            if not p:
                terminalreporter.write_line(f"    failed: {name}: {detail}")
