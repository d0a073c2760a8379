import pytest

verdicts_key = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[verdicts_key] = []


@pytest.fixture
def verdict(request, capsys):
    """Record a criterion outcome; prints one line and fails the test if any check failed."""

    def record(name, checks):
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{text} [{'ok' if passed else 'FAIL'}]" for text, passed in checks)
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        request.config.stash[verdicts_key].append(line)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(verdicts_key, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
