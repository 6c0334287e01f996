import time
from contextlib import contextmanager

import pytest

acceptance_key = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[acceptance_key] = []


@pytest.fixture
def criterion(request):
    """Times a criterion body, asserts its limit and logs one PASS/FAIL line."""
    lines = request.config.stash[acceptance_key]

    @contextmanager
    def run(number: int, title: str, limit: float):
        start = time.perf_counter()
        status, note = "FAIL", ""
        try:
            yield
            elapsed = time.perf_counter() - start
            if elapsed >= limit:
                note = f" (over the {limit:g} s limit)"
                raise AssertionError(f"took {elapsed:.2f} s, limit {limit:g} s")
            status = "PASS"
        except AssertionError as exc:
            note = note or " ({})".format(str(exc).split("\n")[0] or "assertion failed")
            raise
        finally:
            elapsed = time.perf_counter() - start
            line = f"[{status}] {number:2d}. {title}: {elapsed:.2f} s{note}"
            lines.append(line)
            print(line)

    return run


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[acceptance_key]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip("."))):
            terminalreporter.write_line(line)
