import contextlib

import numpy as np
import pytest


_CRITERIA = []


@pytest.fixture
def rng():
    return np.random.default_rng(20260214)


@pytest.fixture
def criterion():
    @contextlib.contextmanager
    def record(number, description):
        try:
            yield
        except BaseException:
            _CRITERIA.append((number, description, False))
            print(f"[criterion {number}] FAIL  {description}")
            raise
        _CRITERIA.append((number, description, True))
        print(f"[criterion {number}] PASS  {description}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, passed in sorted(_CRITERIA):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {description}")
