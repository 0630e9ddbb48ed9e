import os
from contextlib import contextmanager

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def rb_ground():
    from cpgraphene.atoms import load_builtin_atom

    return load_builtin_atom("rb-ground")


# -- acceptance report ---------------------------------------------------------

_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """``with criterion(3, "title") as note:`` records PASS/FAIL for the summary.

    ``note(text)`` attaches measured values to the line.
    """
    @contextmanager
    def record(number, title):
        details = []
        try:
            yield details.append
        except BaseException:
            line = f"criterion {number} FAIL  {title}"
            _emit(line, details)
            raise
        else:
            _emit(f"criterion {number} PASS  {title}", details)

    return record


def _emit(line, details):
    if details:
        line += "  [" + "; ".join(details) + "]"
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
