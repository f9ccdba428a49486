import numpy as np
import pytest

_CRITERIA: list[str] = []


@pytest.fixture
def criterion_report():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(number: int, title: str, ok: bool, detail: str = ""):
        _CRITERIA.append(f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else ""))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
