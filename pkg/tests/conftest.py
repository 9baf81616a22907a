import pytest

from relay4.model import GainVector, RateTuple

REFERENCE_GAINS = GainVector((7, 6, 5, 4))
EX1 = RateTuple((2, 0, 0, 0, 0, 2, 1, 1, 1, 1, 0, 0))
EX2 = RateTuple((0, 0, 2, 1, 0, 1, 1, 2, 0, 0, 0, 2))
EX1_EQUIV = RateTuple((2, 0, 1, 1, 0, 1, 1, 1, 1, 1, 0, 0))
EX2_EQUIV = RateTuple((0, 1, 2, 1, 1, 1, 1, 2, 0, 1, 1, 0))

_acceptance_lines: list[str] = []


@pytest.fixture
def g7654():
    return REFERENCE_GAINS


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion; printed in the summary."""

    def record(name: str, ok: bool, detail: str = "") -> bool:
        _acceptance_lines.append(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
        print(_acceptance_lines[-1])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
