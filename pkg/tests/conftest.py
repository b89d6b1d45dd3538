import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_LINES: list[str] = []


@pytest.fixture
def report(capsys):
    """Record one ``CRITERION k: PASS|FAIL detail`` line, echoed live and in the summary."""

    def emit(key: str, ok: bool, detail: str) -> None:
        line = f"CRITERION {key}: {'PASS' if ok else 'FAIL'}  {detail}"
        _LINES.append(line)
        with capsys.disabled():
            print("\n" + line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: (int(s.split()[1].rstrip(":").rstrip("abcdefgh")), s)):
            terminalreporter.write_line(line)
