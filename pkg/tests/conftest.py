import sys
from pathlib import Path

STUB_DIR = Path(__file__).parent / "stubs"

# acceptance tests register (criterion, passed, detail) tuples here
ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        flag = "PASS" if passed else "FAIL"
        line = f"{flag}: {name}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)


def stub_cmd(name: str) -> list[str]:
    return [sys.executable, str(STUB_DIR / name)]
