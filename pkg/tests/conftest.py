import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# (criterion number, title, passed, detail), filled by test_acceptance
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, passed, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {num:>2}: {title} | {detail}")
