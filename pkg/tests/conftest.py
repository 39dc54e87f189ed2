import re

CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of every run."""
    rows = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            match = CRITERION.search(getattr(report, "nodeid", ""))
            if match:
                rows.append((int(match.group(1)), match.group(2), status))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, status in sorted(rows):
        word = "PASS" if status == "passed" else "FAIL"
        terminalreporter.write_line(f"{word}  criterion {number:2d}: {name.replace('_', ' ')}")
