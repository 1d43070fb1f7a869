import re

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion."""
    results = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            match = _CRITERION.search(getattr(report, "nodeid", ""))
            if match and report.when == "call" or (match and outcome == "error"):
                number = int(match.group(1))
                label = match.group(2).replace("_", " ")
                verdict = "PASS" if outcome == "passed" else "FAIL"
                results[number] = (verdict, label)
    if not results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(results):
        verdict, label = results[number]
        terminalreporter.write_line(f"criterion {number:2d} {verdict}  {label}")
