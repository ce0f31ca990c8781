from helpers import ACCEPTANCE_RESULTS


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(ACCEPTANCE_RESULTS):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {num}: {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
