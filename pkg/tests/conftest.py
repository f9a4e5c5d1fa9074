"""Print the acceptance report at the end of a pytest run."""


def pytest_terminal_summary(terminalreporter):
    lines = []
    for reports in terminalreporter.stats.values():
        for rep in reports:
            if getattr(rep, "when", None) != "call" or "test_acceptance" not in rep.nodeid:
                continue
            lines += [s for s in rep.capstdout.splitlines() if s.startswith("criterion ")]
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
