ACCEPTANCE_LINES = []


def record_acceptance(criterion, passed, detail=""):
    tag = "PASS" if passed else "FAIL"
    line = f"ACCEPTANCE {criterion}: {tag}" + (f"  [{detail}]" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
