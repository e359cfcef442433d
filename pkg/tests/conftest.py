import _support


def pytest_terminal_summary(terminalreporter):
    if not _support.ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_support.ACCEPTANCE):
        ok, detail = _support.ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
