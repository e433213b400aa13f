"""Shared test plumbing: the acceptance suite records one verdict per
criterion and this plugin prints them as a summary block at the end of
the run."""

_VERDICTS: dict[int, tuple[bool, str]] = {}


def record_verdict(criterion: int, passed: bool, detail: str) -> None:
    _VERDICTS[criterion] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _VERDICTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_VERDICTS):
        ok, detail = _VERDICTS[n]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status} — {detail}")
