"""Shared test plumbing: collects the acceptance suite's one-line verdicts
and echoes them in the terminal summary, where output capture cannot hide
them."""

from __future__ import annotations

ACCEPTANCE_LINES: list[str] = []


def record_verdict(number: int, total: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    line = f"[{number:2d}/{total}] {name}: {status}"
    if detail:
        line += f"  ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
