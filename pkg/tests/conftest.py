import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# criterion number -> list of (ok, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((ok, detail))


def acceptance_lines():
    lines = []
    for c in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[c]
        ok = all(p for p, _ in parts)
        failed = [d for p, d in parts if not p]
        detail = "; ".join(failed) if failed else "; ".join(d for _, d in parts)
        lines.append(f"criterion {c:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    return lines


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
