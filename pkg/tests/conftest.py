import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> list of (ok, detail), filled by the acceptance tests before they assert
CRITERIA: dict[int, list[tuple[bool, str]]] = {}


def record(n: int, ok: bool, detail: str):
    CRITERIA.setdefault(n, []).append((bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        parts = CRITERIA[n]
        ok = all(p[0] for p in parts)
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  " + "; ".join(d for _, d in parts))
