import sys
from pathlib import Path

from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


# acceptance summary ---------------------------------------------------------
# tests/test_acceptance.py records (criterion, part, ok, detail) tuples here;
# the terminal summary folds them into one line per criterion.
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    by_crit = {}
    for crit, part, ok, detail in ACCEPTANCE:
        by_crit.setdefault(crit, []).append((part, ok, detail))
    for crit in sorted(by_crit):
        parts = by_crit[crit]
        ok = all(p[1] for p in parts)
        body = "; ".join(f"{part}: {'ok' if good else 'FAILED'} ({detail})" for part, good, detail in parts)
        tr.write_line(f"criterion {crit:2d} {'PASS' if ok else 'FAIL'}  {body}")
