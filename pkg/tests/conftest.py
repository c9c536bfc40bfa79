from collections import OrderedDict

# criterion number -> list of (part, passed, detail); filled by test_acceptance
ACCEPTANCE = OrderedDict()


def record(number, title, part, passed, detail=""):
    ACCEPTANCE.setdefault((number, title), []).append((part, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for (number, title), parts in sorted(ACCEPTANCE.items()):
        ok = all(p for _, p, _ in parts)
        detail = "; ".join(f"{name}: {'ok' if p else 'FAILED'}{' (' + d + ')' if d else ''}" for name, p, d in parts)
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2} {title} -- {detail}")
