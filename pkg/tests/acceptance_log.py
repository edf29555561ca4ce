"""Shared store for acceptance verdicts, printed at the end of the pytest run."""

LINES = {}


def record(key, title, ok, detail):
    line = f"ACCEPTANCE {key:<3} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    LINES[key] = line
    print(line)
    return ok
